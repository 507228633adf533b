import { GAIT_PERIOD_S, HARDWARE_SPEEDS, GaitName, StateFrame } from "./protocol.js";
import { ViewState, framesPerSecond, headingChange } from "./state.js";

export const LIFT_EPS_MM = 1.0; // side strip counts z above this as lifted
const TURN_EPS_RAD = 0.02;
const ARROW_PX = 42;

export interface Pt {
  x: number;
  y: number;
}

export interface TopDownScene {
  polyline: Pt[];
  contacts: Pt[]; // one marker per contact index in the frame
  trail: Pt[];
  arrow: { from: Pt; to: Pt };
}

export interface SideScene {
  profile: Pt[]; // (arc length, z) in strip pixels, y grows upward from base
  liftedRuns: [number, number][];
}

export type TurnIndicator = "left" | "right" | "straight";

export interface Hud {
  gait: string;
  bias: string;
  speed: string;
  reference: string;
  turn: TurnIndicator;
  fps: number;
  connection: string;
  notice: string | null;
}

export interface Scene {
  greyed: boolean;
  topDown: TopDownScene | null;
  side: SideScene | null;
  hud: Hud;
}

function bodyToWorld(frame: StateFrame, p: [number, number, number]): Pt {
  const { x, y, heading } = frame.pose;
  const c = Math.cos(heading);
  const s = Math.sin(heading);
  return { x: x + c * p[0] - s * p[1], y: y + s * p[0] + c * p[1] };
}

/** Contiguous index runs of the centerline that sit above the ground. */
export function liftedRuns(zs: number[], eps: number): [number, number][] {
  const runs: [number, number][] = [];
  let start = -1;
  for (let i = 0; i < zs.length; i++) {
    if (zs[i] > eps) {
      if (start < 0) start = i;
    } else if (start >= 0) {
      runs.push([start, i - 1]);
      start = -1;
    }
  }
  if (start >= 0) runs.push([start, zs.length - 1]);
  return runs;
}

export function turnIndicator(view: ViewState): TurnIndicator {
  const dh = headingChange(view, 2 * GAIT_PERIOD_S);
  if (dh > TURN_EPS_RAD) return "left";
  if (dh < -TURN_EPS_RAD) return "right";
  return "straight";
}

export function buildScene(
  view: ViewState,
  nowMs: number,
  width: number,
  height: number,
  stripWidth: number,
  stripHeight: number,
): Scene {
  const frame = view.frame;
  const hud: Hud = {
    gait: frame ? frame.gait : "-",
    bias: frame ? `${frame.bias.toFixed(1)} deg` : "-",
    speed: frame ? `${frame.speed.toFixed(1)} mm/s` : "-",
    reference:
      frame && frame.gait !== "custom"
        ? `hardware ${HARDWARE_SPEEDS[frame.gait as GaitName].toFixed(1)} mm/s`
        : "hardware 27.6 / 35.5 / 20.0 mm/s",
    turn: turnIndicator(view),
    fps: framesPerSecond(view, nowMs),
    connection: view.connection,
    notice: view.notice,
  };
  if (frame === null) {
    return { greyed: true, topDown: null, side: null, hud };
  }

  const world = frame.centerline.map((p) => bodyToWorld(frame, p));
  let cx = view.camera.x;
  let cy = view.camera.y;
  if (view.camera.follow) {
    cx = world.reduce((a, p) => a + p.x, 0) / world.length;
    cy = world.reduce((a, p) => a + p.y, 0) / world.length;
  }
  const zoom = view.camera.zoom;
  const toScreen = (p: { x: number; y: number }): Pt => ({
    x: width / 2 + (p.x - cx) * zoom,
    y: height / 2 - (p.y - cy) * zoom,
  });

  const polyline = world.map(toScreen);
  const contacts = frame.contacts
    .filter((i) => i >= 0 && i < polyline.length)
    .map((i) => polyline[i]);
  const centroid = polyline.reduce(
    (a, p) => ({ x: a.x + p.x / polyline.length, y: a.y + p.y / polyline.length }),
    { x: 0, y: 0 },
  );
  const arrow = {
    from: centroid,
    to: {
      x: centroid.x + ARROW_PX * Math.cos(frame.pose.heading),
      y: centroid.y - ARROW_PX * Math.sin(frame.pose.heading),
    },
  };

  // side strip: z against arc length, stretched to the strip box
  const arc: number[] = [0];
  for (let i = 1; i < frame.centerline.length; i++) {
    const [x0, y0, z0] = frame.centerline[i - 1];
    const [x1, y1, z1] = frame.centerline[i];
    arc.push(arc[i - 1] + Math.hypot(x1 - x0, y1 - y0, z1 - z0));
  }
  const span = arc[arc.length - 1] || 1;
  const zs = frame.centerline.map((p) => p[2]);
  const zMax = Math.max(40, ...zs); // mm, keep a stable vertical scale
  const profile = frame.centerline.map((p, i) => ({
    x: (arc[i] / span) * stripWidth,
    y: stripHeight - (p[2] / zMax) * (stripHeight - 6),
  }));

  return {
    greyed: view.connection !== "connected",
    topDown: {
      polyline,
      contacts,
      trail: view.trail.map(toScreen),
      arrow,
    },
    side: { profile, liftedRuns: liftedRuns(zs, LIFT_EPS_MM) },
    hud,
  };
}

export function drawScene(
  top: CanvasRenderingContext2D,
  side: CanvasRenderingContext2D,
  scene: Scene,
): void {
  const w = top.canvas.width;
  const h = top.canvas.height;
  top.clearRect(0, 0, w, h);
  top.fillStyle = "#10141a";
  top.fillRect(0, 0, w, h);
  if (scene.topDown) {
    const td = scene.topDown;
    top.globalAlpha = scene.greyed ? 0.35 : 1.0;

    top.strokeStyle = "#39434f";
    top.lineWidth = 1;
    top.beginPath();
    td.trail.forEach((p, i) => (i === 0 ? top.moveTo(p.x, p.y) : top.lineTo(p.x, p.y)));
    top.stroke();

    top.strokeStyle = "#6fd3a0";
    top.lineWidth = 4;
    top.lineJoin = "round";
    top.beginPath();
    td.polyline.forEach((p, i) => (i === 0 ? top.moveTo(p.x, p.y) : top.lineTo(p.x, p.y)));
    top.stroke();

    top.fillStyle = "#ff5c5c";
    for (const p of td.contacts) {
      top.beginPath();
      top.arc(p.x, p.y, 4, 0, 2 * Math.PI);
      top.fill();
    }

    top.strokeStyle = "#e8d06a";
    top.lineWidth = 2;
    top.beginPath();
    top.moveTo(td.arrow.from.x, td.arrow.from.y);
    top.lineTo(td.arrow.to.x, td.arrow.to.y);
    top.stroke();
    top.globalAlpha = 1.0;
  }
  if (scene.greyed) {
    top.fillStyle = "#c5ccd6";
    top.font = "16px sans-serif";
    top.fillText(`${scene.hud.connection} - reconnecting`, 16, 28);
  }

  const sw = side.canvas.width;
  const sh = side.canvas.height;
  side.clearRect(0, 0, sw, sh);
  side.fillStyle = "#10141a";
  side.fillRect(0, 0, sw, sh);
  if (scene.side) {
    side.globalAlpha = scene.greyed ? 0.35 : 1.0;
    side.strokeStyle = "#2c333d";
    side.beginPath();
    side.moveTo(0, sh - 1);
    side.lineTo(sw, sh - 1);
    side.stroke();

    side.strokeStyle = "#6fd3a0";
    side.lineWidth = 2;
    side.beginPath();
    scene.side.profile.forEach((p, i) =>
      i === 0 ? side.moveTo(p.x, p.y) : side.lineTo(p.x, p.y),
    );
    side.stroke();

    // shade the lifted arcs so ground clearance is obvious at a glance
    side.fillStyle = "rgba(255, 92, 92, 0.25)";
    for (const [a, b] of scene.side.liftedRuns) {
      const x0 = scene.side.profile[a].x;
      const x1 = scene.side.profile[b].x;
      side.fillRect(x0, 0, Math.max(x1 - x0, 2), sh);
    }
    side.globalAlpha = 1.0;
  }
}
