import { StateFrame } from "./protocol.js";

export const TRAIL_LENGTH = 1000;
const FPS_WINDOW_MS = 1000;

export type Connection = "connecting" | "connected" | "closed";

export interface TrailPoint {
  seq: number;
  t: number;
  x: number;
  y: number;
  heading: number;
}

export interface Camera {
  // world coords of the canvas center, mm; ignored while following
  x: number;
  y: number;
  zoom: number; // px per mm
  follow: boolean;
}

export interface ViewState {
  frame: StateFrame | null;
  trail: TrailPoint[]; // seq-ascending ring, capped at TRAIL_LENGTH
  connection: Connection;
  notice: string | null;
  camera: Camera;
  receivedMs: number[]; // arrival stamps inside the fps window
}

export function createViewState(): ViewState {
  return {
    frame: null,
    trail: [],
    connection: "connecting",
    notice: null,
    camera: { x: 0, y: 0, zoom: 0.6, follow: true },
    receivedMs: [],
  };
}

export function receiveFrame(view: ViewState, frame: StateFrame, nowMs: number): void {
  const last = view.trail[view.trail.length - 1];
  if (last !== undefined && frame.seq <= last.seq) {
    return; // stale or duplicate delivery
  }
  view.frame = frame;
  view.trail.push({
    seq: frame.seq,
    t: frame.t,
    x: frame.pose.x,
    y: frame.pose.y,
    heading: frame.pose.heading,
  });
  if (view.trail.length > TRAIL_LENGTH) {
    view.trail.splice(0, view.trail.length - TRAIL_LENGTH);
  }
  view.receivedMs.push(nowMs);
  const cutoff = nowMs - FPS_WINDOW_MS;
  while (view.receivedMs.length > 0 && view.receivedMs[0] < cutoff) {
    view.receivedMs.shift();
  }
}

export function framesPerSecond(view: ViewState, nowMs: number): number {
  const cutoff = nowMs - FPS_WINDOW_MS;
  let n = 0;
  for (let i = view.receivedMs.length - 1; i >= 0; i--) {
    if (view.receivedMs[i] >= cutoff) n++;
    else break;
  }
  return n;
}

export function setConnection(view: ViewState, status: Connection): void {
  view.connection = status;
  if (status !== "connected") {
    view.receivedMs.length = 0;
  }
}

/** Net heading change in rad over roughly the last `windowS` of sim time. */
export function headingChange(view: ViewState, windowS: number): number {
  const trail = view.trail;
  if (trail.length < 2) return 0;
  const latest = trail[trail.length - 1];
  // a Reset rewinds t; only look back through monotone time
  let i = trail.length - 1;
  while (i > 0 && trail[i - 1].t < trail[i].t && latest.t - trail[i - 1].t <= windowS) {
    i--;
  }
  return latest.heading - trail[i].heading;
}
