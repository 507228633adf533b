import { describe, expect, it } from "vitest";

import { buildScene, liftedRuns, turnIndicator } from "../src/render.js";
import { createViewState, receiveFrame, setConnection } from "../src/state.js";
import { makeFrame } from "./frames.js";

const W = 900;
const H = 520;

function sceneFor(view: ReturnType<typeof createViewState>) {
  return buildScene(view, 0, W, H, W, 90);
}

describe("buildScene", () => {
  it("draws exactly one marker per contact", () => {
    const view = createViewState();
    setConnection(view, "connected");
    receiveFrame(view, makeFrame({ contacts: [0, 1, 2] }), 0);
    const scene = sceneFor(view);
    expect(scene.topDown!.contacts).toHaveLength(3);
  });

  it("keeps the robot centered in follow mode", () => {
    const view = createViewState();
    setConnection(view, "connected");
    // park the robot far from the world origin
    receiveFrame(
      view,
      makeFrame({ pose: { x: 5000, y: -3000, heading: 0.7 } }),
      0,
    );
    const scene = sceneFor(view);
    const pts = scene.topDown!.polyline;
    const cx = pts.reduce((a, p) => a + p.x, 0) / pts.length;
    const cy = pts.reduce((a, p) => a + p.y, 0) / pts.length;
    expect(Math.abs(cx - W / 2)).toBeLessThan(0.1 * W);
    expect(Math.abs(cy - H / 2)).toBeLessThan(0.1 * H);
  });

  it("shows lifted arcs for a vertically bent body", () => {
    // alternating ground and lifted sections, like the forward gait
    const centerline: [number, number, number][] = [];
    for (let i = 0; i < 50; i++) {
      const z = Math.max(0, 30 * Math.sin((i / 49) * 4 * Math.PI));
      centerline.push([i * 25, 0, z]);
    }
    const view = createViewState();
    setConnection(view, "connected");
    receiveFrame(view, makeFrame({ centerline, contacts: [0] }), 0);
    const scene = sceneFor(view);
    expect(scene.side!.liftedRuns.length).toBeGreaterThanOrEqual(2);
    expect(scene.side!.profile).toHaveLength(50);
  });

  it("greys the scene while disconnected", () => {
    const view = createViewState();
    setConnection(view, "connected");
    receiveFrame(view, makeFrame(), 0);
    setConnection(view, "closed");
    const scene = sceneFor(view);
    expect(scene.greyed).toBe(true);
    expect(scene.topDown).not.toBeNull(); // last frame still shown, dimmed
    expect(scene.hud.connection).toBe("closed");
  });

  it("renders a placeholder before the first frame", () => {
    const scene = sceneFor(createViewState());
    expect(scene.greyed).toBe(true);
    expect(scene.topDown).toBeNull();
    expect(scene.hud.gait).toBe("-");
  });

  it("shows the hardware reference speed for the active gait", () => {
    const view = createViewState();
    setConnection(view, "connected");
    receiveFrame(view, makeFrame({ gait: "backward" }), 0);
    expect(sceneFor(view).hud.reference).toContain("35.5");
  });
});

describe("liftedRuns", () => {
  it("finds contiguous runs above the threshold", () => {
    expect(liftedRuns([0, 2, 3, 0, 0, 5, 0], 1)).toEqual([
      [1, 2],
      [5, 5],
    ]);
    expect(liftedRuns([4, 4, 4], 1)).toEqual([[0, 2]]);
    expect(liftedRuns([0, 0], 1)).toEqual([]);
  });
});

describe("turnIndicator", () => {
  function viewWithDrift(bias: number, driftSign: number) {
    const view = createViewState();
    setConnection(view, "connected");
    // two undulation cycles of frames with steadily drifting heading
    for (let i = 0; i < 120; i++) {
      receiveFrame(
        view,
        makeFrame({
          seq: i + 1,
          t: i * 0.05,
          bias,
          pose: { x: 0, y: 0, heading: driftSign * i * 0.002 },
        }),
        i * 50,
      );
    }
    return view;
  }

  it("matches the bias sign within two cycles", () => {
    expect(turnIndicator(viewWithDrift(20, +1))).toBe("left");
    expect(turnIndicator(viewWithDrift(-20, -1))).toBe("right");
  });

  it("reads straight for a steady heading", () => {
    expect(turnIndicator(viewWithDrift(0, 0))).toBe("straight");
  });
});
