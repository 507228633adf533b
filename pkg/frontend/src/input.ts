import { BIAS_CLAMP, Command, GAIT_CYCLE, GaitName } from "./protocol.js";

// one send per throttle window keeps the stream under 30 commands/s
export const THROTTLE_MS = 34;

export type CommandSink = (command: Command) => void;

/**
 * Merges keyboard and analog steering into a throttled command stream.
 *
 * Arrow keys deflect fully, an analog axis maps linearly, and whichever
 * source is deflected further wins. Releasing everything springs the bias
 * back to zero. Buttons are edge-triggered and queued ahead of bias
 * updates; `tick` must be called regularly (the render loop does).
 */
export class SteeringController {
  private held = new Set<string>();
  private axis = 0;
  private queue: Command[] = [];
  private lastSentBias: number | null = null;
  private lastSendMs = -Infinity;
  private assumedRunning = true; // the service starts unpaused
  private gait: GaitName = "forward";

  constructor(private send: CommandSink) {}

  /** Track the service's view so gait cycling starts from the right place. */
  noteGait(gait: string): void {
    if ((GAIT_CYCLE as string[]).includes(gait)) {
      this.gait = gait as GaitName;
    }
  }

  keyDown(key: string): void {
    if (this.held.has(key)) return; // auto-repeat is not an edge
    this.held.add(key);
    switch (key) {
      case " ":
        this.toggleRun();
        break;
      case "r":
        this.queue.push({ type: "reset" });
        break;
      case "g":
        this.cycleGait();
        break;
    }
  }

  keyUp(key: string): void {
    this.held.delete(key);
  }

  /** Analog steering in [-1, 1]; positive deflects left like +bias. */
  setAxis(value: number): void {
    this.axis = Math.max(-1, Math.min(1, value));
  }

  toggleRun(): void {
    this.assumedRunning = !this.assumedRunning;
    this.queue.push({ type: this.assumedRunning ? "start" : "stop" });
  }

  reset(): void {
    this.queue.push({ type: "reset" });
  }

  cycleGait(): void {
    const next = GAIT_CYCLE[(GAIT_CYCLE.indexOf(this.gait) + 1) % GAIT_CYCLE.length];
    this.gait = next;
    this.queue.push({ type: "set_gait", value: next });
  }

  selectGait(gait: GaitName): void {
    this.gait = gait;
    this.queue.push({ type: "set_gait", value: gait });
  }

  targetBias(): number {
    const keys = (this.held.has("ArrowLeft") ? 1 : 0) - (this.held.has("ArrowRight") ? 1 : 0);
    const source = Math.abs(this.axis) > Math.abs(keys) ? this.axis : keys;
    return source * BIAS_CLAMP;
  }

  /** Send at most one command if the throttle window has elapsed. */
  tick(nowMs: number): void {
    if (nowMs - this.lastSendMs < THROTTLE_MS) return;
    const queued = this.queue.shift();
    if (queued !== undefined) {
      this.lastSendMs = nowMs;
      this.send(queued);
      return;
    }
    const bias = this.targetBias();
    if (bias !== this.lastSentBias) {
      this.lastSendMs = nowMs;
      this.lastSentBias = bias;
      this.send({ type: "set_bias", value: bias });
    }
  }
}
