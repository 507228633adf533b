// Wire types for the /stream channel. Field names and units (mm, deg, s)
// are fixed by the service; keep this file in sync with its JSON schemas.

export type GaitName = "forward" | "backward" | "sidewinding";

export const BIAS_CLAMP = 20; // deg, the service clamps to the same bound

export const GAIT_CYCLE: GaitName[] = ["forward", "backward", "sidewinding"];

// hardware reference speeds shown in the HUD, mm/s
export const HARDWARE_SPEEDS: Record<GaitName, number> = {
  forward: 27.6,
  backward: 35.5,
  sidewinding: 20.0,
};

export const GAIT_PERIOD_S = 3.0; // every preset undulates at this period

export interface Pose {
  x: number;
  y: number;
  heading: number;
}

export interface StateFrame {
  type: "state";
  seq: number;
  t: number;
  pose: Pose;
  centerline: [number, number, number][];
  contacts: number[];
  speed: number;
  gait: GaitName | "custom";
  bias: number;
}

export interface ServiceNotice {
  type: "error" | "warning";
  message: string;
}

export type ServerMessage = StateFrame | ServiceNotice;

export type Command =
  | { type: "set_bias"; value: number }
  | { type: "set_gait"; value: GaitName }
  | { type: "start" }
  | { type: "stop" }
  | { type: "reset" }
  | { type: "set_param"; key: string; value: number };

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isPose(v: unknown): v is Pose {
  const p = v as Pose;
  return (
    typeof v === "object" && v !== null &&
    isFiniteNumber(p.x) && isFiniteNumber(p.y) && isFiniteNumber(p.heading)
  );
}

function isPoint(v: unknown): v is [number, number, number] {
  return Array.isArray(v) && v.length === 3 && v.every(isFiniteNumber);
}

export function parseServerMessage(text: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const msg = obj as Record<string, unknown>;
  if (msg.type === "error" || msg.type === "warning") {
    return typeof msg.message === "string"
      ? { type: msg.type, message: msg.message }
      : null;
  }
  if (msg.type !== "state") return null;
  if (
    !isFiniteNumber(msg.seq) || !isFiniteNumber(msg.t) || !isPose(msg.pose) ||
    !Array.isArray(msg.centerline) || !msg.centerline.every(isPoint) ||
    !Array.isArray(msg.contacts) || !msg.contacts.every(isFiniteNumber) ||
    !isFiniteNumber(msg.speed) || typeof msg.gait !== "string" ||
    !isFiniteNumber(msg.bias)
  ) {
    return null;
  }
  return msg as unknown as StateFrame;
}

export function serializeCommand(command: Command): string {
  return JSON.stringify(command);
}
