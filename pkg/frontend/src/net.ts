import { Command, ServerMessage, parseServerMessage, serializeCommand } from "./protocol.js";
import { Connection } from "./state.js";

const RECONNECT_MS = 1000;

// the WebSocket surface we actually use, injectable for tests
export interface SocketLike {
  readyState: number;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamCallbacks {
  onMessage(message: ServerMessage): void;
  onStatus(status: Connection): void;
}

const OPEN = 1;

export class StreamClient {
  private socket: SocketLike | null = null;
  private closed = false;

  constructor(
    private url: string,
    private callbacks: StreamCallbacks,
    private factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
    private schedule: (fn: () => void, ms: number) => void = (fn, ms) => {
      setTimeout(fn, ms);
    },
  ) {}

  connect(): void {
    this.callbacks.onStatus("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => this.callbacks.onStatus("connected");
    socket.onmessage = (ev) => {
      const message = parseServerMessage(String(ev.data));
      if (message !== null) {
        this.callbacks.onMessage(message);
      }
    };
    socket.onclose = () => {
      this.callbacks.onStatus("closed");
      this.socket = null;
      if (!this.closed) {
        this.schedule(() => this.connect(), RECONNECT_MS);
      }
    };
  }

  /** True when the command went out; disconnected input is dropped. */
  sendCommand(command: Command): boolean {
    const socket = this.socket;
    if (socket === null || socket.readyState !== OPEN) return false;
    socket.send(serializeCommand(command));
    return true;
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
