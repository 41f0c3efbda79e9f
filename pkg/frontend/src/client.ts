// Thin WebSocket wrapper: parses inbound frames, serializes outbound ones.
// The socket is injectable so tests can drive the client without a server.

import {
  ClientFrame,
  ProtocolError,
  ServerFrame,
  parseServerFrame,
  serializeClientFrame,
} from "./protocol.js";
import { ConnectionPhase } from "./viewmodel.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
}

export interface ClientHandlers {
  onFrame: (frame: ServerFrame) => void;
  onPhase: (phase: ConnectionPhase) => void;
  /** Inbound messages the panel could not parse; shown but never fatal. */
  onBadFrame?: (message: string) => void;
}

export function sessionUrl(host: string, participantId: string): string {
  return `ws://${host}/ws?participant=${encodeURIComponent(participantId)}`;
}

export class PanelClient {
  private readonly socket: SocketLike;
  private readonly handlers: ClientHandlers;

  constructor(
    url: string,
    handlers: ClientHandlers,
    socketFactory: (url: string) => SocketLike = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {
    this.handlers = handlers;
    handlers.onPhase("connecting");
    this.socket = socketFactory(url);
    this.socket.onopen = () => handlers.onPhase("open");
    this.socket.onclose = () => handlers.onPhase("closed");
    this.socket.onerror = () => handlers.onPhase("closed");
    this.socket.onmessage = (ev) => this.receive(ev.data);
  }

  private receive(data: unknown): void {
    if (typeof data !== "string") {
      this.handlers.onBadFrame?.("non-text message ignored");
      return;
    }
    let frame: ServerFrame;
    try {
      frame = parseServerFrame(data);
    } catch (exc) {
      if (exc instanceof ProtocolError) {
        this.handlers.onBadFrame?.(exc.message);
        return;
      }
      throw exc;
    }
    this.handlers.onFrame(frame);
  }

  send(frame: ClientFrame): void {
    this.socket.send(serializeClientFrame(frame));
  }

  close(): void {
    this.socket.close();
  }
}
