/**
 * Typed client for the reviver session HTTP API. The UI never interprets
 * conversation content itself; everything it renders comes from these
 * responses (the engine is the single source of truth).
 */

export interface Progress {
  visited: number;
  total: number;
}

export interface TurnAnnotations {
  selected_scene: number | null;
  classified_as: string | null;
  guidance_kind: string | null;
  emitted_detail_id: string | null;
  selected_photo_ids: string[] | null;
}

export interface TranscriptTurn {
  turn_index: number;
  speaker: 'user' | 'bot';
  text: string;
  annotations: TurnAnnotations;
}

export interface Transcript {
  collection_id: string;
  engine: string;
  seed: number | null;
  turns: TranscriptTurn[];
}

export interface SessionCreated {
  session_id: string;
  opening_message: string;
}

export interface MessageResponse {
  reply: string;
  guidance_kind: string | null;
  scene_id: number | null;
  phase: string;
  progress: Progress;
}

export interface SessionStateView {
  session_id: string;
  collection_id: string;
  engine: string;
  phase: string;
  progress: Progress;
  turn_count: number;
}

/** Non-2xx response; `detail` carries the server's error payload. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`API error ${status}: ${JSON.stringify(detail)}`);
  }

  /** True when the server refused because the session has concluded. */
  get concluded(): boolean {
    return (
      this.status === 409 &&
      typeof this.detail === 'object' &&
      this.detail !== null &&
      (this.detail as { phase?: string }).phase === 'concluded'
    );
  }

  /** 502s (and busy 409s) are worth retrying with the same message. */
  get retryable(): boolean {
    return this.status === 502 || (this.status === 409 && !this.concluded);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SessionApi {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      const detail =
        payload && typeof payload === 'object' && 'detail' in payload
          ? (payload as { detail: unknown }).detail
          : payload;
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  createSession(collectionId: string, engine: 'reviver' | 'baseline' = 'reviver'): Promise<SessionCreated> {
    return this.request('POST', '/sessions', { collection_id: collectionId, engine });
  }

  sendMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return this.request('POST', `/sessions/${sessionId}/message`, { text });
  }

  getTranscript(sessionId: string): Promise<Transcript> {
    return this.request('GET', `/sessions/${sessionId}/transcript`);
  }

  getState(sessionId: string): Promise<SessionStateView> {
    return this.request('GET', `/sessions/${sessionId}/state`);
  }
}
