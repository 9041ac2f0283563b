/**
 * Typed client for the differential service.
 *
 * Every number the explorer ever shows comes out of these responses; the
 * client performs no scoring or reordering of its own.
 */

import type {
  CodexMeta,
  Differential,
  Explanation,
  Proposal,
  SessionInfo,
  Status,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (error) {
      throw new ApiError(0, 'unreachable', `service unreachable: ${String(error)}`);
    }
    if (!response.ok) {
      let code = 'http_error';
      let message = `HTTP ${response.status}`;
      try {
        const payload = (await response.json()) as { error?: { code?: string; message?: string } };
        if (payload.error) {
          code = payload.error.code ?? code;
          message = payload.error.message ?? message;
        }
      } catch {
        // body was not the documented error envelope; keep the generic message
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  createSession(): Promise<SessionInfo> {
    return this.request('POST', '/v1/sessions');
  }

  getCodex(): Promise<CodexMeta> {
    return this.request('GET', '/v1/codex');
  }

  getDifferential(sessionId: string, k?: number): Promise<Differential> {
    const query = k === undefined ? '' : `?k=${k}`;
    return this.request('GET', `/v1/sessions/${sessionId}/differential${query}`);
  }

  postFinding(sessionId: string, feature: string, status: Status): Promise<Differential> {
    return this.request('POST', `/v1/sessions/${sessionId}/findings`, { feature, status });
  }

  whatIf(sessionId: string, feature: string, status: Status): Promise<Differential> {
    return this.request('POST', `/v1/sessions/${sessionId}/whatif`, { feature, status });
  }

  getExplanation(sessionId: string, hypothesis: string): Promise<Explanation> {
    return this.request('GET', `/v1/sessions/${sessionId}/explanations/${hypothesis}`);
  }

  extract(sessionId: string, text: string): Promise<{ proposals: Proposal[] }> {
    return this.request('POST', `/v1/sessions/${sessionId}/extract`, { text });
  }
}
