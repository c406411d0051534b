/** HTTP client for the design service. All solving happens server-side. */

import {
  ApiError,
  DiagnosticsDoc,
  GridPatternDoc,
  SessionInfo,
  SolverParams,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(body.message);
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export interface ClientOptions {
  /** injected for tests; defaults to the global fetch */
  fetchFn?: FetchLike;
  /** job polling interval in ms */
  pollMs?: number;
}

async function fail(res: Response): Promise<never> {
  let body: ApiError;
  try {
    body = (await res.json()) as ApiError;
  } catch {
    body = { message: `HTTP ${res.status}` };
  }
  throw new ServiceError(res.status, body);
}

export class DesignClient {
  private fetchFn: FetchLike;
  private pollMs: number;

  constructor(
    public readonly baseUrl: string,
    opts: ClientOptions = {},
  ) {
    this.fetchFn = opts.fetchFn ?? ((url, init) => fetch(url, init));
    this.pollMs = opts.pollMs ?? 500;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) await fail(res);
    return (await res.json()) as T;
  }

  async createSession(pattern: GridPatternDoc): Promise<string> {
    const out = await this.json<{ id: string }>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(pattern),
    });
    return out.id;
  }

  async getSession(sid: string): Promise<SessionInfo> {
    return this.json<SessionInfo>(`/sessions/${sid}`);
  }

  async putPattern(sid: string, pattern: GridPatternDoc): Promise<void> {
    await this.json(`/sessions/${sid}/pattern`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(pattern),
    });
  }

  /**
   * Run a simulation to completion. Small patterns come back synchronously;
   * large ones return a job id that is polled until done.
   */
  async simulate(
    sid: string,
    params?: SolverParams,
  ): Promise<DiagnosticsDoc> {
    const res = await this.fetchFn(`${this.baseUrl}/sessions/${sid}/simulate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params ? { params } : {}),
    });
    if (!res.ok) await fail(res);
    if (res.status === 202) {
      const { job } = (await res.json()) as { job: string };
      await this.waitForJob(job);
      return this.diagnostics(sid);
    }
    return (await res.json()) as DiagnosticsDoc;
  }

  async waitForJob(jid: string, timeoutMs = 300_000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const status = await this.json<{ status: string; error?: string }>(
        `/jobs/${jid}`,
      );
      if (status.status === "done") return;
      if (status.status === "failed") {
        throw new ServiceError(500, {
          message: status.error ?? "simulation failed",
        });
      }
      if (Date.now() > deadline) {
        throw new ServiceError(504, { message: "simulation timed out" });
      }
      await new Promise((r) => setTimeout(r, this.pollMs));
    }
  }

  async diagnostics(sid: string): Promise<DiagnosticsDoc> {
    return this.json<DiagnosticsDoc>(`/sessions/${sid}/result/diagnostics`);
  }

  /** Raw OBJ text of the smocked mesh. */
  async mesh(sid: string, variant: "merged" | "fine" = "merged"): Promise<string> {
    const res = await this.fetchFn(
      `${this.baseUrl}/sessions/${sid}/result/mesh?variant=${variant}`,
    );
    if (!res.ok) await fail(res);
    return res.text();
  }
}
