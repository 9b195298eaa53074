/**
 * Typed HTTP client for the annotation service.
 *
 * Every method returns a parsed response or throws an `ApiError`
 * carrying the HTTP status and the service's `detail` message, so the
 * caller can distinguish a rejected submission (4xx) from a transport
 * failure (plain `Error` / `TypeError` from fetch).
 */

export interface SessionInfo {
  session_id: string;
  n_tasks: number;
}

export interface CandidateView {
  candidate_id: string;
  text: string;
}

export interface TaskView {
  done: boolean;
  task_id?: string;
  figure_id?: string;
  mode?: "rate" | "rank" | "vote";
  title?: string;
  abstract?: string;
  image_url?: string;
  aspects?: string[];
  candidates?: CandidateView[];
}

export interface SubmitAck {
  ok: boolean;
  seq: number;
}

export interface RatingPayload {
  task_id: string;
  values: Record<string, number>;
  valid: boolean;
  exclusion_reason?: string;
}

export interface RankingPayload {
  task_id: string;
  order: string[];
}

export interface VotePayload {
  task_id: string;
  worst: string;
}

/** Error raised for non-2xx responses; `status` is the HTTP code. */
export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
    this.status = status;
  }
}

function extractDetail(body: unknown): string | undefined {
  if (typeof body !== "object" || body === null) return undefined;
  const detail = (body as { detail?: unknown }).detail;
  if (typeof detail === "string") return detail;
  if (Array.isArray(detail)) {
    const messages = detail
      .map((item) =>
        typeof item === "object" && item !== null && "msg" in item
          ? String((item as { msg: unknown }).msg)
          : undefined,
      )
      .filter((msg): msg is string => msg !== undefined);
    if (messages.length > 0) return messages.join("; ");
  }
  return undefined;
}

async function toApiError(response: Response): Promise<ApiError> {
  let detail: string | undefined;
  try {
    detail = extractDetail(await response.json());
  } catch {
    detail = undefined;
  }
  return new ApiError(response.status, detail ?? `HTTP ${response.status}`);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: typeof fetch;

  constructor(base = "", fetchImpl: typeof fetch = fetch) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    if (!response.ok) throw await toApiError(response);
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createSession(annotatorId: string): Promise<SessionInfo> {
    return this.post<SessionInfo>("/sessions", { annotator_id: annotatorId });
  }

  nextTask(sessionId: string): Promise<TaskView> {
    return this.request<TaskView>(
      `/sessions/${encodeURIComponent(sessionId)}/next`,
    );
  }

  submitRating(sessionId: string, payload: RatingPayload): Promise<SubmitAck> {
    return this.post<SubmitAck>(
      `/sessions/${encodeURIComponent(sessionId)}/ratings`,
      payload,
    );
  }

  submitRanking(
    sessionId: string,
    payload: RankingPayload,
  ): Promise<SubmitAck> {
    return this.post<SubmitAck>(
      `/sessions/${encodeURIComponent(sessionId)}/rankings`,
      payload,
    );
  }

  submitVote(sessionId: string, payload: VotePayload): Promise<SubmitAck> {
    return this.post<SubmitAck>(
      `/sessions/${encodeURIComponent(sessionId)}/votes`,
      payload,
    );
  }
}
