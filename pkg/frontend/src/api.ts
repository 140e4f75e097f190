/**
 * Typed client for the ephemera session service.
 *
 * Every method maps to exactly one documented endpoint, and responses are
 * passed through verbatim: the panel never rescores or reformats values.
 * Concurrent GETs to the same endpoint share one in-flight request.
 */

export interface FeatureEstimateView {
  feature: string;
  status: "OK" | "CONFLICT" | "MISSING";
  value: string | null;
  instance_label: string | null;
  confidence: number;
  supporting_sources: string[];
}

export interface ContextView {
  tick_ts: number;
  sentence: string;
  id: string;
  estimates: FeatureEstimateView[];
}

export interface RecommendationEntry {
  track_id: string;
  score: number;
}

export interface RecommendationsView {
  tick_ts: number;
  entries: RecommendationEntry[];
  active_rec_ids: string[];
}

export interface RecommenderSpecView {
  rec_id: string;
  features: string[];
}

export interface SessionConfigView {
  vocab: Record<string, string[]>;
  specs: RecommenderSpecView[];
  weights: { user_weights: Record<string, number> };
}

export interface ProfilePayload {
  user_id: string;
  activity_speed_baselines: Record<string, number>;
  resting_bpm: number;
  friend_device_ids: string[];
  home_timezone: string;
}

export interface FaultPlanPayload {
  drops: { source_id: string; from_ts: number; to_ts: number }[];
  corruptions: {
    source_id: string; from_ts: number; to_ts: number;
    mode: "zero_quality" | "random_value"; seed: number;
  }[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly error: string,
    public readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let error = "http_error";
  let detail = `status ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") error = body.error;
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the generic detail
  }
  return new ApiError(response.status, error, detail);
}

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  /** GET with per-endpoint in-flight deduplication. */
  private getShared<T>(path: string): Promise<T> {
    const held = this.inflight.get(path);
    if (held) return held as Promise<T>;
    const started = this.request<T>("GET", path).finally(() => {
      this.inflight.delete(path);
    });
    this.inflight.set(path, started);
    return started;
  }

  async openSession(profile: ProfilePayload, sessionId?: string): Promise<string> {
    const body: Record<string, unknown> = { profile };
    if (sessionId !== undefined) body.session_id = sessionId;
    const out = await this.request<{ session_id: string }>("POST", "/sessions", body);
    return out.session_id;
  }

  getContext(sessionId: string): Promise<ContextView> {
    return this.getShared(`/sessions/${sessionId}/context`);
  }

  getRecommendations(sessionId: string, n: number): Promise<RecommendationsView> {
    return this.getShared(`/sessions/${sessionId}/recommendations?n=${n}`);
  }

  getConfig(sessionId: string): Promise<SessionConfigView> {
    return this.getShared(`/sessions/${sessionId}/config`);
  }

  putWeights(sessionId: string, userWeights: Record<string, number>): Promise<unknown> {
    return this.request("PUT", `/sessions/${sessionId}/weights`,
      { user_weights: userWeights });
  }

  postEvents(sessionId: string, readings: unknown[]): Promise<unknown> {
    return this.request("POST", `/sessions/${sessionId}/events`, { readings });
  }

  postFaults(sessionId: string, plan: FaultPlanPayload): Promise<unknown> {
    return this.request("POST", `/sessions/${sessionId}/faults`, plan);
  }

  getCatalog(): Promise<unknown> {
    return this.getShared("/catalog");
  }
}
