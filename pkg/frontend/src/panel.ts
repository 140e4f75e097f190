/**
 * Panel controller: polls the service, pushes debounced weight updates, and
 * toggles per-source fault injection. All scoring stays server-side; the
 * controller only moves API values in and out of the panel state.
 */

import { ApiClient, ApiError } from "./api.js";
import { Debounced } from "./debounce.js";
import {
  PanelState,
  allSlidersZero,
  applyPoll,
  clampSlider,
  initialState,
  knownSources,
  markStale,
  slidersToWeights,
} from "./state.js";

const DROP_HORIZON_TS = 10_000_000;

export interface PanelOptions {
  pollIntervalMs?: number;
  debounceMs?: number;
  topN?: number;
  onRender?: (state: PanelState) => void;
}

export class PanelController {
  readonly state: PanelState;
  private readonly submitter: Debounced<Record<string, number>>;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private polling = false;

  constructor(
    private readonly api: ApiClient,
    options: PanelOptions = {},
  ) {
    this.state = initialState(options.pollIntervalMs ?? 1000, options.topN ?? 10);
    this.onRender = options.onRender ?? (() => undefined);
    this.submitter = new Debounced(
      (weights) => void this.submitWeights(weights),
      options.debounceMs ?? 300,
    );
  }

  private readonly onRender: (state: PanelState) => void;

  async openSession(profile: Parameters<ApiClient["openSession"]>[0]): Promise<string> {
    const sessionId = await this.api.openSession(profile);
    this.state.sessionId = sessionId;
    return sessionId;
  }

  attachSession(sessionId: string): void {
    this.state.sessionId = sessionId;
  }

  start(): void {
    if (this.pollTimer !== null) return;
    void this.pollOnce();
    this.pollTimer = setInterval(() => void this.pollOnce(), this.state.pollIntervalMs);
  }

  stop(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
    this.pollTimer = null;
    this.submitter.cancel();
  }

  /** One poll round; a failure keeps the last view and marks it stale. */
  async pollOnce(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (sessionId === null || this.polling) return;
    this.polling = true;
    try {
      const [context, recommendations, config] = await Promise.all([
        this.api.getContext(sessionId),
        this.api.getRecommendations(sessionId, this.state.topN),
        this.api.getConfig(sessionId),
      ]);
      applyPoll(this.state, context, recommendations, config);
    } catch {
      markStale(this.state);
    } finally {
      this.polling = false;
      this.onRender(this.state);
    }
  }

  /**
   * Move one slider. All-zero positions are blocked client-side; anything
   * else schedules a debounced PUT (at most one request per window).
   */
  setSlider(recId: string, value: number): void {
    this.state.sliders[recId] = clampSlider(value);
    if (allSlidersZero(this.state.sliders)) {
      this.state.weightsError = "at least one weight must stay above zero";
      this.submitter.cancel();
      this.onRender(this.state);
      return;
    }
    this.state.weightsError = null;
    this.submitter.trigger(slidersToWeights(this.state.sliders));
    this.onRender(this.state);
  }

  /** Force any pending weight update out immediately. */
  flushWeights(): void {
    this.submitter.flush();
  }

  private async submitWeights(weights: Record<string, number>): Promise<void> {
    const sessionId = this.state.sessionId;
    if (sessionId === null) return;
    try {
      await this.api.putWeights(sessionId, weights);
      this.state.weightsError = null;
      await this.pollOnce();
    } catch (err) {
      this.state.weightsError = err instanceof ApiError
        ? err.detail
        : "weight update failed";
      this.onRender(this.state);
    }
  }

  sources(): string[] {
    return knownSources(this.state.context);
  }

  /** Toggle a source; disabled sources become full-duration drops. */
  async toggleSource(sourceId: string, enabled: boolean): Promise<void> {
    if (enabled) {
      this.state.disabledSources.delete(sourceId);
    } else {
      this.state.disabledSources.add(sourceId);
    }
    const sessionId = this.state.sessionId;
    if (sessionId === null) return;
    const drops = [...this.state.disabledSources].sort().map((source) => ({
      source_id: source, from_ts: 0, to_ts: DROP_HORIZON_TS,
    }));
    try {
      await this.api.postFaults(sessionId, { drops, corruptions: [] });
    } catch {
      markStale(this.state);
    }
    this.onRender(this.state);
  }
}
