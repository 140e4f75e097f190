/**
 * Panel state: a mirror of the most recent successful poll plus the user's
 * slider and fault-toggle inputs. Failed polls never clear the mirror; they
 * only flip the stale flag.
 */

import type { ContextView, RecommendationsView, SessionConfigView } from "./api.js";

export interface PanelState {
  sessionId: string | null;
  pollIntervalMs: number;
  topN: number;
  stale: boolean;
  context: ContextView | null;
  recommendations: RecommendationsView | null;
  config: SessionConfigView | null;
  /** slider positions in [0, 1], keyed by rec_id; mirrors user_weights */
  sliders: Record<string, number>;
  weightsError: string | null;
  /** sources the user has toggled off; mapped to full-duration drops */
  disabledSources: Set<string>;
}

export function initialState(pollIntervalMs = 1000, topN = 10): PanelState {
  return {
    sessionId: null,
    pollIntervalMs,
    topN,
    stale: false,
    context: null,
    recommendations: null,
    config: null,
    sliders: {},
    weightsError: null,
    disabledSources: new Set(),
  };
}

export function applyPoll(
  state: PanelState,
  context: ContextView,
  recommendations: RecommendationsView,
  config: SessionConfigView,
): void {
  state.context = context;
  state.recommendations = recommendations;
  state.config = config;
  state.stale = false;
  for (const [recId, weight] of Object.entries(config.weights.user_weights)) {
    if (!(recId in state.sliders)) state.sliders[recId] = clampSlider(weight);
  }
}

export function markStale(state: PanelState): void {
  state.stale = true;
}

export function clampSlider(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(1, Math.max(0, value));
}

/** Sliders map linearly onto user_weights; normalization is server-side. */
export function slidersToWeights(sliders: Record<string, number>): Record<string, number> {
  const out: Record<string, number> = {};
  for (const [recId, value] of Object.entries(sliders)) out[recId] = value;
  return out;
}

export function allSlidersZero(sliders: Record<string, number>): boolean {
  const values = Object.values(sliders);
  return values.length > 0 && values.every((v) => v === 0);
}

/** Source ids seen in the current context, for the fault toggle list. */
export function knownSources(context: ContextView | null): string[] {
  if (!context) return [];
  const sources = new Set<string>();
  for (const estimate of context.estimates) {
    for (const source of estimate.supporting_sources) sources.add(source);
  }
  return [...sources].sort();
}
