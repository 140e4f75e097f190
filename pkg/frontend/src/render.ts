/**
 * Pure HTML renderers. Every displayed value is the API field verbatim
 * (scores via String(n), text as received); the panel adds markup only.
 */

import type { ContextView, RecommendationsView, RecommenderSpecView } from "./api.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderSentence(context: ContextView | null): string {
  const sentence = context ? context.sentence : "Unknown context";
  return `<p class="sentence">${escapeHtml(sentence)}</p>`;
}

export function renderChips(context: ContextView | null): string {
  if (!context) return '<div class="chips"></div>';
  const chips = context.estimates.map((estimate) => {
    const cls = `chip chip-${estimate.status.toLowerCase()}`;
    const label = estimate.status === "OK"
      ? `${estimate.feature}: ${estimate.value}`
      : `${estimate.feature}: ${estimate.status}`;
    const conf = estimate.status === "OK"
      ? `<span class="conf">${String(estimate.confidence)}</span>`
      : "";
    return `<span class="${cls}" data-feature="${escapeHtml(estimate.feature)}"` +
      ` data-status="${estimate.status}">${escapeHtml(label)}${conf}</span>`;
  });
  return `<div class="chips">${chips.join("")}</div>`;
}

export function renderRecommendations(recommendations: RecommendationsView | null): string {
  if (!recommendations || recommendations.entries.length === 0) {
    return '<ol class="recs empty"></ol>';
  }
  const items = recommendations.entries.map((entry) =>
    `<li data-track="${escapeHtml(entry.track_id)}">` +
    `<span class="track">${escapeHtml(entry.track_id)}</span>` +
    `<span class="score">${String(entry.score)}</span></li>`);
  return `<ol class="recs">${items.join("")}</ol>`;
}

export function renderActiveRecs(
  recommendations: RecommendationsView | null,
  specs: RecommenderSpecView[],
): string {
  const active = new Set(recommendations ? recommendations.active_rec_ids : []);
  const rows = specs.map((spec) => {
    const cls = active.has(spec.rec_id) ? "rec-active" : "rec-inactive";
    return `<span class="${cls}" data-rec="${escapeHtml(spec.rec_id)}">` +
      `${escapeHtml(spec.rec_id)}</span>`;
  });
  return `<div class="active-recs">${rows.join("")}</div>`;
}

export function renderSliders(
  sliders: Record<string, number>,
  error: string | null,
): string {
  const rows = Object.keys(sliders).sort().map((recId) => {
    const value = sliders[recId] ?? 0;
    return `<label class="slider-row" data-rec="${escapeHtml(recId)}">` +
      `<span>${escapeHtml(recId)}</span>` +
      `<input type="range" min="0" max="1" step="0.01" value="${value}"` +
      ` data-slider="${escapeHtml(recId)}">` +
      `<span class="slider-value">${String(value)}</span></label>`;
  });
  const message = error
    ? `<p class="weights-error">${escapeHtml(error)}</p>`
    : "";
  return `<div class="sliders">${rows.join("")}${message}</div>`;
}

export function renderStale(stale: boolean): string {
  return stale
    ? '<span class="stale-badge" data-stale="1">stale</span>'
    : '<span class="stale-badge hidden" data-stale="0"></span>';
}

export function renderFaultToggles(
  sources: string[],
  disabled: Set<string>,
): string {
  const rows = sources.map((source) => {
    const checked = disabled.has(source) ? "" : " checked";
    return `<label class="fault-row" data-source="${escapeHtml(source)}">` +
      `<input type="checkbox" data-fault="${escapeHtml(source)}"${checked}>` +
      `<span>${escapeHtml(source)}</span></label>`;
  });
  return `<div class="faults">${rows.join("")}</div>`;
}
