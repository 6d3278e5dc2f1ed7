import type { RecommendationResult, SessionView, WhatIfProbe } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const CONDITION_BADGES: Record<string, string> = {
  "SHOULD BECOME SATISFIED": "badge-become-satisfied",
  "SHOULD NOT BE VIOLATED": "badge-keep-satisfied",
  "SHOULD NOT BE SATISFIED": "badge-keep-violated",
  "SHOULD BECOME VIOLATED": "badge-become-violated",
};

const RV_CLASSES: Record<string, string> = {
  violated: "rv-violated",
  satisfied: "rv-satisfied",
  "possibly violated": "rv-possibly-violated",
  "possibly satisfied": "rv-possibly-satisfied",
};

export function renderTimeline(prefix: string[], unknown: string[] = []): string {
  const flagged = new Set(unknown);
  const items = prefix
    .map((activity, i) => {
      const badge = flagged.has(activity) ? ' <span class="badge-unknown">unknown</span>' : "";
      return `<li><span class="step-no">${i + 1}</span> ${escapeHtml(activity)}${badge}</li>`;
    })
    .join("\n");
  return `<ol class="timeline">\n${items}\n</ol>`;
}

export function renderRecommendations(result: RecommendationResult | null): string {
  if (result === null) {
    return `<p class="empty-state">add the first event to see recommendations</p>`;
  }
  if (result.recommendations.length === 0) {
    return `<p class="on-track">case on track: no action needed</p>`;
  }
  // priority field order is the screen order
  const rows = [...result.recommendations]
    .sort((a, b) => a.priority - b.priority)
    .map(
      (r) =>
        `<li class="recommendation" data-priority="${r.priority}">` +
        `<span class="${CONDITION_BADGES[r.condition] ?? "badge"}">${escapeHtml(r.condition)}</span> ` +
        `<code>${escapeHtml(r.constraint)}</code></li>`
    )
    .join("\n");
  return `<ol class="recommendations">\n${rows}\n</ol>`;
}

export function renderRvTable(result: RecommendationResult | null): string {
  if (result === null) return "";
  const rows = Object.entries(result.rv_snapshot)
    .map(
      ([constraint, state]) =>
        `<tr><td><code>${escapeHtml(constraint)}</code></td>` +
        `<td class="${RV_CLASSES[state] ?? "rv-unknown"}">${escapeHtml(state)}</td></tr>`
    )
    .join("\n");
  return `<table class="rv-table"><tbody>\n${rows}\n</tbody></table>`;
}

export function renderScores(result: RecommendationResult | null): string {
  if (result === null) return "";
  return (
    `<p class="scores">score <strong>${result.rho.toFixed(3)}</strong>, ` +
    `fitness <strong>${result.fitness.toFixed(3)}</strong></p>`
  );
}

export function renderSession(view: SessionView): string {
  const parts = [renderTimeline(view.prefix, view.unknown_activities)];
  if (view.error !== null) {
    parts.push(`<p class="notice-unrecoverable">${escapeHtml(view.error)}</p>`);
  }
  parts.push(renderRecommendations(view.result));
  parts.push(renderRvTable(view.result));
  parts.push(renderScores(view.result));
  return `<section class="session">\n${parts.filter(Boolean).join("\n")}\n</section>`;
}

export function renderProbe(probe: WhatIfProbe): string {
  const badge = probe.flaggedUnknown ? ' <span class="badge-unknown">unknown activity</span>' : "";
  const deltas = probe.deltas
    .map((d) => `<li class="${d.kind}"><code>${escapeHtml(d.constraint)}</code> ${d.kind.replace(/-/g, " ")}</li>`)
    .join("\n");
  return (
    `<aside class="probe">` +
    `<h4>if next: ${escapeHtml(probe.candidateActivity)}${badge}</h4>` +
    (deltas ? `<ul class="probe-deltas">\n${deltas}\n</ul>` : `<p class="probe-neutral">no recommendation changes</p>`) +
    renderRecommendations(probe.result) +
    `</aside>`
  );
}

export function renderConnectionLost(): string {
  return `<div class="banner-offline">connection to the recommendation service lost</div>`;
}
