/**
 * Render the session view to an HTML string.
 *
 * Pure: the same view renders the same markup, and lists keep the order the
 * API returned. Dislike reasons carry an explicit minus badge.
 */

import type { ReasonView, RecommendationView } from "./api.js";
import type { Chip, SessionView } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderBadge(reason: ReasonView): string {
  const sign = reason.polarity === "dislike" ? "−" : "+";
  const cls = reason.polarity === "dislike" ? "badge badge-dislike" : "badge badge-like";
  const magnitude = Math.abs(reason.contribution).toExponential(2);
  return (
    `<span class="${cls}" data-entity="${escapeHtml(reason.entity)}" ` +
    `title="${sign}${magnitude}">${sign} ${escapeHtml(reason.name)}</span>`
  );
}

function renderCard(rec: RecommendationView, rank: number): string {
  const badges = rec.reasons.map(renderBadge).join(" ");
  return (
    `<article class="card" data-movie="${escapeHtml(rec.movie)}" data-rank="${rank}">` +
    `<h3>${rank}. ${escapeHtml(rec.name)}</h3>` +
    `<p class="score">net score ${rec.net_score.toExponential(3)}</p>` +
    `<p class="reasons">${badges}</p>` +
    `</article>`
  );
}

function renderChip(chip: Chip): string {
  const sign = chip.polarity === "dislike" ? "−" : "+";
  const cls = chip.polarity === "dislike" ? "chip chip-dislike" : "chip chip-like";
  return (
    `<span class="${cls}" data-entity="${escapeHtml(chip.entity)}">` +
    `${sign} ${escapeHtml(chip.name)}</span>`
  );
}

function renderSearchRow(hit: { id: string; name: string; kind: string }): string {
  return (
    `<li data-id="${escapeHtml(hit.id)}">` +
    `<span class="hit">${escapeHtml(hit.name)} <em>(${escapeHtml(hit.kind)})</em></span>` +
    `<button class="thumb" data-action="like" data-id="${escapeHtml(hit.id)}">&#128077;</button>` +
    `<button class="thumb" data-action="dislike" data-id="${escapeHtml(hit.id)}">&#128078;</button>` +
    `</li>`
  );
}

export function renderApp(view: SessionView): string {
  const chips = view.chips.map(renderChip).join(" ") || "<em>no feedback yet</em>";
  const results = view.searchResults.map(renderSearchRow).join("");
  const cards = view.recommendations.length
    ? view.recommendations.map((rec, index) => renderCard(rec, index + 1)).join("")
    : '<p class="empty">No recommendations yet. Search for something you like.</p>';
  const error = view.error
    ? `<p class="error" role="alert">${escapeHtml(view.error)}</p>`
    : "";
  const loading = view.loading ? '<p class="loading">updating…</p>' : "";
  return (
    `<section class="session" data-user="${escapeHtml(view.userId)}">` +
    `${error}` +
    `<div class="feedback"><h2>Your taste</h2>${chips}</div>` +
    `<ul class="results">${results}</ul>` +
    `<div class="recommendations"><h2>Recommended</h2>${loading}${cards}</div>` +
    `</section>`
  );
}
