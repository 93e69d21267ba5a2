import { describe, expect, it } from "vitest";

import type { RecommendationView } from "../src/api";
import { escapeHtml, renderApp } from "../src/render";
import { initialView, withError, withRecommendations, withSearchResults } from "../src/state";

const RECS: RecommendationView[] = [
  {
    movie: "bridge_of_spies",
    name: "Bridge of Spies",
    net_score: 0.0042,
    reasons: [
      { entity: "tom_hanks", name: "Tom Hanks", contribution: 0.0033, polarity: "like" },
      { entity: "crime", name: "Crime", contribution: -0.0002, polarity: "dislike" },
    ],
  },
  {
    movie: "snowden",
    name: "Snowden",
    net_score: 0.001,
    reasons: [
      { entity: "drama_thriller", name: "Drama/Thriller", contribution: 0.001, polarity: "like" },
    ],
  },
];

function cardOrder(html: string): string[] {
  return [...html.matchAll(/data-movie="([^"]+)"/g)].map((m) => m[1] ?? "");
}

describe("renderApp", () => {
  it("keeps the API order without re-sorting", () => {
    const view = withRecommendations(initialView("alice"), RECS);
    expect(cardOrder(renderApp(view))).toEqual(["bridge_of_spies", "snowden"]);
    const reversed = withRecommendations(initialView("alice"), [...RECS].reverse());
    expect(cardOrder(renderApp(reversed))).toEqual(["snowden", "bridge_of_spies"]);
  });

  it("marks dislike reasons with a minus badge", () => {
    const html = renderApp(withRecommendations(initialView("alice"), RECS));
    expect(html).toContain('class="badge badge-like"');
    expect(html).toMatch(/badge badge-dislike[^>]*>− Crime</);
  });

  it("is a pure function of the view", () => {
    const view = withRecommendations(initialView("alice"), RECS);
    expect(renderApp(view)).toBe(renderApp(view));
  });

  it("renders the empty state and errors inline", () => {
    const empty = initialView("alice");
    expect(renderApp(empty)).toContain("No recommendations yet");
    const failed = withError(empty, "request failed (404): unknown target 'ghost'");
    expect(renderApp(failed)).toContain("request failed (404)");
  });

  it("escapes markup in names", () => {
    const view = withSearchResults(initialView("alice"), "x", [
      { id: "weird", name: "<script>alert(1)</script>", kind: "movie" },
    ]);
    const html = renderApp(view);
    expect(html).not.toContain("<script>alert");
    expect(html).toContain("&lt;script&gt;");
    expect(escapeHtml('a"b&c')).toBe("a&quot;b&amp;c");
  });
});
