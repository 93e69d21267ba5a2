/**
 * Session view state: a plain data snapshot derived from API responses and
 * the pending input. All updates are pure functions returning a new view;
 * nothing here computes scores or reorders server results.
 */

import type { EntityHit, Polarity, RecommendationView } from "./api.js";

export interface Chip {
  entity: string;
  name: string;
  polarity: Polarity;
}

export interface SessionView {
  userId: string;
  query: string;
  searchResults: EntityHit[];
  chips: Chip[];
  recommendations: RecommendationView[];
  loading: boolean;
  error: string | null;
}

export function initialView(userId: string): SessionView {
  return {
    userId,
    query: "",
    searchResults: [],
    chips: [],
    recommendations: [],
    loading: false,
    error: null,
  };
}

/** A confirmed feedback post: opposite-polarity chip for the same entity is
 * replaced, mirroring the server's replacement rule. */
export function applyChip(chips: Chip[], chip: Chip): Chip[] {
  const kept = chips.filter((existing) => existing.entity !== chip.entity);
  return [...kept, chip];
}

export function withSearchResults(view: SessionView, query: string,
                                  results: EntityHit[]): SessionView {
  return { ...view, query, searchResults: results, error: null };
}

export function withRecommendations(view: SessionView,
                                    recommendations: RecommendationView[]): SessionView {
  return { ...view, recommendations, loading: false, error: null };
}

export function withChip(view: SessionView, chip: Chip): SessionView {
  return { ...view, chips: applyChip(view.chips, chip) };
}

export function withLoading(view: SessionView): SessionView {
  return { ...view, loading: true };
}

export function withError(view: SessionView, message: string): SessionView {
  return { ...view, loading: false, error: message };
}
