/**
 * Session controller: wires the API client to the view state.
 *
 * Discipline: at most one mutating request in flight (later thumbs clicks
 * are rejected until the current one settles), and a recommendation refresh
 * aborts any superseded in-flight refresh so stale responses never render.
 */

import { ApiError, Client } from "./api.js";
import type { EntityHit, Polarity } from "./api.js";
import {
  SessionView,
  initialView,
  withChip,
  withError,
  withLoading,
  withRecommendations,
  withSearchResults,
} from "./state.js";

export type ViewListener = (view: SessionView) => void;

export class Session {
  view: SessionView;
  private refreshController: AbortController | null = null;
  private mutationInFlight = false;

  constructor(
    private readonly client: Client,
    userId: string,
    private readonly onChange: ViewListener,
    private readonly k: number = 10,
  ) {
    this.view = initialView(userId);
  }

  private update(view: SessionView): void {
    this.view = view;
    this.onChange(view);
  }

  async search(query: string): Promise<void> {
    if (!query) {
      this.update(withSearchResults(this.view, query, []));
      return;
    }
    try {
      const results = await this.client.searchEntities(query);
      this.update(withSearchResults(this.view, query, results));
    } catch (err) {
      this.update(withError(this.view, describe(err)));
    }
  }

  /** Thumbs up/down on a search result: movie targets get movie-level
   * feedback, everything else entity-level. One mutation at a time. */
  async addFeedback(target: EntityHit, polarity: Polarity): Promise<boolean> {
    if (this.mutationInFlight) {
      return false;
    }
    this.mutationInFlight = true;
    const predicate =
      target.kind === "movie"
        ? polarity === "like"
          ? ("likesMovie" as const)
          : ("dislikesMovie" as const)
        : polarity === "like"
          ? ("likesEntity" as const)
          : ("dislikesEntity" as const);
    try {
      await this.client.postFeedback(this.view.userId, predicate, target.id);
      this.update(
        withChip(this.view, { entity: target.id, name: target.name, polarity }),
      );
    } catch (err) {
      this.update(withError(this.view, describe(err)));
      return false;
    } finally {
      this.mutationInFlight = false;
    }
    await this.refresh();
    return true;
  }

  /** Reload recommendations; a newer refresh cancels an older one. */
  async refresh(): Promise<void> {
    this.refreshController?.abort();
    const controller = new AbortController();
    this.refreshController = controller;
    this.update(withLoading(this.view));
    try {
      const recommendations = await this.client.recommendations(
        this.view.userId,
        this.k,
        controller.signal,
      );
      if (this.refreshController === controller) {
        this.update(withRecommendations(this.view, recommendations));
      }
    } catch (err) {
      if (isAbort(err)) {
        return; // superseded by a newer refresh
      }
      this.update(withError(this.view, describe(err)));
    }
  }
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException
    ? err.name === "AbortError"
    : err instanceof Error && err.name === "AbortError";
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `request failed (${err.status}): ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}
