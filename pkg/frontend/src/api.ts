/**
 * Typed client for the recommendation service JSON API (v1).
 *
 * Every method maps one endpoint; errors carry the HTTP status and the
 * server's detail message so the UI can surface them inline.
 */

export type Polarity = "like" | "dislike";

export interface EntityHit {
  id: string;
  name: string;
  kind: string;
}

export interface ReasonView {
  entity: string;
  name: string;
  contribution: number;
  polarity: Polarity;
}

export interface RecommendationView {
  movie: string;
  name: string;
  net_score: number;
  reasons: ReasonView[];
}

export interface HealthView {
  entities: number;
  edges: number;
  users: number;
}

export type FeedbackPredicate =
  | "likesEntity"
  | "dislikesEntity"
  | "likesMovie"
  | "dislikesMovie";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let detail = response.statusText || `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body && typeof body.detail === "string") {
      detail = body.detail;
    }
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiError(response.status, detail);
}

export class Client {
  constructor(private readonly baseUrl: string) {}

  private url(path: string, params?: Record<string, string>): string {
    const query = params ? `?${new URLSearchParams(params)}` : "";
    return `${this.baseUrl}/v1${path}${query}`;
  }

  async health(): Promise<HealthView> {
    const response = await fetch(this.url("/health"));
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as HealthView;
  }

  async searchEntities(
    q: string,
    kind?: string,
    signal?: AbortSignal,
  ): Promise<EntityHit[]> {
    const params: Record<string, string> = { q };
    if (kind) params.kind = kind;
    const response = await fetch(this.url("/entities", params), { signal });
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as EntityHit[];
  }

  async postFeedback(
    userId: string,
    predicate: FeedbackPredicate,
    target: string,
  ): Promise<void> {
    const response = await fetch(
      this.url(`/users/${encodeURIComponent(userId)}/feedback`),
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ predicate, target }),
      },
    );
    if (!response.ok) throw await errorFrom(response);
  }

  async recommendations(
    userId: string,
    k: number,
    signal?: AbortSignal,
  ): Promise<RecommendationView[]> {
    const response = await fetch(
      this.url(`/users/${encodeURIComponent(userId)}/recommendations`, {
        k: String(k),
      }),
      { signal },
    );
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as RecommendationView[];
  }

  async explanations(userId: string, movie: string): Promise<ReasonView[]> {
    const response = await fetch(
      this.url(
        `/users/${encodeURIComponent(userId)}/explanations/${encodeURIComponent(movie)}`,
      ),
    );
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as ReasonView[];
  }
}
