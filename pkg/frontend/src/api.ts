/** Thin client for the courserec JSON API, plus single-in-flight request
 * tracking so stale responses never overwrite newer ones. */

import type {
  CatalogResponse,
  KeywordsResponse,
  ProjectionResponse,
  RecommendRequest,
  RecommendResponse,
  SimilarResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

type Fetch = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: Fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<{ status: string; model_version: string }> {
    return this.request("/v1/health");
  }

  catalog(): Promise<CatalogResponse> {
    return this.request("/v1/catalog");
  }

  query(req: RecommendRequest): Promise<RecommendResponse> {
    return this.post("/v1/query", req);
  }

  recommend(req: RecommendRequest): Promise<RecommendResponse> {
    return this.post("/v1/recommend", req);
  }

  similar(courseId: string, k = 10): Promise<SimilarResponse> {
    return this.request(
      `/v1/similar/${encodeURIComponent(courseId)}?k=${k}`,
    );
  }

  keywords(studentId: string, k = 5): Promise<KeywordsResponse> {
    return this.request(
      `/v1/keywords/${encodeURIComponent(studentId)}?k=${k}`,
    );
  }

  projection(method = "pca", limit = 200, seed = 0): Promise<ProjectionResponse> {
    return this.request(`/v1/projection?method=${method}&limit=${limit}&seed=${seed}`);
  }
}

/** Keeps one logical request stream per panel: each `run` supersedes the
 * previous one, and a response that arrives after a newer submit resolves
 * to `null` instead of its value. */
export class LatestOnly {
  private seq = 0;

  async run<T>(task: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.seq;
    const value = await task();
    return ticket === this.seq ? value : null;
  }
}
