import { validatePayload } from "./types.js";
import type { Condition, FeedbackBody, RecommendationPayload } from "./types.js";

export class NetworkError extends Error {}

export class HttpError extends Error {
  constructor(public status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

/**
 * Thin typed client over the service. At most one recommendation request is
 * in flight: starting a new one aborts the previous.
 */
export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = fetch.bind(globalThis),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      if ((err as Error).name === "AbortError") throw err;
      throw new NetworkError(String(err));
    }
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      body = null;
    }
    if (!resp.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : resp.statusText;
      throw new HttpError(resp.status, detail);
    }
    return body;
  }

  private beginExclusive(): AbortSignal {
    if (this.inflight) this.inflight.abort();
    this.inflight = new AbortController();
    return this.inflight.signal;
  }

  async recommendations(
    studentId: string,
    condition: Condition,
    seed: number,
  ): Promise<RecommendationPayload> {
    const signal = this.beginExclusive();
    const params = new URLSearchParams({ condition, seed: String(seed) });
    const raw = await this.request(
      `/api/students/${encodeURIComponent(studentId)}/recommendations?${params}`,
      { signal },
    );
    return validatePayload(raw);
  }

  async whatIf(
    studentId: string,
    addedCourses: string[],
    condition: Condition,
    seed: number,
  ): Promise<RecommendationPayload> {
    const signal = this.beginExclusive();
    const raw = await this.request("/api/whatif", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        student_id: studentId,
        added_courses: addedCourses,
        condition,
        seed,
      }),
      signal,
    });
    return validatePayload(raw);
  }

  async submitFeedback(body: FeedbackBody): Promise<void> {
    await this.request("/api/feedback", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
