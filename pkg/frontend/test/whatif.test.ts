// @vitest-environment jsdom
import { beforeEach, describe, expect, it, vi } from "vitest";

import { App } from "../src/main.js";
import { NetworkError } from "../src/api.js";
import type { ApiClient } from "../src/api.js";
import type { RecommendationPayload } from "../src/types.js";
import { entry, noExpPayload } from "./fixtures.js";

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<div id="root"></div><p id="status"></p>';
  root = document.getElementById("root")!;
});

function boostedPayload(): RecommendationPayload {
  // C3 climbs from rank 3 to rank 1 after the hypothetical semester.
  return {
    student_id: "S1",
    condition: "no-exp",
    seed: 0,
    entries: [
      entry("C3", "D3", 1),
      entry("C1", "D1", 2),
      entry("C2", "D2", 3),
      entry("C4", "D4", 4),
      entry("C5", "D5", 5),
    ],
  };
}

function stubApi(whatIfResult: RecommendationPayload = boostedPayload()) {
  return {
    recommendations: vi.fn().mockResolvedValue(noExpPayload()),
    whatIf: vi.fn().mockResolvedValue(whatIfResult),
    submitFeedback: vi.fn(),
  } as unknown as ApiClient;
}

describe("what-if loop", () => {
  it("re-renders with the server payload and highlights rank changes", async () => {
    const api = stubApi();
    const app = new App(api, root, null);
    await app.loadRecommendations("S1", "no-exp", 0);
    await app.runWhatIf(["X1"]);
    expect(api.whatIf).toHaveBeenCalledWith("S1", ["X1"], "no-exp", 0);
    const cards = [...root.querySelectorAll(".rec-card")];
    expect((cards[0] as HTMLElement).dataset.courseId).toBe("C3");
    const indicator = cards[0].querySelector(".rank-change");
    expect(indicator).not.toBeNull();
    expect(indicator!.classList.contains("up")).toBe(true);
  });

  it("empty addition never fetches", async () => {
    const api = stubApi();
    const app = new App(api, root, null);
    await app.loadRecommendations("S1", "no-exp", 0);
    const fetched = await app.runWhatIf([]);
    expect(fetched).toBe(false);
    expect(api.whatIf).not.toHaveBeenCalled();
  });

  it("add then remove returns the view to the baseline payload", async () => {
    const api = stubApi();
    const app = new App(api, root, null);
    await app.loadRecommendations("S1", "no-exp", 0);
    app.state.addWhatIfCourse("X1");
    await app.runWhatIf(app.state.pendingWhatIf);
    expect((root.querySelector(".rec-card") as HTMLElement).dataset.courseId)
      .toBe("C3");
    app.state.removeWhatIfCourse("X1");
    await app.runWhatIf(app.state.pendingWhatIf);
    // back to baseline order without another network call
    expect(api.whatIf).toHaveBeenCalledTimes(1);
    expect((root.querySelector(".rec-card") as HTMLElement).dataset.courseId)
      .toBe("C1");
    expect(root.querySelector(".rank-change")).toBeNull();
  });

  it("network failure shows a retry affordance and preserves state", async () => {
    const api = stubApi();
    (api.whatIf as ReturnType<typeof vi.fn>).mockRejectedValue(
      new NetworkError("boom"),
    );
    const app = new App(api, root, null);
    await app.loadRecommendations("S1", "no-exp", 0);
    app.state.addWhatIfCourse("X1");
    app.state.setAnswer("C1", "q1", 4);
    await app.runWhatIf(app.state.pendingWhatIf);
    expect(root.querySelector(".error-banner")).not.toBeNull();
    const retry = root.querySelector<HTMLButtonElement>(".retry-button");
    expect(retry).not.toBeNull();
    expect(app.state.pendingWhatIf).toEqual(["X1"]);
    expect(app.state.answers.get("C1")).toEqual({ q1: 4 });

    // the retry button re-issues the same what-if once the network is back
    (api.whatIf as ReturnType<typeof vi.fn>).mockResolvedValue(boostedPayload());
    retry!.click();
    await vi.waitFor(() => {
      expect(root.querySelector(".rec-card")).not.toBeNull();
    });
    expect((root.querySelector(".rec-card") as HTMLElement).dataset.courseId)
      .toBe("C3");
  });

  it("later requests abort earlier ones (single in-flight request)", async () => {
    const aborted: boolean[] = [];
    const slowFetch = vi.fn(
      (_url: RequestInfo | URL, init?: RequestInit) =>
        new Promise<Response>((resolve, reject) => {
          const signal = init?.signal;
          signal?.addEventListener("abort", () => {
            aborted.push(true);
            reject(new DOMException("aborted", "AbortError"));
          });
          setTimeout(
            () =>
              resolve(
                new Response(JSON.stringify(noExpPayload()), {
                  status: 200,
                  headers: { "Content-Type": "application/json" },
                }),
              ),
            30,
          );
        }),
    );
    const { ApiClient } = await import("../src/api.js");
    const client = new ApiClient("", slowFetch as unknown as typeof fetch);
    const first = client.recommendations("S1", "no-exp", 0);
    const second = client.recommendations("S1", "no-exp", 1);
    await expect(first).rejects.toThrow();
    await expect(second).resolves.toMatchObject({ student_id: "S1" });
    expect(aborted).toHaveLength(1);
  });
});
