import { ApiClient, HttpError, NetworkError } from "./api.js";
import { renderErrorBanner, renderFromRaw } from "./render.js";
import { SessionState } from "./state.js";
import type { Condition, FeedbackBody, RecommendationPayload } from "./types.js";

/**
 * Controller tying the form, the API client, and the renderer together.
 * Exported separately from the bootstrap so component tests can drive it
 * against a stubbed client.
 */
export class App {
  readonly state = new SessionState();

  constructor(
    private api: ApiClient,
    private cardsRoot: HTMLElement,
    private statusRoot: HTMLElement | null = null,
  ) {}

  private setStatus(text: string): void {
    if (this.statusRoot) this.statusRoot.textContent = text;
  }

  private render(payload: RecommendationPayload): void {
    renderFromRaw(this.cardsRoot, payload, this.state, {
      onAnswer: (cid, q, v) =>
        this.state.setAnswer(cid, q as "q1" | "q2" | "q3" | "q4" | "q5", v),
      onSubmitSurvey: (cid) => void this.submitSurvey(cid),
    });
  }

  async loadRecommendations(
    studentId: string,
    condition: Condition,
    seed: number,
  ): Promise<void> {
    this.state.studentId = studentId;
    this.state.condition = condition;
    this.state.seed = seed;
    this.setStatus("loading...");
    try {
      const payload = await this.api.recommendations(studentId, condition, seed);
      this.state.setBaseline(payload);
      this.render(payload);
      this.setStatus("");
    } catch (err) {
      this.handleFailure(err, () =>
        void this.loadRecommendations(studentId, condition, seed),
      );
    }
  }

  /**
   * Re-fetch with the pending what-if additions. An empty set never hits the
   * network: if a previous what-if is showing, the stored baseline comes
   * back (the server is stateless, so it is still current); otherwise no-op.
   */
  async runWhatIf(added: string[]): Promise<boolean> {
    if (added.length === 0) {
      const showingWhatIf =
        this.state.baselinePayload !== null &&
        this.state.lastPayload !== this.state.baselinePayload;
      if (showingWhatIf) {
        this.state.applyWhatIf(this.state.baselinePayload!, []);
        this.render(this.state.baselinePayload!);
      }
      return false;
    }
    this.setStatus("re-scoring...");
    try {
      const payload = await this.api.whatIf(
        this.state.studentId,
        added,
        this.state.condition,
        this.state.seed,
      );
      this.state.applyWhatIf(payload, added);
      this.render(payload);
      this.setStatus("");
      return true;
    } catch (err) {
      this.handleFailure(err, () => void this.runWhatIf(added));
      return false;
    }
  }

  async submitSurvey(courseId: string): Promise<void> {
    if (!this.state.isCardComplete(courseId)) return;
    const answers = this.state.answers.get(courseId)!;
    const body: FeedbackBody = {
      participant_id: this.state.studentId,
      course_id: courseId,
      condition: this.state.condition,
      q1: answers.q1!,
      q2: answers.q2!,
      q3: answers.q3!,
      major_declared: true,
    };
    if (this.state.condition === "exp") {
      body.q4 = answers.q4;
      body.q5 = answers.q5;
    }
    try {
      await this.api.submitFeedback(body);
      const card = this.cardsRoot.querySelector<HTMLElement>(
        `[data-course-id="${courseId}"]`,
      );
      const button = card?.querySelector<HTMLButtonElement>(".survey-submit");
      if (button) {
        button.textContent = "Feedback recorded";
        button.disabled = true;
      }
    } catch (err) {
      this.setStatus(
        err instanceof HttpError
          ? `feedback rejected: ${err.message}`
          : "feedback failed, try again",
      );
    }
  }

  private handleFailure(err: unknown, retry: () => void): void {
    if ((err as Error).name === "AbortError") return; // superseded request
    const message =
      err instanceof NetworkError
        ? "Cannot reach the recommendation service."
        : err instanceof HttpError
          ? err.message
          : String(err);
    // What-if state and answers survive a failed request untouched.
    renderErrorBanner(this.cardsRoot, message, { onRetry: retry });
    this.setStatus("");
  }
}

function bootstrap(): void {
  const api = new ApiClient("");
  const cards = document.getElementById("cards");
  const status = document.getElementById("status");
  const form = document.getElementById("student-form") as HTMLFormElement | null;
  const whatifForm = document.getElementById("whatif-form") as HTMLFormElement | null;
  if (!cards || !form) return;
  const app = new App(api, cards, status);

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const student = (document.getElementById("student-id") as HTMLInputElement).value.trim();
    const condition = (document.getElementById("condition") as HTMLSelectElement)
      .value as Condition;
    const seed = Number(
      (document.getElementById("seed") as HTMLInputElement).value || "0",
    );
    if (student) void app.loadRecommendations(student, condition, seed);
  });

  whatifForm?.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const box = document.getElementById("whatif-courses") as HTMLInputElement;
    const added = box.value
      .split(",")
      .map((s) => s.trim())
      .filter(Boolean);
    if (added.length > 0) void app.runWhatIf(added);
  });
}

if (typeof document !== "undefined" && document.getElementById("cards")) {
  bootstrap();
}
