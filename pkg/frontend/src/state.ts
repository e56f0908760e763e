import type { Condition, RecommendationPayload } from "./types.js";

/** Per-question Likert answers for one card, keyed by question id. */
export type CardAnswers = Partial<Record<"q1" | "q2" | "q3" | "q4" | "q5", number>>;

/**
 * Client session: what the student entered, the current/previous payloads,
 * and the pending what-if additions. Never invents course ids; everything
 * rendered comes from server payloads.
 */
export class SessionState {
  studentId = "";
  condition: Condition = "no-exp";
  seed = 0;
  lastPayload: RecommendationPayload | null = null;
  baselinePayload: RecommendationPayload | null = null;
  pendingWhatIf: string[] = [];
  answers = new Map<string, CardAnswers>();

  setBaseline(payload: RecommendationPayload): void {
    this.baselinePayload = payload;
    this.lastPayload = payload;
    this.pendingWhatIf = [];
    this.answers.clear();
  }

  applyWhatIf(payload: RecommendationPayload, added: string[]): void {
    this.lastPayload = payload;
    this.pendingWhatIf = [...added];
  }

  addWhatIfCourse(courseId: string): boolean {
    if (!courseId || this.pendingWhatIf.includes(courseId)) return false;
    this.pendingWhatIf.push(courseId);
    return true;
  }

  removeWhatIfCourse(courseId: string): boolean {
    const i = this.pendingWhatIf.indexOf(courseId);
    if (i < 0) return false;
    this.pendingWhatIf.splice(i, 1);
    return true;
  }

  setAnswer(courseId: string, question: keyof CardAnswers, value: number): void {
    const card = this.answers.get(courseId) ?? {};
    card[question] = value;
    this.answers.set(courseId, card);
  }

  /** Survey for a card may be submitted only when every required item is set. */
  isCardComplete(courseId: string): boolean {
    const required: (keyof CardAnswers)[] =
      this.condition === "exp" ? ["q1", "q2", "q3", "q4", "q5"] : ["q1", "q2", "q3"];
    const card = this.answers.get(courseId);
    if (!card) return false;
    return required.every((q) => typeof card[q] === "number");
  }

  /**
   * Rank movement of a course relative to the baseline payload: positive
   * means it climbed after the what-if, null means it was not in the
   * baseline's top list.
   */
  rankChange(courseId: string): number | null {
    if (!this.baselinePayload || !this.lastPayload) return null;
    const before = this.baselinePayload.entries.find(
      (e) => e.course_id === courseId,
    );
    const after = this.lastPayload.entries.find((e) => e.course_id === courseId);
    if (!before || !after) return null;
    return before.score_rank - after.score_rank;
  }
}
