/** Wire contracts mirrored from the recommendation service. */

export type Condition = "exp" | "no-exp";

export interface RankedSkill {
  text: string;
  relevance: number;
}

export interface ExplanationPayload {
  learned: RankedSkill[];
  new: RankedSkill[];
}

export interface RecommendationEntry {
  course_id: string;
  title: string;
  department: string;
  description: string;
  score: number;
  score_rank: number;
  explanation?: ExplanationPayload;
}

export interface RecommendationPayload {
  student_id: string;
  condition: Condition;
  seed: number;
  entries: RecommendationEntry[];
}

export interface FeedbackBody {
  participant_id: string;
  course_id: string;
  condition: Condition;
  q1: number;
  q2: number;
  q3: number;
  q4?: number;
  q5?: number;
  major_declared: boolean;
}

export class PayloadError extends Error {}

const MAX_ENTRIES = 5;
export const MAX_CHIPS = 7;

/** Reject anything that violates the server contract before any rendering. */
export function validatePayload(raw: unknown): RecommendationPayload {
  if (typeof raw !== "object" || raw === null) {
    throw new PayloadError("payload is not an object");
  }
  const p = raw as Record<string, unknown>;
  if (!Array.isArray(p.entries)) {
    throw new PayloadError("payload has no entries array");
  }
  if (p.entries.length > MAX_ENTRIES) {
    throw new PayloadError(`too many entries: ${p.entries.length}`);
  }
  const condition = p.condition;
  if (condition !== "exp" && condition !== "no-exp") {
    throw new PayloadError(`bad condition: ${String(condition)}`);
  }
  const departments = new Set<string>();
  for (const e of p.entries as Array<Record<string, unknown>>) {
    for (const key of ["course_id", "title", "department"]) {
      if (typeof e[key] !== "string") {
        throw new PayloadError(`entry missing ${key}`);
      }
    }
    const dept = e.department as string;
    if (departments.has(dept)) {
      throw new PayloadError(`department shown twice: ${dept}`);
    }
    departments.add(dept);
    if (condition === "exp") {
      const exp = e.explanation as ExplanationPayload | undefined;
      if (!exp || !Array.isArray(exp.learned) || !Array.isArray(exp.new)) {
        throw new PayloadError("exp payload entry lacks explanation lists");
      }
      if (exp.learned.length > MAX_CHIPS || exp.new.length > MAX_CHIPS) {
        throw new PayloadError("explanation list exceeds 7 skills");
      }
    } else if (e.explanation !== undefined) {
      throw new PayloadError("no-exp payload carries an explanation");
    }
  }
  return raw as RecommendationPayload;
}
