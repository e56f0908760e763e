import type { RecommendationEntry, RecommendationPayload } from "../src/types.js";

export function entry(
  id: string,
  dept: string,
  rank: number,
  explanation?: RecommendationEntry["explanation"],
): RecommendationEntry {
  const e: RecommendationEntry = {
    course_id: id,
    title: `Title ${id}`,
    department: dept,
    description: `Description for ${id} with enough words to look real.`,
    score: 10 - rank,
    score_rank: rank,
  };
  if (explanation) e.explanation = explanation;
  return e;
}

export function skills(n: number, prefix: string) {
  return Array.from({ length: n }, (_, i) => ({
    text: `${prefix} skill ${i}`,
    relevance: 1 - i * 0.1,
  }));
}

export function expPayload(): RecommendationPayload {
  return {
    student_id: "S1",
    condition: "exp",
    seed: 0,
    entries: [
      entry("C1", "D1", 1, { learned: skills(3, "old"), new: skills(7, "new") }),
      entry("C2", "D2", 2, { learned: [], new: skills(2, "fresh") }),
      entry("C3", "D3", 3, { learned: skills(1, "past"), new: [] }),
      entry("C4", "D4", 4, { learned: skills(7, "a"), new: skills(7, "b") }),
      entry("C5", "D5", 5, { learned: [], new: [] }),
    ],
  };
}

export function noExpPayload(): RecommendationPayload {
  return {
    student_id: "S1",
    condition: "no-exp",
    seed: 0,
    entries: [
      entry("C1", "D1", 1),
      entry("C2", "D2", 2),
      entry("C3", "D3", 3),
      entry("C4", "D4", 4),
      entry("C5", "D5", 5),
    ],
  };
}
