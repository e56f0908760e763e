import type { Condition } from "./types.js";

export interface Question {
  id: "q1" | "q2" | "q3" | "q4" | "q5";
  statement: string;
  expOnly: boolean;
}

export const QUESTIONS: Question[] = [
  {
    id: "q1",
    statement: "I am interested in taking this course.",
    expOnly: false,
  },
  {
    id: "q2",
    statement: "I was surprised that the system picked this course to recommend to me.",
    expOnly: false,
  },
  {
    id: "q3",
    statement: "I have never seen or heard about this course before.",
    expOnly: false,
  },
  {
    id: "q4",
    statement: "This explanation helps me determine how interested I am in taking this course.",
    expOnly: true,
  },
  {
    id: "q5",
    statement: "The explanation helps me better understand how the course relates to my field of study.",
    expOnly: true,
  },
];

export const SCALE_LABELS = [
  "Strongly Disagree",
  "Disagree",
  "Neutral",
  "Agree",
  "Strongly Agree",
];

export function questionsFor(condition: Condition): Question[] {
  return QUESTIONS.filter((q) => !q.expOnly || condition === "exp");
}
