import { questionsFor, SCALE_LABELS } from "./questions.js";
import type { SessionState } from "./state.js";
import { PayloadError, validatePayload } from "./types.js";
import type { RecommendationEntry, RecommendationPayload } from "./types.js";

export interface Handlers {
  onAnswer?: (courseId: string, question: string, value: number) => void;
  onSubmitSurvey?: (courseId: string) => void;
  onRetry?: () => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function chipList(
  label: string,
  kind: "learned" | "new",
  skills: { text: string; relevance: number }[],
): HTMLElement | null {
  if (skills.length === 0) return null; // no empty-section artifact
  const wrap = el("div", `chip-section ${kind}`);
  wrap.appendChild(el("h4", "chip-label", label));
  const list = el("ul", `chip-list ${kind}`);
  for (const skill of skills.slice(0, 7)) {
    const li = el("li", "chip", skill.text);
    li.title = `relevance ${skill.relevance.toFixed(3)}`;
    list.appendChild(li);
  }
  wrap.appendChild(list);
  return wrap;
}

function likertRow(
  courseId: string,
  questionId: string,
  statement: string,
  state: SessionState,
  handlers: Handlers,
  card: HTMLElement,
): HTMLElement {
  const row = el("div", "likert");
  row.dataset.question = questionId;
  row.appendChild(el("p", "likert-statement", statement));
  const scale = el("div", "likert-scale");
  for (let value = 1; value <= 5; value++) {
    const label = el("label", "likert-option");
    const input = el("input") as HTMLInputElement;
    input.type = "radio";
    input.name = `${courseId}-${questionId}`;
    input.value = String(value);
    input.addEventListener("change", () => {
      handlers.onAnswer?.(courseId, questionId, value);
      updateSubmitGate(card, courseId, state);
    });
    label.appendChild(input);
    label.appendChild(
      el("span", "likert-text", `${value} - ${SCALE_LABELS[value - 1]}`),
    );
    scale.appendChild(label);
  }
  row.appendChild(scale);
  return row;
}

function updateSubmitGate(
  card: HTMLElement,
  courseId: string,
  state: SessionState,
): void {
  const button = card.querySelector<HTMLButtonElement>(".survey-submit");
  if (button) button.disabled = !state.isCardComplete(courseId);
}

function renderCard(
  entry: RecommendationEntry,
  payload: RecommendationPayload,
  state: SessionState,
  handlers: Handlers,
): HTMLElement {
  const card = el("article", "rec-card");
  card.dataset.courseId = entry.course_id;

  const head = el("header", "rec-head");
  head.appendChild(el("h3", "rec-title", `${entry.course_id}: ${entry.title}`));
  head.appendChild(el("span", "rec-dept", entry.department));
  const change = state.rankChange(entry.course_id);
  if (change !== null && change !== 0 && state.pendingWhatIf.length > 0) {
    const arrow = change > 0 ? `↑ +${change}` : `↓ ${change}`;
    const cls = change > 0 ? "rank-change up" : "rank-change down";
    head.appendChild(el("span", cls, arrow));
  }
  card.appendChild(head);
  card.appendChild(el("p", "rec-description", entry.description));

  if (payload.condition === "exp" && entry.explanation) {
    const learned = chipList(
      "Skills you have already learned",
      "learned",
      entry.explanation.learned,
    );
    if (learned) card.appendChild(learned);
    const novel = chipList("New skills", "new", entry.explanation.new);
    if (novel) card.appendChild(novel);
  }

  const survey = el("section", "survey");
  for (const q of questionsFor(payload.condition)) {
    survey.appendChild(
      likertRow(entry.course_id, q.id, q.statement, state, handlers, card),
    );
  }
  const submit = el("button", "survey-submit", "Submit feedback") as
    HTMLButtonElement;
  submit.disabled = !state.isCardComplete(entry.course_id);
  submit.addEventListener("click", () => {
    if (!submit.disabled) handlers.onSubmitSurvey?.(entry.course_id);
  });
  survey.appendChild(submit);
  card.appendChild(survey);
  return card;
}

export function renderRecommendations(
  root: HTMLElement,
  payload: RecommendationPayload,
  state: SessionState,
  handlers: Handlers = {},
): void {
  const container = el("div", "rec-list");
  for (const entry of payload.entries) {
    container.appendChild(renderCard(entry, payload, state, handlers));
  }
  root.replaceChildren(container);
}

export function renderErrorBanner(
  root: HTMLElement,
  message: string,
  handlers: Handlers = {},
): void {
  const banner = el("div", "error-banner");
  banner.appendChild(el("p", "error-message", message));
  if (handlers.onRetry) {
    const retry = el("button", "retry-button", "Retry");
    retry.addEventListener("click", () => handlers.onRetry?.());
    banner.appendChild(retry);
  }
  root.replaceChildren(banner);
}

/**
 * Validate-then-render: a malformed payload produces the error banner and
 * leaves no partial cards behind.
 */
export function renderFromRaw(
  root: HTMLElement,
  raw: unknown,
  state: SessionState,
  handlers: Handlers = {},
): boolean {
  try {
    const payload = validatePayload(raw);
    renderRecommendations(root, payload, state, handlers);
    return true;
  } catch (err) {
    if (err instanceof PayloadError) {
      renderErrorBanner(root, `Malformed server payload: ${err.message}`, handlers);
      return false;
    }
    throw err;
  }
}
