/**
 * DOM rendering for the annotation pages.
 *
 * Views are re-rendered from plain state on every change, so the markup
 * is always a function of (task, state, strings).  Candidate cards show
 * only the caption text and the opaque candidate id never appears as
 * visible text — nothing in the served payload identifies the system
 * that produced a caption, and this layer adds nothing that could.
 *
 * The rank view supports HTML5 drag-and-drop between the two panes and
 * equivalent buttons (add / up / down / remove) so the page remains
 * usable without a pointer and testable without a drag event model.
 */

import type { TaskView } from "./api.js";
import {
  moveRanked,
  newRankState,
  newRatingState,
  newVoteState,
  rankCandidate,
  rankComplete,
  ratingComplete,
  setAspectValue,
  setExclusionReason,
  setScreenedOut,
  setWorst,
  unrankCandidate,
  voteComplete,
  type RankState,
  type RatingState,
  type TaskState,
  type VoteState,
} from "./model.js";

export interface Strings {
  appTitle: string;
  likertLabels: Record<string, string>;
  aspectStatements: Record<string, string>;
  rankingPrompt: string;
  rankingInstruction: string;
  votePrompt: string;
  validityLabel: string;
  validityReasonPlaceholder: string;
  rateInstruction: string;
  submitLabel: string;
  doneTitle: string;
  doneBody: string;
  loadErrorBody: string;
  retryLabel: string;
  startTitle: string;
  annotatorPlaceholder: string;
  startLabel: string;
  imageHint: string;
}

export interface ViewHandlers {
  onChange: (state: TaskState) => void;
  onSubmit: () => void;
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

function candidateText(task: TaskView, candidateId: string): string {
  const found = (task.candidates ?? []).find(
    (c) => c.candidate_id === candidateId,
  );
  return found ? found.text : "";
}

// ------------------------------------------------------------- chrome

export function renderBanner(root: HTMLElement, message: string): void {
  clearBanner(root);
  const banner = el("div", "banner", message);
  banner.setAttribute("role", "alert");
  root.prepend(banner);
}

export function clearBanner(root: HTMLElement): void {
  root.querySelectorAll(".banner").forEach((node) => node.remove());
}

function renderFigureHeader(task: TaskView, strings: Strings): HTMLElement {
  const header = el("header", "task-header");
  if (task.title) {
    header.appendChild(el("h2", "paper-title", task.title));
  }
  if (task.abstract) {
    const details = el("details", "paper-abstract");
    details.appendChild(el("summary", undefined, "Abstract"));
    details.appendChild(el("p", undefined, task.abstract));
    header.appendChild(details);
  }
  if (task.image_url) {
    const wrap = el("figure", "figure-wrap");
    const img = el("img", "figure-image");
    img.src = task.image_url;
    img.alt = `figure ${task.figure_id ?? ""}`.trim();
    img.addEventListener("click", () => {
      img.classList.toggle("enlarged");
    });
    wrap.appendChild(img);
    wrap.appendChild(el("figcaption", "image-hint", strings.imageHint));
    header.appendChild(wrap);
  }
  return header;
}

function renderSubmit(
  enabled: boolean,
  strings: Strings,
  handlers: ViewHandlers,
): HTMLElement {
  const row = el("div", "submit-row");
  const button = el("button", "submit-button", strings.submitLabel);
  button.type = "button";
  button.disabled = !enabled;
  button.addEventListener("click", () => {
    if (!button.disabled) handlers.onSubmit();
  });
  row.appendChild(button);
  return row;
}

// --------------------------------------------------------------- rate

function renderRate(
  root: HTMLElement,
  task: TaskView,
  state: RatingState,
  strings: Strings,
  handlers: ViewHandlers,
  busy: boolean,
): void {
  const section = el("section", "task rate-task");
  section.appendChild(renderFigureHeader(task, strings));

  const candidate = (task.candidates ?? [])[0];
  if (candidate) {
    const card = el("blockquote", "caption-card", candidate.text);
    card.dataset["candidateId"] = candidate.candidate_id;
    section.appendChild(card);
  }
  section.appendChild(el("p", "instruction", strings.rateInstruction));

  for (const aspect of state.aspects) {
    const fieldset = el("fieldset", "likert");
    fieldset.dataset["aspect"] = aspect;
    fieldset.appendChild(
      el("legend", undefined, strings.aspectStatements[aspect] ?? aspect),
    );
    const scale = el("div", "likert-scale");
    for (let value = 1; value <= 5; value += 1) {
      const label = el("label", "likert-option");
      const input = el("input");
      input.type = "radio";
      input.name = `likert-${aspect}`;
      input.value = String(value);
      input.checked = state.values[aspect] === value;
      input.addEventListener("change", () => {
        handlers.onChange(setAspectValue(state, aspect, value));
      });
      label.appendChild(input);
      label.appendChild(
        el("span", undefined, strings.likertLabels[String(value)] ?? String(value)),
      );
      scale.appendChild(label);
    }
    fieldset.appendChild(scale);
    section.appendChild(fieldset);
  }

  const screen = el("div", "validity-screen");
  const screenLabel = el("label", "validity-label");
  const checkbox = el("input");
  checkbox.type = "checkbox";
  checkbox.className = "validity-checkbox";
  checkbox.checked = state.screenedOut;
  checkbox.addEventListener("change", () => {
    handlers.onChange(setScreenedOut(state, checkbox.checked));
  });
  screenLabel.appendChild(checkbox);
  screenLabel.appendChild(el("span", undefined, strings.validityLabel));
  screen.appendChild(screenLabel);
  if (state.screenedOut) {
    const reason = el("textarea", "exclusion-reason");
    reason.placeholder = strings.validityReasonPlaceholder;
    reason.value = state.exclusionReason;
    reason.addEventListener("input", () => {
      handlers.onChange(setExclusionReason(state, reason.value));
    });
    screen.appendChild(reason);
  }
  section.appendChild(screen);

  section.appendChild(
    renderSubmit(ratingComplete(state) && !busy, strings, handlers),
  );
  root.appendChild(section);
}

// --------------------------------------------------------------- rank

function dropIndex(event: DragEvent, pane: HTMLElement): number {
  const cards = Array.from(
    pane.querySelectorAll<HTMLElement>("[data-candidate-id]"),
  );
  let target = event.target as HTMLElement | null;
  while (target && target !== pane) {
    const id = target.dataset ? target.dataset["candidateId"] : undefined;
    if (id !== undefined) {
      return cards.indexOf(target);
    }
    target = target.parentElement;
  }
  return cards.length;
}

function rankCard(
  task: TaskView,
  candidateId: string,
  buttons: HTMLElement[],
): HTMLElement {
  const card = el("li", "caption-card");
  card.dataset["candidateId"] = candidateId;
  card.draggable = true;
  card.addEventListener("dragstart", (event) => {
    event.dataTransfer?.setData("text/plain", candidateId);
  });
  card.appendChild(el("p", "caption-text", candidateText(task, candidateId)));
  const controls = el("div", "card-controls");
  for (const button of buttons) controls.appendChild(button);
  card.appendChild(controls);
  return card;
}

function controlButton(
  className: string,
  text: string,
  onClick: () => void,
): HTMLElement {
  const button = el("button", className, text);
  button.type = "button";
  button.addEventListener("click", onClick);
  return button;
}

function renderRank(
  root: HTMLElement,
  task: TaskView,
  state: RankState,
  strings: Strings,
  handlers: ViewHandlers,
  busy: boolean,
): void {
  const section = el("section", "task rank-task");
  section.appendChild(renderFigureHeader(task, strings));
  section.appendChild(el("blockquote", "prompt", strings.rankingPrompt));
  section.appendChild(el("p", "instruction", strings.rankingInstruction));

  const panes = el("div", "rank-panes");

  const left = el("div", "pane unranked-pane");
  left.appendChild(el("h3", undefined, "Captions"));
  const leftList = el("ul", "card-list");
  leftList.dataset["pane"] = "unranked";
  for (const candidateId of state.unranked) {
    leftList.appendChild(
      rankCard(task, candidateId, [
        controlButton("add-button", "Rank →", () =>
          handlers.onChange(rankCandidate(state, candidateId)),
        ),
      ]),
    );
  }
  left.appendChild(leftList);

  const right = el("div", "pane ranked-pane");
  right.appendChild(el("h3", undefined, "Your ranking (best first)"));
  const rightList = el("ol", "card-list");
  rightList.dataset["pane"] = "ranked";
  state.ranked.forEach((candidateId, index) => {
    rightList.appendChild(
      rankCard(task, candidateId, [
        controlButton("up-button", "↑", () =>
          handlers.onChange(moveRanked(state, candidateId, index - 1)),
        ),
        controlButton("down-button", "↓", () =>
          handlers.onChange(moveRanked(state, candidateId, index + 1)),
        ),
        controlButton("remove-button", "← Remove", () =>
          handlers.onChange(unrankCandidate(state, candidateId)),
        ),
      ]),
    );
  });
  right.appendChild(rightList);

  rightList.addEventListener("dragover", (event) => event.preventDefault());
  rightList.addEventListener("drop", (event) => {
    event.preventDefault();
    const candidateId = event.dataTransfer?.getData("text/plain");
    if (!candidateId) return;
    const index = dropIndex(event, rightList);
    if (state.unranked.includes(candidateId)) {
      handlers.onChange(rankCandidate(state, candidateId, index));
    } else if (state.ranked.includes(candidateId)) {
      handlers.onChange(moveRanked(state, candidateId, index));
    }
  });
  leftList.addEventListener("dragover", (event) => event.preventDefault());
  leftList.addEventListener("drop", (event) => {
    event.preventDefault();
    const candidateId = event.dataTransfer?.getData("text/plain");
    if (candidateId && state.ranked.includes(candidateId)) {
      handlers.onChange(unrankCandidate(state, candidateId));
    }
  });

  panes.appendChild(left);
  panes.appendChild(right);
  section.appendChild(panes);
  section.appendChild(
    renderSubmit(rankComplete(state) && !busy, strings, handlers),
  );
  root.appendChild(section);
}

// --------------------------------------------------------------- vote

function renderVote(
  root: HTMLElement,
  task: TaskView,
  state: VoteState,
  strings: Strings,
  handlers: ViewHandlers,
  busy: boolean,
): void {
  const section = el("section", "task vote-task");
  section.appendChild(renderFigureHeader(task, strings));
  section.appendChild(el("p", "prompt", strings.votePrompt));
  const list = el("ul", "card-list");
  for (const candidateId of state.candidateIds) {
    const card = el("li", "caption-card");
    card.dataset["candidateId"] = candidateId;
    const label = el("label", "vote-option");
    const input = el("input");
    input.type = "radio";
    input.name = "worst";
    input.value = candidateId;
    input.checked = state.worst === candidateId;
    input.addEventListener("change", () => {
      handlers.onChange(setWorst(state, candidateId));
    });
    label.appendChild(input);
    label.appendChild(el("span", undefined, candidateText(task, candidateId)));
    card.appendChild(label);
    list.appendChild(card);
  }
  section.appendChild(list);
  section.appendChild(
    renderSubmit(voteComplete(state) && !busy, strings, handlers),
  );
  root.appendChild(section);
}

// ------------------------------------------------------------ screens

export function renderTask(
  root: HTMLElement,
  task: TaskView,
  state: TaskState,
  strings: Strings,
  handlers: ViewHandlers,
  busy = false,
): void {
  root.querySelectorAll(".task, .done-screen, .start-screen").forEach((n) =>
    n.remove(),
  );
  if (state.kind === "rate") {
    renderRate(root, task, state, strings, handlers, busy);
  } else if (state.kind === "rank") {
    renderRank(root, task, state, strings, handlers, busy);
  } else {
    renderVote(root, task, state, strings, handlers, busy);
  }
}

export function renderDone(root: HTMLElement, strings: Strings): void {
  root.querySelectorAll(".task, .done-screen, .start-screen").forEach((n) =>
    n.remove(),
  );
  const section = el("section", "done-screen");
  section.appendChild(el("h2", undefined, strings.doneTitle));
  section.appendChild(el("p", undefined, strings.doneBody));
  const hint = el("p", "export-hint");
  hint.appendChild(document.createTextNode("Export: "));
  hint.appendChild(el("code", undefined, "GET /export"));
  section.appendChild(hint);
  root.appendChild(section);
}

export function renderStart(
  root: HTMLElement,
  strings: Strings,
  onStart: (annotatorId: string) => void,
): void {
  root.querySelectorAll(".task, .done-screen, .start-screen").forEach((n) =>
    n.remove(),
  );
  const section = el("section", "start-screen");
  section.appendChild(el("h2", undefined, strings.startTitle));
  const input = el("input", "annotator-input");
  input.type = "text";
  input.placeholder = strings.annotatorPlaceholder;
  const button = el("button", "start-button", strings.startLabel);
  button.type = "button";
  const submit = () => {
    const annotatorId = input.value.trim();
    if (annotatorId) onStart(annotatorId);
  };
  button.addEventListener("click", submit);
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") submit();
  });
  section.appendChild(input);
  section.appendChild(button);
  root.appendChild(section);
}

export function renderRetry(
  root: HTMLElement,
  strings: Strings,
  message: string,
  onRetry: () => void,
): void {
  renderBanner(root, `${strings.loadErrorBody} ${message}`.trim());
  const banner = root.querySelector(".banner");
  if (banner) {
    const button = el("button", "retry-button", strings.retryLabel);
    button.type = "button";
    button.addEventListener("click", onRetry);
    banner.appendChild(button);
  }
}

/** Build the initial state for a freshly served task. */
export function initialState(task: TaskView): TaskState {
  const taskId = task.task_id ?? "";
  const candidateIds = (task.candidates ?? []).map((c) => c.candidate_id);
  if (task.mode === "rate") {
    return newRatingState(taskId, task.aspects ?? []);
  }
  if (task.mode === "rank") {
    return newRankState(taskId, candidateIds);
  }
  if (task.mode === "vote") {
    return newVoteState(taskId, candidateIds);
  }
  throw new Error(`unknown task mode: ${task.mode}`);
}
