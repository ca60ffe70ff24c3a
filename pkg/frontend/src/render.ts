// DOM rendering. Pure functions of (document, state) so tests can assert
// against jsdom without a framework.

import type { TaskPayload } from "./api.js";
import { collectSpans, segmentText } from "./highlight.js";
import { canSubmit, type UiSessionState } from "./state.js";

export function renderTranscript(container: HTMLElement, state: UiSessionState): void {
  container.innerHTML = "";
  for (const entry of state.transcript) {
    const line = container.ownerDocument.createElement("p");
    line.className = `chat-line chat-${entry.from}`;
    line.textContent = entry.text;
    container.appendChild(line);
  }
}

export function renderTask(container: HTMLElement, task: TaskPayload): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  const instructions = doc.createElement("p");
  instructions.className = "task-instructions";
  instructions.textContent = task.instructions;
  const image = doc.createElement("img");
  image.className = "task-image";
  image.src = task.reference_image;
  image.alt = "task reference";
  const target = doc.createElement("p");
  target.className = "word-target";
  target.textContent = `Target: ${task.required_word_count} words`;
  container.append(instructions, image, target);
}

export function renderWordCount(el: HTMLElement, state: UiSessionState): void {
  el.textContent = `${state.wordCount} words`;
}

export function renderAttempts(el: HTMLElement, state: UiSessionState): void {
  el.textContent = `Attempts left: ${state.attemptsRemaining}`;
}

export function renderSubmitButton(button: HTMLButtonElement, state: UiSessionState): void {
  button.disabled = !canSubmit(state);
  button.title = state.attemptsRemaining === 0 ? "Attempt limit reached" : "";
}

export function renderSidebar(container: HTMLElement, state: UiSessionState): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  container.hidden = !state.sidebarVisible;
  if (!state.sidebarVisible) return;

  const attempts = doc.createElement("p");
  attempts.className = "sidebar-attempts";
  renderAttempts(attempts, state);
  container.appendChild(attempts);

  if (state.latestBand !== null && state.latestPercentage !== null) {
    const score = doc.createElement("p");
    score.className = "sidebar-score";
    score.textContent = `Band ${state.latestBand.toFixed(1)} (${state.latestPercentage}%)`;
    container.appendChild(score);
  }

  if (state.latestFeedback) {
    const list = doc.createElement("ul");
    list.className = "feedback-list";
    for (const item of state.latestFeedback.items) {
      const entry = doc.createElement("li");
      entry.className = `feedback-item feedback-${item.polarity}`;
      entry.dataset.criterion = item.criterion;
      const message = doc.createElement("span");
      message.className = "feedback-message";
      message.textContent = `${item.criterion}: ${item.message}`;
      entry.appendChild(message);
      if (item.suggestion) {
        const suggestion = doc.createElement("span");
        suggestion.className = "feedback-suggestion";
        suggestion.textContent = ` ${item.suggestion}`;
        entry.appendChild(suggestion);
      }
      list.appendChild(entry);
    }
    container.appendChild(list);
  }
}

export function renderHighlights(container: HTMLElement, state: UiSessionState): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  if (!state.latestFeedback) {
    container.textContent = state.essayText;
    return;
  }
  const spans = collectSpans(state.latestFeedback);
  for (const segment of segmentText(state.essayText, spans)) {
    if (segment.highlighted) {
      const mark = doc.createElement("mark");
      mark.className = "feedback-span";
      mark.textContent = segment.text;
      if (segment.replacement) mark.dataset.replacement = segment.replacement;
      container.appendChild(mark);
    } else {
      container.appendChild(doc.createTextNode(segment.text));
    }
  }
}

export function renderFinalView(container: HTMLElement, state: UiSessionState): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  const heading = doc.createElement("h2");
  heading.textContent = "Final grading";
  container.appendChild(heading);
  const table = doc.createElement("table");
  table.className = "progress-table";
  for (const row of state.progress) {
    const tr = doc.createElement("tr");
    const delta =
      row.delta === null ? "—" : `${row.delta >= 0 ? "+" : ""}${row.delta.toFixed(2)}`;
    for (const cell of [String(row.attempt_index), row.band.toFixed(1), `${row.percentage}%`, delta]) {
      const td = doc.createElement("td");
      td.textContent = cell;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  container.appendChild(table);
}
