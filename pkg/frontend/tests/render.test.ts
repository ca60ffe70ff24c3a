import { describe, expect, it } from "vitest";

import type { FeedbackReport } from "../src/api.js";
import { collectSpans, segmentText } from "../src/highlight.js";
import {
  renderHighlights,
  renderSidebar,
  renderSubmitButton,
} from "../src/render.js";
import { initialUiState, type UiSessionState } from "../src/state.js";

const REPORT: FeedbackReport = {
  predicted_band: 6.0,
  items: [
    {
      criterion: "GRA",
      polarity: "weakness",
      message: "Grammar needs attention.",
      suggestion: "Fix the marked spans.",
      priority: 1.25,
      spans: [{ start: 3, end: 5, replacement: "goes" }],
    },
    {
      criterion: "TA",
      polarity: "strength",
      message: "Task fully addressed.",
      suggestion: "",
      priority: 0,
      spans: [],
    },
  ],
  per_criterion_scores: { TA: 7.0, CC: 6.0, LR: 6.5, GRA: 5.0 },
};

function stateWithFeedback(): UiSessionState {
  return {
    ...initialUiState(),
    view: "writing",
    essayText: "He go to school.",
    latestFeedback: REPORT,
    latestBand: 6.0,
    latestPercentage: 66.7,
    attemptsRemaining: 2,
  };
}

describe("segmentText", () => {
  it("splits around spans and keeps offsets exact", () => {
    const segments = segmentText("He go to school.", collectSpans(REPORT));
    expect(segments.map((s) => s.text).join("")).toBe("He go to school.");
    const marked = segments.filter((s) => s.highlighted);
    expect(marked).toHaveLength(1);
    expect(marked[0].text).toBe("go");
    expect(marked[0].replacement).toBe("goes");
  });

  it("drops stale spans that no longer fit the text", () => {
    const segments = segmentText("Hi.", [{ start: 10, end: 12, replacement: "x" }]);
    expect(segments).toEqual([{ text: "Hi.", highlighted: false }]);
  });
});

describe("render", () => {
  it("sidebar shows band, percentage, and weakness items", () => {
    const el = document.createElement("aside");
    renderSidebar(el, stateWithFeedback());
    expect(el.querySelector(".sidebar-score")?.textContent).toBe("Band 6.0 (66.7%)");
    expect(el.querySelector(".sidebar-attempts")?.textContent).toBe("Attempts left: 2");
    const weakness = el.querySelector(".feedback-weakness");
    expect(weakness?.textContent).toContain("Grammar needs attention.");
    expect((weakness as HTMLElement).dataset.criterion).toBe("GRA");
  });

  it("sidebar hidden when dismissed", () => {
    const el = document.createElement("aside");
    renderSidebar(el, { ...stateWithFeedback(), sidebarVisible: false });
    expect(el.hidden).toBe(true);
    expect(el.children).toHaveLength(0);
  });

  it("highlights mark the exact text range", () => {
    const el = document.createElement("div");
    renderHighlights(el, stateWithFeedback());
    const mark = el.querySelector("mark.feedback-span");
    expect(mark?.textContent).toBe("go");
    expect((mark as HTMLElement).dataset.replacement).toBe("goes");
    expect(el.textContent).toBe("He go to school.");
  });

  it("submit disabled once attempts run out", () => {
    const button = document.createElement("button");
    renderSubmitButton(button, { ...stateWithFeedback(), attemptsRemaining: 0 });
    expect(button.disabled).toBe(true);
    renderSubmitButton(button, stateWithFeedback());
    expect(button.disabled).toBe(false);
  });
});
