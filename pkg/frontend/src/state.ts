// Client-side session state. Every numeric field mirrors the most recent
// server response; reducers only copy values, never derive scores.

import type {
  DialogueReply,
  FeedbackReport,
  ProgressRow,
  SessionPayload,
  SubmissionResponse,
} from "./api.js";

export type View = "onboarding" | "writing" | "final";

export interface TranscriptEntry {
  from: "bot" | "user";
  text: string;
}

export interface UiSessionState {
  sessionId: string | null;
  transcript: TranscriptEntry[];
  view: View;
  attemptsRemaining: number;
  latestFeedback: FeedbackReport | null;
  latestBand: number | null;
  latestPercentage: number | null;
  essayText: string;
  wordCount: number;
  sidebarVisible: boolean;
  progress: ProgressRow[];
  selectedSection: string;
  errorMessage: string | null;
}

export function initialUiState(): UiSessionState {
  return {
    sessionId: null,
    transcript: [],
    view: "onboarding",
    attemptsRemaining: 3,
    latestFeedback: null,
    latestBand: null,
    latestPercentage: null,
    essayText: "",
    wordCount: 0,
    sidebarVisible: true,
    progress: [],
    selectedSection: "full",
    errorMessage: null,
  };
}

export function countWords(text: string): number {
  const matches = text.match(/[A-Za-z]+(?:'[A-Za-z]+)*/g);
  return matches ? matches.length : 0;
}

export function applySessionCreated(
  state: UiSessionState,
  session: SessionPayload,
): UiSessionState {
  return {
    ...state,
    sessionId: session.id,
    attemptsRemaining: session.attempts_remaining,
  };
}

export function applyDialogueReply(
  state: UiSessionState,
  userMessage: string,
  reply: DialogueReply,
): UiSessionState {
  const transcript = [
    ...state.transcript,
    { from: "user", text: userMessage } as TranscriptEntry,
    { from: "bot", text: reply.reply } as TranscriptEntry,
  ];
  const section = reply.slots["selected_section"];
  return {
    ...state,
    transcript,
    view: reply.state === "WRITING" ? "writing" : state.view,
    selectedSection: typeof section === "string" ? section : state.selectedSection,
  };
}

// Rebuilds a minimal transcript from the server-held dialogue state after
// a refresh; the server is authoritative for where the conversation is.
export function restoreFromSession(
  state: UiSessionState,
  session: SessionPayload,
): UiSessionState {
  const transcript: TranscriptEntry[] = [];
  if (session.candidate_name) {
    transcript.push({ from: "user", text: session.candidate_name });
  }
  if (session.candidate_age !== null) {
    transcript.push({ from: "user", text: String(session.candidate_age) });
  }
  transcript.push({
    from: "bot",
    text: `(resumed at ${session.dialogue_state})`,
  });
  return {
    ...state,
    sessionId: session.id,
    attemptsRemaining: session.attempts_remaining,
    selectedSection: session.selected_section,
    view: session.dialogue_state === "WRITING" ? "writing" : "onboarding",
    transcript,
  };
}

export function applyEssayInput(state: UiSessionState, text: string): UiSessionState {
  return { ...state, essayText: text, wordCount: countWords(text) };
}

export function applySubmission(
  state: UiSessionState,
  response: SubmissionResponse,
): UiSessionState {
  return {
    ...state,
    attemptsRemaining: response.attempts_remaining,
    latestFeedback: response.feedback,
    latestBand: response.band,
    latestPercentage: response.percentage,
    sidebarVisible: true,
    view: response.final ? "final" : state.view,
    errorMessage: null,
  };
}

export function applyProgress(
  state: UiSessionState,
  progress: ProgressRow[],
): UiSessionState {
  return { ...state, progress };
}

export function applyError(state: UiSessionState, message: string): UiSessionState {
  return { ...state, errorMessage: message };
}

export function toggleSidebar(state: UiSessionState): UiSessionState {
  return { ...state, sidebarVisible: !state.sidebarVisible };
}

export function canSubmit(state: UiSessionState): boolean {
  return state.attemptsRemaining > 0 && state.view === "writing";
}
