// Application wiring: one App instance per browser context, all mutation
// through sequential API calls.

import { ApiClient, ServiceError } from "./api.js";
import {
  applyDialogueReply,
  applyEssayInput,
  applyError,
  applyProgress,
  applySessionCreated,
  applySubmission,
  initialUiState,
  restoreFromSession,
  toggleSidebar,
  type UiSessionState,
} from "./state.js";
import {
  renderAttempts,
  renderFinalView,
  renderHighlights,
  renderSidebar,
  renderSubmitButton,
  renderTask,
  renderTranscript,
  renderWordCount,
} from "./render.js";

export class App {
  state: UiSessionState = initialUiState();

  constructor(
    private readonly client: ApiClient,
    private readonly root: Document,
  ) {}

  private el<T extends HTMLElement>(id: string): T {
    const found = this.root.getElementById(id);
    if (!found) throw new Error(`missing element #${id}`);
    return found as T;
  }

  async start(): Promise<void> {
    const stored = this.loadSessionId();
    if (stored) {
      try {
        const session = await this.client.getSession(stored);
        this.state = restoreFromSession(this.state, session);
        if (this.state.view === "writing") await this.enterWriting();
        this.render();
        return;
      } catch {
        // stale id; fall through to a fresh session
      }
    }
    const session = await this.client.createSession();
    this.state = applySessionCreated(this.state, session);
    this.saveSessionId(session.id);
    await this.sendMessage(""); // greet
  }

  async sendMessage(message: string): Promise<void> {
    if (!this.state.sessionId) return;
    try {
      const reply = await this.client.sendDialogue(this.state.sessionId, message);
      this.state = applyDialogueReply(this.state, message, reply);
      if (this.state.view === "writing") await this.enterWriting();
    } catch (err) {
      this.state = applyError(this.state, describe(err));
    }
    this.render();
  }

  private async enterWriting(): Promise<void> {
    const task = await this.client.getTask(this.state.selectedSection);
    renderTask(this.el("task"), task);
  }

  onEssayInput(text: string): void {
    this.state = applyEssayInput(this.state, text);
    renderWordCount(this.el("word-count"), this.state);
  }

  async submitEssay(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    try {
      const response = await this.client.submit(sessionId, this.state.essayText);
      this.state = applySubmission(this.state, response);
      if (response.final) {
        const progress = await this.client.getProgress(sessionId);
        this.state = applyProgress(this.state, progress);
      }
    } catch (err) {
      if (err instanceof ServiceError && err.code === "attempt_limit") {
        this.state = applyError({ ...this.state, attemptsRemaining: 0 }, err.message);
      } else {
        this.state = applyError(this.state, describe(err));
      }
    }
    this.render();
  }

  onToggleSidebar(): void {
    this.state = toggleSidebar(this.state);
    this.render();
  }

  render(): void {
    renderTranscript(this.el("transcript"), this.state);
    renderWordCount(this.el("word-count"), this.state);
    renderAttempts(this.el("attempts"), this.state);
    renderSubmitButton(this.el<HTMLButtonElement>("submit"), this.state);
    renderSidebar(this.el("sidebar"), this.state);
    renderHighlights(this.el("highlights"), this.state);
    if (this.state.view === "final") {
      renderFinalView(this.el("final-view"), this.state);
    }
    const error = this.el("error");
    error.textContent = this.state.errorMessage ?? "";
    for (const view of ["onboarding", "writing", "final"] as const) {
      this.el(`view-${view}`).hidden = this.state.view !== view;
    }
  }

  private loadSessionId(): string | null {
    try {
      return this.root.defaultView?.localStorage.getItem("sessionId") ?? null;
    } catch {
      return null;
    }
  }

  private saveSessionId(id: string): void {
    try {
      this.root.defaultView?.localStorage.setItem("sessionId", id);
    } catch {
      // storage unavailable (private mode); session lives for the page only
    }
  }
}

function describe(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export function bootstrap(baseUrl: string, doc: Document): App {
  const app = new App(new ApiClient(baseUrl), doc);
  const input = doc.getElementById("chat-input") as HTMLInputElement | null;
  const send = doc.getElementById("chat-send");
  const essay = doc.getElementById("essay") as HTMLTextAreaElement | null;
  const submit = doc.getElementById("submit");
  const dismiss = doc.getElementById("sidebar-toggle");
  send?.addEventListener("click", () => {
    if (input) {
      void app.sendMessage(input.value);
      input.value = "";
    }
  });
  essay?.addEventListener("input", () => app.onEssayInput(essay.value));
  submit?.addEventListener("click", () => void app.submitEssay());
  dismiss?.addEventListener("click", () => app.onToggleSidebar());
  return app;
}
