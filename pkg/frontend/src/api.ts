// Typed client for the scoring service. The UI never computes scores or
// feedback itself; everything displayed comes from these payloads.

export interface SessionPayload {
  id: string;
  candidate_name: string;
  candidate_age: number | null;
  selected_section: string;
  attempts_remaining: number;
  completed: boolean;
  dialogue_state: string;
  created_at: number;
}

export interface DialogueReply {
  reply: string;
  state: string;
  slots: Record<string, string | number>;
}

export interface TaskPayload {
  id: string;
  instructions: string;
  reference_image: string;
  required_word_count: number;
}

export interface SpanFix {
  start: number;
  end: number;
  replacement: string;
}

export interface FeedbackItem {
  criterion: string;
  polarity: "strength" | "weakness";
  message: string;
  suggestion: string;
  priority: number;
  spans: SpanFix[];
}

export interface FeedbackReport {
  predicted_band: number;
  items: FeedbackItem[];
  per_criterion_scores: Record<string, number>;
}

export interface SubmissionResponse {
  id: string;
  session_id: string;
  attempt_index: number;
  attempts_remaining: number;
  final: boolean;
  band: number;
  percentage: number;
  neural_raw: number | null;
  rubric: Record<string, number>;
  feedback: FeedbackReport;
}

export interface ProgressRow {
  attempt_index: number;
  band: number;
  percentage: number;
  delta: number | null;
}

export interface ApiError {
  code: string;
  message: string;
}

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json();
  if (!response.ok) {
    const err = body as ApiError;
    throw new ServiceError(response.status, err.code ?? "error", err.message ?? "request failed");
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  createSession(): Promise<SessionPayload> {
    return request(`${this.baseUrl}/sessions`, { method: "POST", body: "{}" });
  }

  getSession(sessionId: string): Promise<SessionPayload> {
    return request(`${this.baseUrl}/sessions/${sessionId}`);
  }

  sendDialogue(sessionId: string, message: string): Promise<DialogueReply> {
    return request(`${this.baseUrl}/sessions/${sessionId}/dialogue`, {
      method: "POST",
      body: JSON.stringify({ message }),
    });
  }

  getTask(taskId: string): Promise<TaskPayload> {
    return request(`${this.baseUrl}/tasks/${taskId}`);
  }

  submit(sessionId: string, text: string): Promise<SubmissionResponse> {
    return request(`${this.baseUrl}/sessions/${sessionId}/submissions`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  async getProgress(sessionId: string): Promise<ProgressRow[]> {
    const body = await request<{ submissions: ProgressRow[] }>(
      `${this.baseUrl}/sessions/${sessionId}/progress`,
    );
    return body.submissions;
  }
}
