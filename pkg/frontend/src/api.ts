/** Thin typed client for the annotation service HTTP API. */

export interface Task {
  id: string;
  item_id: string;
  kind: "match_binary" | "quality_1_5";
  payload: Record<string, unknown>;
  copy: number;
  status: "pending" | "done";
}

export interface ThresholdInfo {
  threshold: number;
  precision: number;
  recall: number;
  f1: number;
}

export interface Stats {
  progress: { done: number; total: number };
  kappa: number | null;
  alpha: number | null;
  alpha_per_dimension: Record<string, number | null> | null;
  threshold: ThresholdInfo | null;
}

export interface ApiError {
  status: number;
  error: string;
  message: string;
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = { error: "unknown", message: response.statusText };
      try {
        detail = await response.json();
      } catch {
        /* non-JSON error body */
      }
      const failure: ApiError = { status: response.status, ...detail };
      throw Object.assign(new Error(failure.message), failure);
    }
    return (await response.json()) as T;
  }

  async nextTask(annotator: string): Promise<Task | null> {
    const body = await this.request<{ task: Task | null }>(
      `/api/tasks/next?annotator=${encodeURIComponent(annotator)}`,
    );
    return body.task;
  }

  async submitJudgment(
    annotator: string,
    taskId: string,
    values: Record<string, number>,
  ): Promise<void> {
    await this.request(`/api/tasks/${encodeURIComponent(taskId)}/judgment`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ annotator, values }),
    });
  }

  stats(): Promise<Stats> {
    return this.request<Stats>("/api/stats");
  }

  async exportRecords(): Promise<string> {
    const response = await this.fetchImpl(this.baseUrl + "/api/export");
    if (!response.ok) {
      throw new Error(`export failed: ${response.status}`);
    }
    return response.text();
  }
}
