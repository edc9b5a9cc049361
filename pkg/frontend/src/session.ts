/** Annotation session state machine: fetch a task, collect a judgment,
 * submit, repeat until the queue is drained. */

import { ApiClient, Stats, Task } from "./api.js";

export const QUALITY_DIMENSIONS = [
  "coherence",
  "consistency",
  "fluency",
  "relevance",
] as const;

export type QualityDimension = (typeof QUALITY_DIMENSIONS)[number];

export interface SessionEvents {
  onTask?: (task: Task) => void;
  onDrained?: () => void;
  onSubmitted?: (task: Task, values: Record<string, number>) => void;
  onError?: (error: Error) => void;
}

export class Session {
  private current: Task | null = null;
  private pendingQuality: Partial<Record<QualityDimension, number>> = {};
  completed = 0;

  constructor(
    private readonly api: ApiClient,
    readonly annotator: string,
    private readonly events: SessionEvents = {},
  ) {}

  get currentTask(): Task | null {
    return this.current;
  }

  get qualityProgress(): Partial<Record<QualityDimension, number>> {
    return { ...this.pendingQuality };
  }

  async start(): Promise<void> {
    await this.advance();
  }

  private async advance(): Promise<void> {
    this.pendingQuality = {};
    this.current = await this.api.nextTask(this.annotator);
    if (this.current === null) {
      this.events.onDrained?.();
    } else {
      this.events.onTask?.(this.current);
    }
  }

  /** Record a yes/no judgment for the current match task. */
  async judgeMatch(match: boolean): Promise<void> {
    const task = this.requireTask("match_binary");
    await this.submit(task, { match: match ? 1 : 0 });
  }

  /** Record one 1-5 rating; submits once all four dimensions are set. */
  async rateQuality(
    dimension: QualityDimension,
    value: number,
  ): Promise<boolean> {
    const task = this.requireTask("quality_1_5");
    if (!Number.isInteger(value) || value < 1 || value > 5) {
      throw new Error(`rating must be an integer in 1..5, got ${value}`);
    }
    this.pendingQuality[dimension] = value;
    const complete = QUALITY_DIMENSIONS.every(
      (d) => this.pendingQuality[d] !== undefined,
    );
    if (complete) {
      await this.submit(task, { ...this.pendingQuality } as Record<
        string,
        number
      >);
    }
    return complete;
  }

  /** Next unanswered quality dimension, or null when all are filled. */
  nextDimension(): QualityDimension | null {
    for (const d of QUALITY_DIMENSIONS) {
      if (this.pendingQuality[d] === undefined) {
        return d;
      }
    }
    return null;
  }

  private requireTask(kind: Task["kind"]): Task {
    if (this.current === null) {
      throw new Error("no task in progress");
    }
    if (this.current.kind !== kind) {
      throw new Error(
        `current task is ${this.current.kind}, expected ${kind}`,
      );
    }
    return this.current;
  }

  private async submit(
    task: Task,
    values: Record<string, number>,
  ): Promise<void> {
    try {
      await this.api.submitJudgment(this.annotator, task.id, values);
    } catch (error) {
      this.events.onError?.(error as Error);
      throw error;
    }
    this.completed += 1;
    this.events.onSubmitted?.(task, values);
    await this.advance();
  }

  stats(): Promise<Stats> {
    return this.api.stats();
  }
}
