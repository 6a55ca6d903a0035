/**
 * Per-session retry queue for score submissions that hit a network
 * failure.  Nothing is ever dropped silently: entries either deliver on a
 * later flush, or (for permanent 4xx rejections) move to the `rejected`
 * list of the flush result so the UI can show them.
 */

import { ApiError, type ScorePayload, type SubmitOutcome } from './api.js';

export type SendFn = (payload: ScorePayload) => Promise<SubmitOutcome>;

export interface RejectedScore {
  payload: ScorePayload;
  message: string;
}

export interface FlushResult {
  delivered: number;
  remaining: number;
  rejected: RejectedScore[];
}

export class RetryQueue {
  private entries: ScorePayload[] = [];

  enqueue(payload: ScorePayload): void {
    this.entries.push(payload);
  }

  get size(): number {
    return this.entries.length;
  }

  snapshot(): readonly ScorePayload[] {
    return [...this.entries];
  }

  /**
   * Resend queued submissions in FIFO order.  A 'duplicate' outcome counts
   * as delivered — the row landed before the connection dropped.  A
   * rejection the server would repeat forever (ApiError, e.g. 422) is
   * pulled out and reported.  On a network failure the failed entry and
   * everything behind it stays queued for the next flush.
   */
  async flush(send: SendFn): Promise<FlushResult> {
    let delivered = 0;
    const rejected: RejectedScore[] = [];
    while (this.entries.length > 0) {
      const next = this.entries[0]!;
      try {
        await send(next);
      } catch (error) {
        if (error instanceof ApiError) {
          rejected.push({ payload: next, message: error.message });
          this.entries.shift();
          continue;
        }
        break;
      }
      this.entries.shift();
      delivered += 1;
    }
    return { delivered, remaining: this.entries.length, rejected };
  }
}
