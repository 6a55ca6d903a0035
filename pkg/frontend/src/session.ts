/**
 * Session state: the rater's pair order, resume position, and the
 * submit/queue/advance logic.  Pure data + API calls, no DOM — the UI
 * layer renders whatever this exposes.
 */

import { ApiError, type ReviewApi, type ScorePayload } from './api.js';
import { isScore, type Score } from './labels.js';
import { RetryQueue, type FlushResult } from './queue.js';

export interface PairState {
  imageId: string;
  colorMode: string;
  originalUrl: string;
  stylizedUrl: string;
  scored: boolean;
}

export type SubmitResult = 'recorded' | 'duplicate' | 'queued';

export interface SessionMeans {
  removed: number;
  added: number;
  count: number;
}

export class ReviewSession {
  readonly queue = new RetryQueue();
  /** Index of the pair on screen; pairs.length once everything is scored. */
  position: number;
  private submitted: Array<{ removed: Score; added: Score }> = [];

  private constructor(
    readonly raterId: string,
    readonly pairs: PairState[],
    private api: ReviewApi,
  ) {
    this.position = this.firstUnscored(0);
  }

  /** Fetch manifest + server progress and start at the first unscored pair. */
  static async load(api: ReviewApi, raterId: string): Promise<ReviewSession> {
    const manifest = await api.manifest(raterId);
    const progress = await api.progress(raterId);
    const scoredIds = new Set(progress.scored_image_ids);
    const pairs = manifest.pairs.map((pair) => ({
      imageId: pair.image_id,
      colorMode: pair.color_mode,
      originalUrl: pair.original_url,
      stylizedUrl: pair.stylized_url,
      scored: scoredIds.has(pair.image_id),
    }));
    return new ReviewSession(raterId, pairs, api);
  }

  get current(): PairState | null {
    return this.position < this.pairs.length ? this.pairs[this.position]! : null;
  }

  get complete(): boolean {
    return this.current === null;
  }

  get scoredCount(): number {
    return this.pairs.filter((pair) => pair.scored).length;
  }

  /**
   * Submit both scores for the current pair and advance to the next
   * unscored one.  A server 409 means the row already exists (an earlier
   * attempt landed just before a disconnect) and counts as success.  A
   * network failure queues the payload for retry — the rater keeps
   * working either way.  Other server rejections (422/404) are bugs and
   * propagate to the caller.
   */
  async submit(removed: number, added: number): Promise<SubmitResult> {
    const pair = this.current;
    if (pair === null) throw new Error('session is already complete');
    if (!isScore(removed) || !isScore(added)) {
      throw new RangeError(
        `scores must be integers in 0..6, got (${removed}, ${added})`,
      );
    }
    const payload: ScorePayload = {
      rater_id: this.raterId,
      image_id: pair.imageId,
      removed_artifacts: removed,
      added_structures: added,
    };
    let result: SubmitResult;
    try {
      result = await this.api.submitScore(payload);
    } catch (error) {
      if (error instanceof ApiError) throw error;
      this.queue.enqueue(payload);
      result = 'queued';
    }
    pair.scored = true;
    this.submitted.push({ removed, added });
    this.advance();
    return result;
  }

  /** Retry everything queued, oldest first. */
  flushQueue(): Promise<FlushResult> {
    return this.queue.flush((payload) => this.api.submitScore(payload));
  }

  /**
   * Per-property means over the scores entered in this browser session
   * (the API only reports which images are scored, not their values, so
   * earlier sessions cannot be folded in).
   */
  sessionMeans(): SessionMeans | null {
    const n = this.submitted.length;
    if (n === 0) return null;
    let removed = 0;
    let added = 0;
    for (const entry of this.submitted) {
      removed += entry.removed;
      added += entry.added;
    }
    return { removed: removed / n, added: added / n, count: n };
  }

  private firstUnscored(from: number): number {
    for (let i = from; i < this.pairs.length; i++) {
      if (!this.pairs[i]!.scored) return i;
    }
    return this.pairs.length;
  }

  private advance(): void {
    this.position = this.firstUnscored(this.position + 1);
    if (this.position === this.pairs.length) {
      // A pair before the cursor can be unscored if another tab raced us;
      // sweep from the start before declaring the session complete.
      this.position = this.firstUnscored(0);
    }
  }
}
