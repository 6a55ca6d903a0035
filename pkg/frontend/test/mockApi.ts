/**
 * In-memory stand-in for the review service with the same observable
 * semantics: append-only rows, 409 on (rater, image) duplicates, progress
 * derived from stored rows.  Two switches drive the failure tests:
 * `online` (requests throw like fetch does on a dead network) and
 * `dropNextAck` (the row is written but the response is "lost").
 */

import {
  ApiError,
  type ImageRole,
  type Manifest,
  type Progress,
  type ReviewApi,
  type ScorePayload,
  type SubmitOutcome,
} from '../src/api.js';

export interface ServerRow {
  rater_id: string;
  image_id: string;
  removed_artifacts: number;
  added_structures: number;
}

export class MockReviewApi implements ReviewApi {
  online = true;
  dropNextAck = false;
  readonly rows: ServerRow[] = [];
  private imageIds: string[];

  constructor(pairCount: number) {
    this.imageIds = Array.from({ length: pairCount }, (_, i) =>
      `img${String(i).padStart(3, '0')}`,
    );
  }

  private networkCheck(): void {
    if (!this.online) throw new TypeError('fetch failed');
  }

  async manifest(_raterId: string): Promise<Manifest> {
    this.networkCheck();
    return {
      order_seed: null,
      pair_count: this.imageIds.length,
      pairs: this.imageIds.map((id) => ({
        image_id: id,
        color_mode: 'intact',
        original_url: `/api/image/${id}/original`,
        stylized_url: `/api/image/${id}/stylized`,
      })),
    };
  }

  async progress(raterId: string): Promise<Progress> {
    this.networkCheck();
    const scored = this.rows
      .filter((row) => row.rater_id === raterId)
      .map((row) => row.image_id);
    return {
      rater_id: raterId,
      scored_image_ids: scored,
      scored_count: scored.length,
      total: this.imageIds.length,
    };
  }

  async submitScore(payload: ScorePayload): Promise<SubmitOutcome> {
    this.networkCheck();
    if (!this.imageIds.includes(payload.image_id)) {
      throw new ApiError(404, `unknown image_id '${payload.image_id}'`);
    }
    const duplicate = this.rows.some(
      (row) =>
        row.rater_id === payload.rater_id && row.image_id === payload.image_id,
    );
    if (duplicate) return 'duplicate';
    this.rows.push({ ...payload });
    if (this.dropNextAck) {
      this.dropNextAck = false;
      throw new TypeError('fetch failed');
    }
    return 'recorded';
  }

  imageUrl(imageId: string, role: ImageRole): string {
    return `/api/image/${imageId}/${role}`;
  }
}
