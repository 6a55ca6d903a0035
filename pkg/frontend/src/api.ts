/**
 * Typed client for the review service HTTP API.
 *
 * Endpoints: GET /api/manifest?rater_id=, GET /api/progress/{rater_id},
 * POST /api/score, GET /api/image/{image_id}/{role}.  A 409 on score
 * submission means the row already exists server-side (the usual cause is
 * an ack lost to a disconnect), so the client reports it as 'duplicate'
 * rather than an error.
 */

import type { Score } from './labels.js';

export interface ManifestPair {
  image_id: string;
  color_mode: string;
  original_url: string;
  stylized_url: string;
}

export interface Manifest {
  order_seed: number | null;
  pair_count: number;
  pairs: ManifestPair[];
}

export interface Progress {
  rater_id: string;
  scored_image_ids: string[];
  scored_count: number;
  total: number;
}

export interface ScorePayload {
  rater_id: string;
  image_id: string;
  removed_artifacts: Score;
  added_structures: Score;
}

export type SubmitOutcome = 'recorded' | 'duplicate';
export type ImageRole = 'original' | 'stylized';

/** Non-OK HTTP response; `status` distinguishes 422 from 404 etc. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface ReviewApi {
  manifest(raterId: string): Promise<Manifest>;
  progress(raterId: string): Promise<Progress>;
  submitScore(payload: ScorePayload): Promise<SubmitOutcome>;
  imageUrl(imageId: string, role: ImageRole): string;
}

export class HttpReviewApi implements ReviewApi {
  constructor(
    private baseUrl = '',
    private fetchImpl: typeof fetch = fetch,
  ) {}

  manifest(raterId: string): Promise<Manifest> {
    return this.getJson<Manifest>(
      `/api/manifest?rater_id=${encodeURIComponent(raterId)}`,
    );
  }

  progress(raterId: string): Promise<Progress> {
    return this.getJson<Progress>(
      `/api/progress/${encodeURIComponent(raterId)}`,
    );
  }

  async submitScore(payload: ScorePayload): Promise<SubmitOutcome> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/score`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
    if (response.status === 409) return 'duplicate';
    if (!response.ok) {
      throw new ApiError(response.status, await describeFailure(response));
    }
    return 'recorded';
  }

  imageUrl(imageId: string, role: ImageRole): string {
    return `${this.baseUrl}/api/image/${encodeURIComponent(imageId)}/${role}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw new ApiError(response.status, await describeFailure(response));
    }
    return (await response.json()) as T;
  }
}

/** Pull the service's error detail out of the body; 422 bodies name fields. */
async function describeFailure(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === 'string') return body.detail;
    if (body.detail !== undefined) return JSON.stringify(body.detail);
  } catch {
    // non-JSON body, fall through
  }
  return `HTTP ${response.status}`;
}
