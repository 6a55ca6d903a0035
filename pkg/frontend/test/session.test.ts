import { describe, expect, it } from 'vitest';

import { ReviewSession } from '../src/session.js';
import { MockReviewApi } from './mockApi.js';

describe('session loading', () => {
  it('a fresh rater starts at pair 1 of N', async () => {
    const api = new MockReviewApi(10);
    const session = await ReviewSession.load(api, 'r1');
    expect(session.position).toBe(0);
    expect(session.current?.imageId).toBe('img000');
    expect(session.complete).toBe(false);
  });

  it('a rater with three scores on file resumes at pair 4', async () => {
    const api = new MockReviewApi(10);
    const warmup = await ReviewSession.load(api, 'r1');
    await warmup.submit(5, 4);
    await warmup.submit(3, 3);
    await warmup.submit(4, 5);

    const resumed = await ReviewSession.load(api, 'r1');
    expect(resumed.position).toBe(3);
    expect(resumed.scoredCount).toBe(3);
    expect(resumed.current?.imageId).toBe('img003');
  });

  it('a fully scored rater lands on the completion state', async () => {
    const api = new MockReviewApi(3);
    const first = await ReviewSession.load(api, 'r1');
    while (!first.complete) await first.submit(5, 5);

    const resumed = await ReviewSession.load(api, 'r1');
    expect(resumed.complete).toBe(true);
    expect(resumed.current).toBeNull();
  });
});

describe('submitting', () => {
  it('rejects any score outside 0..6 before anything reaches the wire', async () => {
    const api = new MockReviewApi(2);
    const session = await ReviewSession.load(api, 'r1');
    for (const [removed, added] of [
      [7, 3],
      [-1, 3],
      [3, 7],
      [2.5, 3],
      [NaN, 0],
    ] as Array<[number, number]>) {
      await expect(session.submit(removed, added)).rejects.toThrow(RangeError);
    }
    expect(api.rows).toHaveLength(0);
    expect(session.position).toBe(0);
  });

  it('advances past already-scored pairs after a submit', async () => {
    const api = new MockReviewApi(3);
    const first = await ReviewSession.load(api, 'r1');
    await first.submit(5, 4); // img000
    await first.submit(5, 4); // img001

    // second tab: img000/img001 are taken, cursor starts at img002
    const second = await ReviewSession.load(api, 'r1');
    expect(second.current?.imageId).toBe('img002');
    await second.submit(6, 6);
    expect(second.complete).toBe(true);
  });

  it('computes per-property means for the completion screen', async () => {
    const api = new MockReviewApi(2);
    const session = await ReviewSession.load(api, 'r1');
    await session.submit(5, 4);
    await session.submit(3, 6);
    expect(session.sessionMeans()).toEqual({ removed: 4, added: 5, count: 2 });
  });
});

describe('scripted 10-pair session with a mid-session disconnect', () => {
  it('finishes with exactly 10 server rows and the correct resume position', async () => {
    const api = new MockReviewApi(10);
    const session = await ReviewSession.load(api, 'rater07');

    // four pairs while everything works
    for (let i = 0; i < 4; i++) {
      expect(await session.submit(5, 4)).toBe('recorded');
    }
    expect(api.rows).toHaveLength(4);

    // the network dies; three more pairs go into the retry queue
    api.online = false;
    for (let i = 0; i < 3; i++) {
      expect(await session.submit(4, 5)).toBe('queued');
    }
    expect(api.rows).toHaveLength(4);
    expect(session.queue.size).toBe(3);
    expect(session.position).toBe(7); // the rater kept moving

    // reconnect: the queue drains without loss
    api.online = true;
    const flush = await session.flushQueue();
    expect(flush).toEqual({ delivered: 3, remaining: 0, rejected: [] });
    expect(api.rows).toHaveLength(7);

    // a parallel reload at this moment resumes at pair 8
    const reloaded = await ReviewSession.load(api, 'rater07');
    expect(reloaded.position).toBe(7);
    expect(reloaded.scoredCount).toBe(7);

    // the original session finishes the remaining three
    while (!session.complete) {
      await session.submit(5, 5);
    }
    expect(api.rows).toHaveLength(10);

    // one row per image, no duplicates, every score in range
    const imageIds = api.rows.map((row) => row.image_id);
    expect(new Set(imageIds).size).toBe(10);
    for (const row of api.rows) {
      expect(row.rater_id).toBe('rater07');
      expect(row.removed_artifacts).toBeGreaterThanOrEqual(0);
      expect(row.removed_artifacts).toBeLessThanOrEqual(6);
      expect(row.added_structures).toBeGreaterThanOrEqual(0);
      expect(row.added_structures).toBeLessThanOrEqual(6);
    }

    const final = await ReviewSession.load(api, 'rater07');
    expect(final.complete).toBe(true);
  });

  it('an ack lost in transit does not create a duplicate row', async () => {
    const api = new MockReviewApi(2);
    const session = await ReviewSession.load(api, 'r1');

    // the row lands server-side but the response is lost
    api.dropNextAck = true;
    expect(await session.submit(5, 4)).toBe('queued');
    expect(api.rows).toHaveLength(1);
    expect(session.queue.size).toBe(1);

    // the retry comes back 409 and counts as delivered
    const flush = await session.flushQueue();
    expect(flush.delivered).toBe(1);
    expect(flush.remaining).toBe(0);
    expect(api.rows).toHaveLength(1);

    await session.submit(3, 3);
    expect(session.complete).toBe(true);
    expect(api.rows).toHaveLength(2);
  });

  it('total network loss never drops a score', async () => {
    const api = new MockReviewApi(5);
    const session = await ReviewSession.load(api, 'r1');
    api.online = false;
    for (let i = 0; i < 5; i++) {
      expect(await session.submit(2, 2)).toBe('queued');
    }
    // several failed flushes in a row change nothing
    for (let attempt = 0; attempt < 3; attempt++) {
      const flush = await session.flushQueue();
      expect(flush.delivered).toBe(0);
      expect(session.queue.size).toBe(5);
    }
    api.online = true;
    const flush = await session.flushQueue();
    expect(flush.delivered).toBe(5);
    expect(api.rows).toHaveLength(5);
  });
});
