import { describe, expect, it } from 'vitest';

import {
  SCORE_LABELS,
  SCORE_VALUES,
  isScore,
  type ScoreProperty,
} from '../src/labels.js';

const PROPERTIES: ScoreProperty[] = ['removed_artifacts', 'added_structures'];

describe('score values', () => {
  it('enumerate exactly 0 through 6', () => {
    expect([...SCORE_VALUES]).toEqual([0, 1, 2, 3, 4, 5, 6]);
  });

  it('isScore rejects everything outside the seven levels', () => {
    for (const bad of [-1, 7, 3.5, 2.0001, NaN, Infinity]) {
      expect(isScore(bad)).toBe(false);
    }
    for (const good of SCORE_VALUES) {
      expect(isScore(good)).toBe(true);
    }
  });
});

describe('protocol labels', () => {
  it('each property has exactly seven levels', () => {
    for (const property of PROPERTIES) {
      expect(Object.keys(SCORE_LABELS[property])).toHaveLength(7);
    }
  });

  it('removed_artifacts wording matches the survey instructions', () => {
    const labels = SCORE_LABELS.removed_artifacts;
    expect(labels[0]).toBe('Negative impact; Severe structures are removed');
    expect(labels[3]).toBe('No significant structures are removed');
    expect(labels[4]).toBe('Positive impact; Slight artifacts are removed');
    expect(labels[6]).toBe('Positive impact; Severe artifacts are removed');
  });

  it('added_structures wording matches the survey instructions', () => {
    const labels = SCORE_LABELS.added_structures;
    expect(labels[0]).toBe('Negative impact; Severe artifacts are added');
    expect(labels[3]).toBe('No significant structures are added');
    expect(labels[4]).toBe('Positive impact; Slight structures are added');
    expect(labels[6]).toBe('Positive impact; Severe structures are added');
  });

  it('levels below 3 read negative, above 3 read positive', () => {
    for (const property of PROPERTIES) {
      for (const value of SCORE_VALUES) {
        const label = SCORE_LABELS[property][value];
        if (value < 3) expect(label).toMatch(/^Negative impact/);
        if (value > 3) expect(label).toMatch(/^Positive impact/);
        if (value === 3) expect(label).toMatch(/^No significant/);
      }
    }
  });
});
