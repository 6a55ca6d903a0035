/**
 * Scoring protocol levels. The label text mirrors the printed survey
 * instructions the raters work from, so the UI and the printed form
 * never disagree; do not reword these.
 */

export type Score = 0 | 1 | 2 | 3 | 4 | 5 | 6;
export type ScoreProperty = 'removed_artifacts' | 'added_structures';

export const SCORE_VALUES: readonly Score[] = [0, 1, 2, 3, 4, 5, 6];

export const SCORE_LABELS: Readonly<
  Record<ScoreProperty, Readonly<Record<Score, string>>>
> = {
  removed_artifacts: {
    0: 'Negative impact; Severe structures are removed',
    1: 'Negative impact; Moderate structures are removed',
    2: 'Negative impact; Slight structures are removed',
    3: 'No significant structures are removed',
    4: 'Positive impact; Slight artifacts are removed',
    5: 'Positive impact; Moderate artifacts are removed',
    6: 'Positive impact; Severe artifacts are removed',
  },
  added_structures: {
    0: 'Negative impact; Severe artifacts are added',
    1: 'Negative impact; Moderate artifacts are added',
    2: 'Negative impact; Slight artifacts are added',
    3: 'No significant structures are added',
    4: 'Positive impact; Slight structures are added',
    5: 'Positive impact; Moderate structures are added',
    6: 'Positive impact; Severe structures are added',
  },
};

export const PROPERTY_TITLES: Readonly<Record<ScoreProperty, string>> = {
  removed_artifacts: 'Removed artifacts',
  added_structures: 'Added structures',
};

export function isScore(value: number): value is Score {
  return Number.isInteger(value) && value >= 0 && value <= 6;
}
