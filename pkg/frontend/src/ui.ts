/**
 * DOM layer: renders one pair at a time side by side, the two score
 * selectors, the progress line, the retry banner, and the completion
 * screen.  All state lives in ReviewSession; this file only draws it.
 */

import {
  PROPERTY_TITLES,
  SCORE_LABELS,
  SCORE_VALUES,
  type Score,
  type ScoreProperty,
} from './labels.js';
import type { PairState, ReviewSession } from './session.js';

const ROLE_CAPTIONS = { original: 'original CLE', stylized: 'transformed' } as const;

/** Radio group listing exactly the seven protocol levels for one property. */
export function buildScoreSelector(property: ScoreProperty): HTMLFieldSetElement {
  const fieldset = document.createElement('fieldset');
  fieldset.dataset.property = property;
  const legend = document.createElement('legend');
  legend.textContent = PROPERTY_TITLES[property];
  fieldset.append(legend);
  for (const value of SCORE_VALUES) {
    const label = document.createElement('label');
    const input = document.createElement('input');
    input.type = 'radio';
    input.name = property;
    input.value = String(value);
    label.append(input, ` ${value} — ${SCORE_LABELS[property][value]}`);
    fieldset.append(label);
  }
  return fieldset;
}

export function selectedScore(
  root: ParentNode,
  property: ScoreProperty,
): Score | null {
  const checked = root.querySelector<HTMLInputElement>(
    `input[name="${property}"]:checked`,
  );
  return checked ? (Number(checked.value) as Score) : null;
}

/** Shared zoom/pan so the rater inspects the same region in both images. */
class SyncedZoom {
  private scale = 1;
  private x = 0;
  private y = 0;
  private targets: HTMLImageElement[] = [];

  attach(pane: HTMLElement, image: HTMLImageElement): void {
    this.targets.push(image);
    pane.addEventListener('wheel', (event) => {
      event.preventDefault();
      const factor = event.deltaY < 0 ? 1.2 : 1 / 1.2;
      this.scale = Math.min(8, Math.max(1, this.scale * factor));
      if (this.scale === 1) {
        this.x = 0;
        this.y = 0;
      }
      this.apply();
    });
    let dragging: { startX: number; startY: number } | null = null;
    pane.addEventListener('pointerdown', (event) => {
      dragging = { startX: event.clientX - this.x, startY: event.clientY - this.y };
      pane.setPointerCapture(event.pointerId);
    });
    pane.addEventListener('pointermove', (event) => {
      if (!dragging) return;
      this.x = event.clientX - dragging.startX;
      this.y = event.clientY - dragging.startY;
      this.apply();
    });
    pane.addEventListener('pointerup', () => {
      dragging = null;
    });
  }

  private apply(): void {
    for (const image of this.targets) {
      image.style.transform = `translate(${this.x}px, ${this.y}px) scale(${this.scale})`;
    }
  }
}

export class PairViewer {
  constructor(
    private root: HTMLElement,
    private session: ReviewSession,
  ) {}

  render(): void {
    this.root.replaceChildren();
    this.renderBanner();
    const pair = this.session.current;
    if (pair === null) {
      this.renderComplete();
    } else {
      this.renderPair(pair);
    }
  }

  private renderBanner(): void {
    const queued = this.session.queue.size;
    if (queued === 0) return;
    const banner = document.createElement('div');
    banner.className = 'banner';
    banner.textContent =
      `${queued} score${queued === 1 ? '' : 's'} waiting to reach the ` +
      'service — they will be resent automatically.';
    const retry = document.createElement('button');
    retry.textContent = 'retry now';
    retry.addEventListener('click', () => {
      void this.session.flushQueue().then(() => this.render());
    });
    banner.append(' ', retry);
    this.root.append(banner);
  }

  private renderPair(pair: PairState): void {
    const header = document.createElement('p');
    header.className = 'progress';
    const shown = this.session.position + 1;
    header.textContent =
      `Pair ${shown} of ${this.session.pairs.length}` +
      ` — ${pair.imageId} (${pair.colorMode})`;
    this.root.append(header);

    const stage = document.createElement('div');
    stage.className = 'stage';
    const zoom = new SyncedZoom();
    for (const role of ['original', 'stylized'] as const) {
      const figure = document.createElement('figure');
      const pane = document.createElement('div');
      pane.className = 'pane';
      const image = document.createElement('img');
      image.src = role === 'original' ? pair.originalUrl : pair.stylizedUrl;
      image.alt = `${ROLE_CAPTIONS[role]} ${pair.imageId}`;
      image.draggable = false;
      pane.append(image);
      zoom.attach(pane, image);
      const caption = document.createElement('figcaption');
      caption.textContent = ROLE_CAPTIONS[role];
      figure.append(pane, caption);
      stage.append(figure);
    }
    this.root.append(stage);

    const form = document.createElement('form');
    form.append(
      buildScoreSelector('removed_artifacts'),
      buildScoreSelector('added_structures'),
    );
    const submit = document.createElement('button');
    submit.type = 'submit';
    submit.textContent = 'Submit scores';
    submit.disabled = true;
    form.append(submit);

    const errorLine = document.createElement('p');
    errorLine.className = 'error';
    form.append(errorLine);

    form.addEventListener('change', () => {
      submit.disabled =
        selectedScore(form, 'removed_artifacts') === null ||
        selectedScore(form, 'added_structures') === null;
    });
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      const removed = selectedScore(form, 'removed_artifacts');
      const added = selectedScore(form, 'added_structures');
      if (removed === null || added === null) return;
      submit.disabled = true;
      this.session
        .submit(removed, added)
        .then(() => this.render())
        .catch((error: unknown) => {
          errorLine.textContent = error instanceof Error ? error.message : String(error);
          submit.disabled = false;
        });
    });
    this.root.append(form);
  }

  private renderComplete(): void {
    const done = document.createElement('div');
    done.className = 'complete';
    const heading = document.createElement('h2');
    heading.textContent = `All ${this.session.pairs.length} pairs scored — thank you.`;
    done.append(heading);
    const means = this.session.sessionMeans();
    if (means !== null) {
      const summary = document.createElement('p');
      summary.textContent =
        `This session (${means.count} pairs): mean removed-artifacts score ` +
        `${means.removed.toFixed(2)}, mean added-structures score ${means.added.toFixed(2)}.`;
      done.append(summary);
    }
    this.root.append(done);
  }
}
