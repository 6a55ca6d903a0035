/**
 * Entry point.  Query parameters:
 *   ?rater=NAME          rater identifier (prompted for if absent)
 *   ?api=http://host:8000  review service base URL (same origin if absent)
 */

import { HttpReviewApi } from './api.js';
import { ReviewSession } from './session.js';
import { PairViewer } from './ui.js';

const RETRY_MS = 5000;

function appRoot(): HTMLElement {
  const root = document.getElementById('app');
  if (!root) throw new Error('index.html must contain <div id="app">');
  return root;
}

async function start(): Promise<void> {
  const root = appRoot();
  const params = new URLSearchParams(window.location.search);
  const raterId = params.get('rater')?.trim() || window.prompt('Rater id?')?.trim();
  if (!raterId) {
    root.textContent = 'A rater id is required; reload to try again.';
    return;
  }
  const api = new HttpReviewApi(params.get('api') ?? '');

  let session: ReviewSession;
  try {
    session = await ReviewSession.load(api, raterId);
  } catch {
    root.replaceChildren();
    const banner = document.createElement('div');
    banner.className = 'banner';
    banner.textContent = `Review service unreachable — retrying in ${RETRY_MS / 1000} s.`;
    root.append(banner);
    setTimeout(() => void start(), RETRY_MS);
    return;
  }

  const viewer = new PairViewer(root, session);
  viewer.render();

  // Flush the retry queue when connectivity returns; the browser's
  // online event is best-effort, so also poll while anything is queued.
  window.addEventListener('online', () => {
    void session.flushQueue().then(() => viewer.render());
  });
  setInterval(() => {
    if (session.queue.size > 0) {
      void session.flushQueue().then(() => viewer.render());
    }
  }, RETRY_MS);
}

void start();
