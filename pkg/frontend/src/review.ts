/** Review tab: canvas rendering at true resolution plus vote controls. */

import { consensusLabel } from './consensus.js';
import { toDisplayRgba } from './pgm.js';
import { ReviewSession, type SessionState } from './session.js';
import type { VerdictText } from './types.js';

export function mountReview(root: HTMLElement, session: ReviewSession): void {
  const scanMeta = root.querySelector<HTMLElement>('#scan-meta')!;
  const banner = root.querySelector<HTMLElement>('#banner')!;
  const consensusPanel = root.querySelector<HTMLElement>('#consensus-panel')!;
  const emptyScreen = root.querySelector<HTMLElement>('#empty-queue')!;
  const viewer = root.querySelector<HTMLElement>('#viewer')!;
  const canvas = root.querySelector<HTMLCanvasElement>('#scan-canvas')!;
  const expertInput = root.querySelector<HTMLInputElement>('#expert-id')!;
  const zoomSelect = root.querySelector<HTMLSelectElement>('#zoom')!;

  const buttons: Array<[string, () => void]> = [
    ['#vote-faultless', () => void session.vote('Faultless')],
    ['#vote-erroneous', () => void session.vote('Erroneous')],
    ['#vote-skip', () => void session.skip()],
  ];
  for (const [selector, handler] of buttons) {
    root.querySelector<HTMLButtonElement>(selector)!.addEventListener('click', handler);
  }

  expertInput.addEventListener('input', () => {
    session.setExpertId(expertInput.value);
    localStorage.setItem('wsqa-expert-id', expertInput.value);
  });
  const saved = localStorage.getItem('wsqa-expert-id');
  if (saved) {
    expertInput.value = saved;
    session.setExpertId(saved);
  }

  zoomSelect.addEventListener('change', () => {
    session.setZoom(Number(zoomSelect.value));
  });

  // keyboard shortcuts: labelling hundreds of scans is throughput-bound
  document.addEventListener('keydown', (ev) => {
    if (ev.target instanceof HTMLInputElement) return;
    const key = ev.key.toLowerCase();
    const act: Record<string, VerdictText | 'skip'> = { f: 'Faultless', e: 'Erroneous', s: 'skip' };
    const verdict = act[key];
    if (!verdict) return;
    if (verdict === 'skip') void session.skip();
    else void session.vote(verdict);
  });

  session.onChange((state) => render(state));

  function render(state: SessionState): void {
    banner.textContent = state.banner;
    banner.hidden = state.banner.length === 0;
    emptyScreen.hidden = !state.queueEmpty;
    viewer.hidden = state.queueEmpty;
    consensusPanel.textContent = state.consensusText;
    consensusPanel.hidden = state.consensusText.length === 0;

    const voteEnabled = state.scan !== null && state.expertId.length > 0;
    for (const selector of ['#vote-faultless', '#vote-erroneous'] as const) {
      root.querySelector<HTMLButtonElement>(selector)!.disabled = !voteEnabled;
    }

    if (!state.scan || !state.image) {
      scanMeta.textContent = state.queueEmpty ? '' : 'loading…';
      return;
    }
    const queue =
      state.queuePosition !== null && state.queueLength !== null
        ? ` — queue ${state.queuePosition}/${state.queueLength}`
        : '';
    const seam = state.scan.seam_type ? ` [${state.scan.seam_type}]` : '';
    scanMeta.textContent =
      `${state.scan.scan_id}${seam} ${state.image.width}x${state.image.height}, ` +
      `${state.scan.votes_recorded} vote(s) recorded${queue}`;

    // 1:1 pixels at zoom 1.0: canvas backing store equals scan size and
    // CSS scaling (pixelated) handles the zoom factor, so the client
    // never resamples the 16-bit data
    const img = state.image;
    canvas.width = img.width;
    canvas.height = img.height;
    const ctx = canvas.getContext('2d')!;
    ctx.putImageData(new ImageData(toDisplayRgba(img), img.width, img.height), 0, 0);
    canvas.style.width = `${img.width * state.viewport.zoom}px`;
    canvas.style.height = `${img.height * state.viewport.zoom}px`;
  }
}

export { consensusLabel };
