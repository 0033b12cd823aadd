import { ApiClient } from './api.js';
import { mountDashboard } from './dashboard.js';
import { ReviewSession } from './session.js';
import { mountReview } from './review.js';

function serviceUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get('service') ?? localStorage.getItem('wsqa-service-url') ?? window.location.origin;
}

function main(): void {
  const urlInput = document.querySelector<HTMLInputElement>('#service-url')!;
  urlInput.value = serviceUrl();
  urlInput.addEventListener('change', () => {
    localStorage.setItem('wsqa-service-url', urlInput.value);
    window.location.reload();
  });

  const api = new ApiClient(serviceUrl());
  const session = new ReviewSession(api);
  mountReview(document.body, session);

  const tabs = document.querySelectorAll<HTMLButtonElement>('nav button[data-tab]');
  const panels = document.querySelectorAll<HTMLElement>('main > section');
  tabs.forEach((tab) =>
    tab.addEventListener('click', () => {
      tabs.forEach((t) => t.classList.toggle('active', t === tab));
      panels.forEach((p) => (p.hidden = p.id !== tab.dataset.tab));
      if (tab.dataset.tab === 'dashboard') {
        void mountDashboard(document.body, api);
      }
    }),
  );

  const status = document.querySelector<HTMLElement>('#service-status')!;
  api
    .health()
    .then((h) => {
      status.textContent = h.model_loaded ? 'service up, model loaded' : 'service up (labelling only)';
      status.className = 'ok';
    })
    .catch((err) => {
      status.textContent = `service unreachable: ${err instanceof Error ? err.message : err}`;
      status.className = 'error';
    });

  void session.loadNext();
}

document.addEventListener('DOMContentLoaded', main);
