/** Dashboard tab: split counts, labelling progress, training curves.
 *
 * Read-only: everything comes from the service's artifact and scan
 * endpoints; absence renders as an explicit placeholder, never an error.
 */

import { ApiClient } from './api.js';
import { parseManifest, splitCounts, type SplitCounts } from './manifest.js';
import { drawSeries } from './plot.js';
import { accuracySeries, parseTrace, type Series } from './traces.js';

export function renderCountsTable(counts: SplitCounts): string {
  const row = (name: string, c: { faultless: number; erroneous: number }) =>
    `<tr><td>${name}</td><td>${c.faultless}</td><td>${c.erroneous}</td></tr>`;
  const total = {
    faultless: counts.train.faultless + counts.validation.faultless + counts.test.faultless,
    erroneous: counts.train.erroneous + counts.validation.erroneous + counts.test.erroneous,
  };
  return (
    '<table><thead><tr><th></th><th>Error-free</th><th>Erroneous</th></tr></thead><tbody>' +
    row('Training', counts.train) +
    row('Validation', counts.validation) +
    row('Test', counts.test) +
    row('Total', total) +
    '</tbody></table>'
  );
}

export async function mountDashboard(root: HTMLElement, api: ApiClient): Promise<void> {
  const countsEl = root.querySelector<HTMLElement>('#split-counts')!;
  const progressEl = root.querySelector<HTMLElement>('#label-progress')!;
  const accCanvas = root.querySelector<HTMLCanvasElement>('#acc-plot')!;
  const lossCanvas = root.querySelector<HTMLCanvasElement>('#loss-plot')!;

  try {
    const csv = await api.manifestCsv();
    if (csv === null) {
      countsEl.textContent = 'no manifest published';
    } else {
      countsEl.innerHTML = renderCountsTable(splitCounts(parseManifest(csv)));
    }
  } catch (err) {
    countsEl.textContent = `manifest unavailable: ${err instanceof Error ? err.message : err}`;
  }

  try {
    const listing = await api.listScans();
    const done = listing.scans.filter((s) => s.consensus !== null).length;
    progressEl.textContent = `${done}/${listing.scans.length} scans have consensus`;
  } catch {
    progressEl.textContent = 'scan listing unavailable';
  }

  const accSeries: Series[] = [];
  const lossSeries: Series[] = [];
  try {
    for (const name of await api.traceNames()) {
      const points = parseTrace(await api.traceCsv(name));
      const label = name.replace(/\.csv$/, '');
      accSeries.push(...accuracySeries(label, points));
      lossSeries.push({
        label: `${label} loss`,
        points: points.map((p) => ({ x: p.epoch, y: p.trainLoss })),
      });
    }
  } catch {
    // leave plots empty; drawSeries shows the placeholder
  }
  drawSeries(accCanvas, accSeries, { yMin: 0, yMax: 1, title: 'accuracy over epochs' });
  drawSeries(lossCanvas, lossSeries, { title: 'training loss over epochs' });
}
