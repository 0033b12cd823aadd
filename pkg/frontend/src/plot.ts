/** Minimal canvas line plots for the training-curve panels. */

import type { Series } from './traces.js';

const COLORS = ['#2563eb', '#16a34a', '#dc2626', '#9333ea', '#ea580c', '#0d9488'];

export function drawSeries(
  canvas: HTMLCanvasElement,
  series: Series[],
  opts: { yMin?: number; yMax?: number; title?: string } = {},
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#f8fafc';
  ctx.fillRect(0, 0, width, height);

  const pad = { left: 42, right: 10, top: 22, bottom: 26 };
  const plotW = width - pad.left - pad.right;
  const plotH = height - pad.top - pad.bottom;

  const allPoints = series.flatMap((s) => s.points);
  if (allPoints.length === 0) {
    ctx.fillStyle = '#64748b';
    ctx.font = '13px sans-serif';
    ctx.fillText('no data', width / 2 - 20, height / 2);
    return;
  }
  const xMin = Math.min(...allPoints.map((p) => p.x));
  const xMax = Math.max(...allPoints.map((p) => p.x));
  const yMin = opts.yMin ?? Math.min(...allPoints.map((p) => p.y));
  const yMax = opts.yMax ?? Math.max(...allPoints.map((p) => p.y));
  const xTo = (x: number) => pad.left + ((x - xMin) / Math.max(1e-9, xMax - xMin)) * plotW;
  const yTo = (y: number) => pad.top + (1 - (y - yMin) / Math.max(1e-9, yMax - yMin)) * plotH;

  ctx.strokeStyle = '#cbd5e1';
  ctx.strokeRect(pad.left, pad.top, plotW, plotH);
  ctx.fillStyle = '#334155';
  ctx.font = '11px sans-serif';
  ctx.fillText(yMax.toFixed(2), 4, pad.top + 10);
  ctx.fillText(yMin.toFixed(2), 4, pad.top + plotH);
  ctx.fillText(String(xMin), pad.left, height - 8);
  ctx.fillText(String(xMax), pad.left + plotW - 16, height - 8);
  if (opts.title) {
    ctx.font = '13px sans-serif';
    ctx.fillText(opts.title, pad.left, 14);
  }

  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length]!;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.points.forEach((p, j) => {
      if (j === 0) ctx.moveTo(xTo(p.x), yTo(p.y));
      else ctx.lineTo(xTo(p.x), yTo(p.y));
    });
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.font = '11px sans-serif';
    ctx.fillText(s.label, pad.left + 8, pad.top + 14 + 13 * i);
  });
}
