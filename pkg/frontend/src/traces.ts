/** Training-trace CSV parsing for overlaid progress curves. */

export type TracePoint = {
  epoch: number;
  trainAcc: number;
  trainLoss: number;
  valAcc: number | null;
  valLoss: number | null;
};

export function parseTrace(csv: string): TracePoint[] {
  const lines = csv.split('\n').filter((l) => l.trim().length > 0);
  if (lines.length === 0) return [];
  const points: TracePoint[] = [];
  for (const line of lines.slice(1)) {
    const [epoch, trainAcc, trainLoss, valAcc, valLoss] = line.split(',');
    if (epoch === undefined || trainAcc === undefined || trainLoss === undefined) {
      throw new Error(`bad trace row: ${line}`);
    }
    points.push({
      epoch: Number(epoch),
      trainAcc: Number(trainAcc),
      trainLoss: Number(trainLoss),
      valAcc: valAcc ? Number(valAcc) : null,
      valLoss: valLoss ? Number(valLoss) : null,
    });
  }
  return points;
}

export type Series = { label: string; points: Array<{ x: number; y: number }> };

export function accuracySeries(name: string, points: TracePoint[]): Series[] {
  const series: Series[] = [
    { label: `${name} train`, points: points.map((p) => ({ x: p.epoch, y: p.trainAcc })) },
  ];
  const val = points.filter((p) => p.valAcc !== null);
  if (val.length > 0) {
    series.push({ label: `${name} val`, points: val.map((p) => ({ x: p.epoch, y: p.valAcc! })) });
  }
  return series;
}
