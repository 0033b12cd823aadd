/** Split-manifest CSV parsing for the dashboard's partition table. */

export type SplitName = 'train' | 'validation' | 'test';

export type ManifestEntry = {
  scanId: string;
  variant: string;
  split: SplitName;
  verdict: 'Faultless' | 'Erroneous';
};

export type SplitCounts = Record<SplitName, { faultless: number; erroneous: number }>;

const SPLITS: SplitName[] = ['train', 'validation', 'test'];

export function parseManifest(csv: string): ManifestEntry[] {
  const entries: ManifestEntry[] = [];
  for (const raw of csv.split('\n')) {
    const line = raw.trim();
    if (!line || line.startsWith('#') || line.startsWith('scan_id,')) continue;
    const parts = line.split(',');
    if (parts.length !== 4) throw new Error(`bad manifest row: ${line}`);
    const [scanId, variant, split, verdict] = parts as [string, string, string, string];
    if (!SPLITS.includes(split as SplitName)) throw new Error(`unknown split: ${split}`);
    if (verdict !== 'Faultless' && verdict !== 'Erroneous') {
      throw new Error(`unknown verdict: ${verdict}`);
    }
    entries.push({ scanId, variant, split: split as SplitName, verdict });
  }
  return entries;
}

export function splitCounts(entries: ManifestEntry[]): SplitCounts {
  const counts: SplitCounts = {
    train: { faultless: 0, erroneous: 0 },
    validation: { faultless: 0, erroneous: 0 },
    test: { faultless: 0, erroneous: 0 },
  };
  for (const e of entries) {
    if (e.verdict === 'Faultless') counts[e.split].faultless += 1;
    else counts[e.split].erroneous += 1;
  }
  return counts;
}
