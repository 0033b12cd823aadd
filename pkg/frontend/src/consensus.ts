/** Consensus presentation mirroring the service rule (quorum, strict majority). */

import type { VerdictText, VoteResponse } from './types.js';

export type Tally = Partial<Record<VerdictText, number>>;

export function votesIn(tally: Tally): number {
  return (tally.Faultless ?? 0) + (tally.Erroneous ?? 0);
}

/** "Erroneous (3/5)" once decided, otherwise "awaiting votes (n/quorum)". */
export function consensusLabel(
  tally: Tally,
  consensus: VerdictText | null,
  quorum: number,
): string {
  if (consensus) {
    const winning = tally[consensus] ?? 0;
    return `${consensus} (${winning}/${votesIn(tally)})`;
  }
  return `awaiting votes (${votesIn(tally)}/${quorum})`;
}

export function consensusLabelFromResponse(res: VoteResponse): string {
  return consensusLabel(res.tally, res.consensus, res.quorum);
}
