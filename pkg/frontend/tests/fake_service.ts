/** In-process stand-in for the QA service with the same labelling
 * semantics: per-expert vote replacement, quorum + strict majority
 * consensus, 409 once consensus locks. Serves canned 16-bit PGMs.
 */

import type { FetchLike } from '../src/api.js';
import type { VerdictText } from '../src/types.js';

type Votes = Map<string, VerdictText>;

export function tinyPgm16(width: number, height: number, fill = 1000): Uint8Array {
  const header = new TextEncoder().encode(`P5\n${width} ${height}\n65535\n`);
  const out = new Uint8Array(header.length + width * height * 2);
  out.set(header, 0);
  for (let i = 0; i < width * height; i += 1) {
    out[header.length + 2 * i] = fill >> 8;
    out[header.length + 2 * i + 1] = fill & 0xff;
  }
  return out;
}

export class FakeService {
  readonly votes = new Map<string, Votes>();
  readonly quorum: number;

  constructor(readonly scanIds: string[], quorum = 5) {
    this.quorum = quorum;
  }

  consensus(scanId: string): VerdictText | null {
    const votes = this.votes.get(scanId);
    if (!votes || votes.size < this.quorum) return null;
    let erroneous = 0;
    for (const v of votes.values()) if (v === 'Erroneous') erroneous += 1;
    const faultless = votes.size - erroneous;
    if (2 * erroneous > votes.size) return 'Erroneous';
    if (2 * faultless > votes.size) return 'Faultless';
    return null;
  }

  tally(scanId: string): Partial<Record<VerdictText, number>> {
    const tally: Partial<Record<VerdictText, number>> = {};
    for (const v of (this.votes.get(scanId) ?? new Map()).values()) {
      tally[v as VerdictText] = (tally[v as VerdictText] ?? 0) + 1;
    }
    return tally;
  }

  /** Records every committee record that reached consensus (the store view). */
  consensusRecords(): Array<{ scan_id: string; consensus: VerdictText }> {
    return this.scanIds
      .map((id) => ({ scan_id: id, consensus: this.consensus(id) }))
      .filter((r): r is { scan_id: string; consensus: VerdictText } => r.consensus !== null);
  }

  fetch: FetchLike = async (input, init) => {
    const url = new URL(input, 'http://fake');
    const path = url.pathname;
    const json = (status: number, body: unknown) =>
      new Response(JSON.stringify(body), { status, headers: { 'Content-Type': 'application/json' } });

    if (path === '/healthz') return json(200, { status: 'ok', model_loaded: false });

    if (path === '/scans') {
      return json(200, {
        scans: this.scanIds.map((id) => ({
          scan_id: id,
          votes_recorded: this.votes.get(id)?.size ?? 0,
          consensus: this.consensus(id),
        })),
      });
    }

    if (path === '/scans/next-unlabelled') {
      const next = [...this.scanIds].sort().find((id) => this.consensus(id) === null);
      if (!next) return json(404, { detail: 'no unlabelled scans' });
      return json(200, {
        scan_id: next, width: 8, height: 4, seam_type: '',
        votes_recorded: this.votes.get(next)?.size ?? 0,
        image_url: `/scans/${next}/image`,
      });
    }

    const imageMatch = path.match(/^\/scans\/([^/]+)\/image$/);
    if (imageMatch) {
      const id = decodeURIComponent(imageMatch[1]!);
      if (!this.scanIds.includes(id)) return json(404, { detail: `unknown scan '${id}'` });
      return new Response(tinyPgm16(8, 4), {
        status: 200, headers: { 'Content-Type': 'image/x-portable-graymap' },
      });
    }

    const labelMatch = path.match(/^\/labels\/([^/]+)$/);
    if (labelMatch) {
      const id = decodeURIComponent(labelMatch[1]!);
      if (!this.scanIds.includes(id)) return json(404, { detail: `unknown scan '${id}'` });
      const votes = Object.fromEntries(this.votes.get(id) ?? new Map());
      return json(200, { scan_id: id, votes, consensus: this.consensus(id) });
    }

    if (path === '/labels' && init?.method === 'POST') {
      const body = JSON.parse(String(init.body)) as {
        scan_id: string; expert_id: string; verdict: VerdictText;
      };
      if (!this.scanIds.includes(body.scan_id)) {
        return json(404, { detail: `unknown scan '${body.scan_id}'` });
      }
      if (body.verdict !== 'Faultless' && body.verdict !== 'Erroneous') {
        return json(400, { detail: `unknown verdict '${body.verdict}'` });
      }
      if (this.consensus(body.scan_id) !== null) {
        return json(409, { detail: `scan '${body.scan_id}' already has a consensus` });
      }
      const votes = this.votes.get(body.scan_id) ?? new Map<string, VerdictText>();
      const replaced = votes.has(body.expert_id);
      votes.set(body.expert_id, body.verdict);
      this.votes.set(body.scan_id, votes);
      return json(200, {
        scan_id: body.scan_id,
        expert_id: body.expert_id,
        replaced,
        votes_recorded: votes.size,
        tally: this.tally(body.scan_id),
        consensus: this.consensus(body.scan_id),
        quorum: this.quorum,
      });
    }

    if (path === '/artifacts/manifest') return json(404, { detail: 'no manifest configured' });
    if (path === '/artifacts/traces') return json(200, { traces: [] });

    return json(404, { detail: `no route ${path}` });
  };
}
