/** Review-loop controller, independent of the DOM.
 *
 * Holds the session state (expert id, current scan, queue position,
 * viewport) and drives the service through the ApiClient. The UI layer
 * subscribes to `onChange` and renders; tests drive this class
 * directly. The only write the session ever makes is POST /labels.
 */

import { ApiClient, ApiError } from './api.js';
import { consensusLabel } from './consensus.js';
import { decodePgm, type DecodedPgm } from './pgm.js';
import type { NextUnlabelled, VerdictText } from './types.js';

export type Viewport = { zoom: number; panX: number; panY: number };

export type SessionState = {
  expertId: string;
  scan: NextUnlabelled | null;
  image: DecodedPgm | null;
  queuePosition: number | null;
  queueLength: number | null;
  consensusText: string;
  banner: string;
  queueEmpty: boolean;
  viewport: Viewport;
};

export class ReviewSession {
  readonly state: SessionState = {
    expertId: '',
    scan: null,
    image: null,
    queuePosition: null,
    queueLength: null,
    consensusText: '',
    banner: '',
    queueEmpty: false,
    viewport: { zoom: 1.0, panX: 0, panY: 0 },
  };

  private skipped = new Set<string>();
  private listeners: Array<(s: SessionState) => void> = [];

  constructor(private readonly api: ApiClient) {}

  onChange(listener: (s: SessionState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l(this.state);
  }

  setExpertId(expertId: string): void {
    this.state.expertId = expertId.trim();
    this.emit();
  }

  /** A vote can fire only with a scan on screen and a non-empty expert id. */
  get canVote(): boolean {
    return this.state.scan !== null && this.state.expertId.length > 0;
  }

  async loadNext(): Promise<void> {
    this.state.banner = '';
    try {
      const listing = await this.api.listScans();
      const queue = listing.scans.filter((s) => s.consensus === null);
      const next = queue.find((s) => !this.skipped.has(s.scan_id));
      this.state.queueLength = queue.length;
      if (!next) {
        this.clearScan(true);
        return;
      }
      this.state.queuePosition = queue.findIndex((s) => s.scan_id === next.scan_id) + 1;
      await this.show(next.scan_id);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.clearScan(true);
        return;
      }
      this.fail(err);
    }
  }

  private clearScan(queueEmpty: boolean): void {
    this.state.scan = null;
    this.state.image = null;
    this.state.queueEmpty = queueEmpty;
    this.emit();
  }

  private async show(scanId: string): Promise<void> {
    const [record, buffer] = await Promise.all([
      this.api.labelRecord(scanId),
      this.api.scanImage(scanId),
    ]);
    const image = decodePgm(buffer);
    this.state.scan = {
      scan_id: scanId,
      width: image.width,
      height: image.height,
      seam_type: '',
      votes_recorded: Object.keys(record.votes).length,
      image_url: `/scans/${scanId}/image`,
    };
    this.state.image = image;
    this.state.queueEmpty = false;
    this.state.viewport = { zoom: 1.0, panX: 0, panY: 0 };
    this.emit();
  }

  async vote(verdict: VerdictText): Promise<void> {
    if (!this.canVote || !this.state.scan) {
      this.state.banner = 'load a scan and set an expert id before voting';
      this.emit();
      return;
    }
    this.state.consensusText = '';
    try {
      const res = await this.api.postVote(this.state.scan.scan_id, this.state.expertId, verdict);
      // the panel keeps showing this vote's outcome while the next scan loads
      this.state.consensusText = consensusLabel(res.tally, res.consensus, res.quorum);
      this.emit();
      await this.loadNext();
    } catch (err) {
      this.fail(err);
    }
  }

  async skip(): Promise<void> {
    if (this.state.scan) {
      this.skipped.add(this.state.scan.scan_id);
    }
    await this.loadNext();
  }

  setZoom(zoom: number): void {
    this.state.viewport.zoom = Math.min(8, Math.max(0.05, zoom));
    this.emit();
  }

  private fail(err: unknown): void {
    // vote rejections and transport errors surface verbatim
    this.state.banner = err instanceof Error ? err.message : String(err);
    this.emit();
  }
}
