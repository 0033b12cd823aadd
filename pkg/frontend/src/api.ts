/** Typed fetch client for the QA service; the only write path is POST /labels. */

import type {
  Health,
  LabelRecord,
  NextUnlabelled,
  ScanListing,
  TraceListing,
  VerdictText,
  VoteResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = 'ApiError';
  }
}

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === 'string') return body.detail;
    return JSON.stringify(body);
  } catch {
    return `HTTP ${res.status}`;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, '') + path;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.url(path), { headers: { Accept: 'application/json' } });
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as T;
  }

  health(): Promise<Health> {
    return this.getJson<Health>('/healthz');
  }

  listScans(): Promise<ScanListing> {
    return this.getJson<ScanListing>('/scans');
  }

  nextUnlabelled(): Promise<NextUnlabelled> {
    return this.getJson<NextUnlabelled>('/scans/next-unlabelled');
  }

  labelRecord(scanId: string): Promise<LabelRecord> {
    return this.getJson<LabelRecord>(`/labels/${encodeURIComponent(scanId)}`);
  }

  async scanImage(scanId: string): Promise<ArrayBuffer> {
    const res = await this.fetchImpl(this.url(`/scans/${encodeURIComponent(scanId)}/image`));
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return res.arrayBuffer();
  }

  async postVote(scanId: string, expertId: string, verdict: VerdictText): Promise<VoteResponse> {
    const res = await this.fetchImpl(this.url('/labels'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ scan_id: scanId, expert_id: expertId, verdict }),
    });
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as VoteResponse;
  }

  async manifestCsv(): Promise<string | null> {
    const res = await this.fetchImpl(this.url('/artifacts/manifest'));
    if (res.status === 404) return null;
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return res.text();
  }

  async traceNames(): Promise<string[]> {
    const body = await this.getJson<TraceListing>('/artifacts/traces');
    return body.traces;
  }

  async traceCsv(name: string): Promise<string> {
    const res = await this.fetchImpl(this.url(`/artifacts/traces/${encodeURIComponent(name)}`));
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return res.text();
  }
}
