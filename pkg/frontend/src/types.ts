/** DTOs mirroring the service's snake_case JSON. */

export type VerdictText = 'Faultless' | 'Erroneous';

export type ScanSummary = {
  scan_id: string;
  votes_recorded: number;
  consensus: VerdictText | null;
};

export type ScanListing = { scans: ScanSummary[] };

export type NextUnlabelled = {
  scan_id: string;
  width: number;
  height: number;
  seam_type: string;
  votes_recorded: number;
  image_url: string;
};

export type VoteResponse = {
  scan_id: string;
  expert_id: string;
  replaced: boolean;
  votes_recorded: number;
  tally: Partial<Record<VerdictText, number>>;
  consensus: VerdictText | null;
  quorum: number;
};

export type LabelRecord = {
  scan_id: string;
  votes: Record<string, VerdictText>;
  consensus: VerdictText | null;
};

export type Health = { status: string; model_loaded: boolean };

export type TraceListing = { traces: string[] };
