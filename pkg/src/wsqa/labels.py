"""Append-only expert vote log with recomputed committee consensus.

Votes land as one JSON object per line; replaying the log rebuilds the
exact in-memory state, which is the crash-safety story. An expert's
later vote on the same scan replaces the earlier one. Consensus exists
once at least ``quorum`` votes are in and one verdict holds a strict
majority of the votes cast; an even split keeps the scan open. Scans
that reached consensus are locked against further votes unless the
store allows relabelling.
"""

from __future__ import annotations

import json
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .scans import CommitteeRecord, Verdict

DEFAULT_QUORUM = 5


class ConsensusLockedError(RuntimeError):
    """Vote rejected because the scan already has a consensus."""


@dataclass(frozen=True)
class VoteOutcome:
    replaced: bool
    record: CommitteeRecord


def consensus_of(votes: dict[str, Verdict], quorum: int = DEFAULT_QUORUM) -> Verdict | None:
    """Pure function of the vote multiset; order never matters."""
    if len(votes) < quorum:
        return None
    tally = Counter(votes.values())
    verdict, count = tally.most_common(1)[0]
    return verdict if 2 * count > len(votes) else None


class LabelStore:
    def __init__(self, path, quorum: int = DEFAULT_QUORUM, allow_relabel: bool = False):
        if quorum < 1:
            raise ValueError(f"quorum must be >= 1, got {quorum}")
        self.path = Path(path)
        self.quorum = quorum
        self.allow_relabel = allow_relabel
        self._votes: dict[str, dict[str, Verdict]] = {}
        self._write_lock = threading.Lock()  # one writer; readers see committed state
        if self.path.exists():
            self._replay(self.path.read_text(encoding="utf-8"))

    def _replay(self, text: str) -> None:
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                event = json.loads(line)
                scan_id = event["scan_id"]
                expert_id = event["expert_id"]
                verdict = Verdict.parse(event["verdict"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{self.path}:{lineno}: corrupt vote event: {exc}") from exc
            self._votes.setdefault(scan_id, {})[expert_id] = verdict

    def _append(self, event: dict) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, separators=(",", ":")) + "\n")
            fh.flush()

    def record(self, scan_id: str) -> CommitteeRecord:
        votes = dict(self._votes.get(scan_id, {}))
        return CommitteeRecord(
            scan_id=scan_id,
            votes=votes,
            consensus=consensus_of(votes, self.quorum),
        )

    def has_consensus(self, scan_id: str) -> bool:
        return consensus_of(self._votes.get(scan_id, {}), self.quorum) is not None

    def record_vote(self, scan_id: str, expert_id: str, verdict: Verdict) -> VoteOutcome:
        if not scan_id or not expert_id:
            raise ValueError("scan_id and expert_id must be non-empty")
        with self._write_lock:
            if self.has_consensus(scan_id) and not self.allow_relabel:
                raise ConsensusLockedError(
                    f"scan {scan_id!r} already has a consensus; start the service "
                    "with --allow-relabel to accept further votes"
                )
            replaced = expert_id in self._votes.get(scan_id, {})
            self._append({"scan_id": scan_id, "expert_id": expert_id, "verdict": verdict.value})
            self._votes.setdefault(scan_id, {})[expert_id] = verdict
            return VoteOutcome(replaced=replaced, record=self.record(scan_id))

    def next_unlabelled(self, scan_ids: list[str]) -> str | None:
        """Lowest id (sorted order) still lacking consensus."""
        for scan_id in sorted(scan_ids):
            if not self.has_consensus(scan_id):
                return scan_id
        return None

    def scan_ids_with_votes(self) -> list[str]:
        return sorted(self._votes)

    def consensus_records(self) -> list[CommitteeRecord]:
        """Records of every scan whose committee reached a verdict."""
        out = []
        for scan_id in sorted(self._votes):
            rec = self.record(scan_id)
            if rec.consensus is not None:
                out.append(rec)
        return out
