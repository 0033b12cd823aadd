"""HTTP service: in-line classification plus the labelling workflow.

One model is loaded per process; classification is stateless per
request and never touches the label store. Labelling serves scans at
full resolution: the image endpoint streams the stored PGM bytes
verbatim, never a resized rendition, so experts always judge the
original scan. All JSON fields are snake_case.
"""

from __future__ import annotations

import csv
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .cnn.model import Model, classify, forward
from .labels import ConsensusLockedError, LabelStore
from .preprocess import PreprocessConfig, to_network_input
from .scans import PgmFormatError, ResizeMode, parse_pgm_header, read_scan_pgm

PGM_MEDIA_TYPE = "image/x-portable-graymap"


@dataclass
class ScanIndex:
    """The scan universe: `<scan_id>.pgm` files under one directory."""

    directory: Path
    seam_types: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.directory = Path(self.directory)
        sidecar = self.directory / "seam_types.csv"
        if sidecar.exists():
            with open(sidecar, newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    self.seam_types[row["scan_id"]] = row.get("seam_type", "")

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.pgm"))

    def path_of(self, scan_id: str) -> Path:
        path = self.directory / f"{scan_id}.pgm"
        if "/" in scan_id or "\\" in scan_id or not path.exists():
            raise KeyError(scan_id)
        return path

    def metadata(self, scan_id: str) -> dict:
        data = self.path_of(scan_id).read_bytes()
        width, height, _, _ = parse_pgm_header(data)
        return {
            "scan_id": scan_id,
            "width": width,
            "height": height,
            "seam_type": self.seam_types.get(scan_id, ""),
        }


class VoteBody(BaseModel):
    scan_id: str
    expert_id: str
    verdict: str


def create_app(model: Model | None, scans_dir, store: LabelStore,
               threshold: float = 0.5, gamma: float = 0.7,
               manifest_path=None, traces_dir=None) -> FastAPI:
    app = FastAPI(title="weld-seam QA service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    index = ScanIndex(Path(scans_dir))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "model_loaded": model is not None}

    @app.post("/classify")
    async def classify_scan(request: Request, mode: str = "scale"):
        if model is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        try:
            resize_mode = ResizeMode.parse(mode)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        body = await request.body()
        started = time.perf_counter()
        try:
            scan = read_scan_pgm(body, scan_id="request")
            img = to_network_input(scan, PreprocessConfig(gamma=gamma, mode=resize_mode))
        except (PgmFormatError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        p_faultless, p_erroneous = forward(model, img)
        verdict = classify(model, img, threshold)
        latency_ms = (time.perf_counter() - started) * 1000.0
        return {
            "verdict": verdict.value,
            "probabilities": {"faultless": p_faultless, "erroneous": p_erroneous},
            "latency_ms": latency_ms,
        }

    @app.get("/scans")
    def list_scans():
        scans = []
        for scan_id in index.ids():
            record = store.record(scan_id)
            scans.append({
                "scan_id": scan_id,
                "votes_recorded": len(record.votes),
                "consensus": record.consensus.value if record.consensus else None,
            })
        return {"scans": scans}

    @app.get("/scans/next-unlabelled")
    def next_unlabelled():
        scan_id = store.next_unlabelled(index.ids())
        if scan_id is None:
            raise HTTPException(status_code=404, detail="no unlabelled scans")
        meta = index.metadata(scan_id)
        meta["votes_recorded"] = len(store.record(scan_id).votes)
        meta["image_url"] = f"/scans/{scan_id}/image"
        return meta

    @app.get("/scans/{scan_id}/image")
    def scan_image(scan_id: str):
        try:
            path = index.path_of(scan_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown scan {scan_id!r}")
        # Stored bytes pass through untouched: labelling sees the raw scan.
        return Response(content=path.read_bytes(), media_type=PGM_MEDIA_TYPE)

    @app.post("/labels")
    def post_vote(vote: VoteBody):
        try:
            index.path_of(vote.scan_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown scan {vote.scan_id!r}")
        try:
            verdict = read_verdict(vote.verdict)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        try:
            outcome = store.record_vote(vote.scan_id, vote.expert_id, verdict)
        except ConsensusLockedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        record = outcome.record
        tally = Counter(v.value for v in record.votes.values())
        return {
            "scan_id": record.scan_id,
            "expert_id": vote.expert_id,
            "replaced": outcome.replaced,
            "votes_recorded": len(record.votes),
            "tally": dict(tally),
            "consensus": record.consensus.value if record.consensus else None,
            "quorum": store.quorum,
        }

    @app.get("/labels/{scan_id}")
    def get_record(scan_id: str):
        try:
            index.path_of(scan_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown scan {scan_id!r}")
        return store.record(scan_id).to_json_dict()

    @app.get("/artifacts/manifest")
    def manifest_csv():
        if manifest_path is None or not Path(manifest_path).exists():
            raise HTTPException(status_code=404, detail="no manifest configured")
        return Response(content=Path(manifest_path).read_text(encoding="utf-8"),
                        media_type="text/csv")

    @app.get("/artifacts/traces")
    def list_traces():
        if traces_dir is None or not Path(traces_dir).exists():
            return {"traces": []}
        return {"traces": sorted(p.name for p in Path(traces_dir).glob("*.csv"))}

    @app.get("/artifacts/traces/{name}")
    def trace_csv(name: str):
        if traces_dir is None or "/" in name or "\\" in name:
            raise HTTPException(status_code=404, detail="no traces configured")
        path = Path(traces_dir) / name
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"unknown trace {name!r}")
        return Response(content=path.read_text(encoding="utf-8"), media_type="text/csv")

    return app


def read_verdict(text: str):
    from .scans import Verdict

    return Verdict.parse(text)
