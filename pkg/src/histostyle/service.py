"""HTTP review service: serves image pairs and persists rater scores.

The score store is append-only and writes through to disk (flush + fsync)
before acknowledging, so an accepted score survives a crash immediately
after the response.  Progress is always derived from the CSV, never from
in-process state alone, which makes restarts lossless.
"""

from __future__ import annotations

import csv
import io
import json
import os
import random
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .errors import DuplicateScoreError, FormatError
from .evaluation.records import CSV_HEADER, ScoreRecord, format_row, parse_scores
from .images import ColorMode


@dataclass(frozen=True)
class ManifestPair:
    image_id: str
    original: Path
    stylized: Path
    color_mode: ColorMode


@dataclass(frozen=True)
class ReviewManifest:
    pairs: Tuple[ManifestPair, ...]
    order_seed: Optional[int] = None

    def __post_init__(self):
        seen = set()
        for pair in self.pairs:
            if pair.image_id in seen:
                raise FormatError(f"duplicate image_id in manifest: {pair.image_id!r}")
            seen.add(pair.image_id)

    @classmethod
    def load(cls, path) -> "ReviewManifest":
        path = Path(path)
        try:
            document = json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"manifest is not valid JSON: {exc}") from None
        if not isinstance(document, dict) or "pairs" not in document:
            raise FormatError('manifest must be an object with a "pairs" list')
        order_seed = document.get("order_seed")
        if order_seed is not None and not isinstance(order_seed, int):
            raise FormatError("order_seed must be an integer when present")
        base = path.parent
        pairs = []
        for index, entry in enumerate(document["pairs"]):
            if not isinstance(entry, dict):
                raise FormatError(f"pair {index} is not an object")
            try:
                image_id = entry["image_id"]
                original = base / entry["original"]
                stylized = base / entry["stylized"]
                mode = ColorMode(entry.get("color_mode", "intact"))
            except KeyError as exc:
                raise FormatError(f"pair {index} is missing {exc.args[0]!r}") from None
            except ValueError:
                raise FormatError(
                    f"pair {index} has unknown color_mode {entry.get('color_mode')!r}"
                ) from None
            if not image_id or not isinstance(image_id, str):
                raise FormatError(f"pair {index} has an empty image_id")
            for role, file_path in (("original", original), ("stylized", stylized)):
                if not file_path.is_file():
                    raise FormatError(
                        f"pair {image_id!r}: {role} file not found: {file_path}"
                    )
            pairs.append(ManifestPair(image_id, original, stylized, mode))
        return cls(pairs=tuple(pairs), order_seed=order_seed)

    @property
    def by_id(self) -> Dict[str, ManifestPair]:
        return {pair.image_id: pair for pair in self.pairs}

    def order_for(self, rater_id: Optional[str]) -> List[ManifestPair]:
        """Presentation order: seeded per-rater shuffle, stable across restarts."""
        ordered = list(self.pairs)
        if rater_id and self.order_seed is not None:
            random.Random(f"{self.order_seed}:{rater_id}").shuffle(ordered)
        return ordered


class ScoreStore:
    """Append-only CSV-backed score collection with duplicate rejection.

    All appends funnel through one lock, and each row is written with a
    single write() call, so concurrent submissions can never interleave
    within a row.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._by_rater: Dict[str, List[str]] = {}
        self._seen = set()
        if self.path.exists():
            for record in parse_scores(self.path.read_bytes()):
                self._remember(record)
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "w", encoding="utf-8", newline="") as handle:
                handle.write(CSV_HEADER + "\n")
                handle.flush()
                os.fsync(handle.fileno())

    def _remember(self, record: ScoreRecord) -> None:
        self._seen.add((record.rater_id, record.image_id))
        self._by_rater.setdefault(record.rater_id, []).append(record.image_id)

    def append(self, record: ScoreRecord) -> None:
        """Durably append one record; raises DuplicateScoreError on repeats."""
        row = io.StringIO()
        csv.writer(row, lineterminator="\n").writerow(format_row(record))
        with self._lock:
            if (record.rater_id, record.image_id) in self._seen:
                raise DuplicateScoreError(record.rater_id, record.image_id)
            with open(self.path, "a", encoding="utf-8", newline="") as handle:
                handle.write(row.getvalue())
                handle.flush()
                os.fsync(handle.fileno())
            self._remember(record)

    def image_ids_for(self, rater_id: str) -> List[str]:
        with self._lock:
            return list(self._by_rater.get(rater_id, []))

    @property
    def record_count(self) -> int:
        with self._lock:
            return len(self._seen)


class ScoreSubmission(BaseModel):
    rater_id: str = Field(min_length=1, pattern=r"^[^\x00-\x1f]+$")
    image_id: str = Field(min_length=1)
    removed_artifacts: int = Field(ge=0, le=6)
    added_structures: int = Field(ge=0, le=6)


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def create_app(manifest: ReviewManifest, store: ScoreStore) -> FastAPI:
    app = FastAPI(title="histostyle review service")
    # The review UI is typically served from a separate static host on the
    # same LAN, so the browser calls us cross-origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    pairs_by_id = manifest.by_id

    @app.get("/api/manifest")
    def get_manifest(rater_id: Optional[str] = None):
        ordered = manifest.order_for(rater_id)
        return {
            "order_seed": manifest.order_seed,
            "pair_count": len(ordered),
            "pairs": [
                {
                    "image_id": pair.image_id,
                    "color_mode": pair.color_mode.value,
                    "original_url": f"/api/image/{pair.image_id}/original",
                    "stylized_url": f"/api/image/{pair.image_id}/stylized",
                }
                for pair in ordered
            ],
        }

    @app.get("/api/image/{image_id}/{role}")
    def get_image(image_id: str, role: str):
        pair = pairs_by_id.get(image_id)
        if pair is None:
            raise HTTPException(404, f"unknown image_id {image_id!r}")
        if role == "original":
            path = pair.original
        elif role == "stylized":
            path = pair.stylized
        else:
            raise HTTPException(404, f"unknown role {role!r}")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.post("/api/score")
    def post_score(submission: ScoreSubmission):
        pair = pairs_by_id.get(submission.image_id)
        if pair is None:
            raise HTTPException(404, f"unknown image_id {submission.image_id!r}")
        record = ScoreRecord(
            rater_id=submission.rater_id,
            image_id=submission.image_id,
            color_mode=pair.color_mode,
            removed_artifacts=submission.removed_artifacts,
            added_structures=submission.added_structures,
            timestamp_utc=_utc_now(),
        )
        try:
            store.append(record)
        except DuplicateScoreError as exc:
            raise HTTPException(409, str(exc)) from None
        return {
            "status": "recorded",
            "rater_id": record.rater_id,
            "image_id": record.image_id,
            "color_mode": record.color_mode.value,
            "timestamp_utc": record.timestamp_utc,
        }

    @app.get("/api/progress/{rater_id}")
    def get_progress(rater_id: str):
        scored = store.image_ids_for(rater_id)
        return {
            "rater_id": rater_id,
            "scored_image_ids": scored,
            "scored_count": len(scored),
            "total": len(manifest.pairs),
        }

    return app
