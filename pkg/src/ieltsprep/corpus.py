"""Dataset loading, validation, band arithmetic, and reproducible splits."""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

BAND_MIN = 1.0
BAND_MAX = 9.0


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid records."""


def clamp_band(x: float) -> float:
    """Clamp a continuous score to the displayable [1.0, 9.0] range."""
    return min(BAND_MAX, max(BAND_MIN, x))


def round_to_band(x: float) -> float:
    """Round a raw score to the nearest 0.5-step band, clamped to [1.0, 9.0].

    Exact quarter ties (x.25 / x.75) round upward.
    """
    if not math.isfinite(x):
        raise CorpusError(f"cannot round non-finite value {x!r} to a band")
    return clamp_band(math.floor(x * 2.0 + 0.5) / 2.0)


def is_valid_band(value: float) -> bool:
    """True if value is already on the 0.5-step lattice within [1, 9]."""
    return (
        math.isfinite(value)
        and BAND_MIN <= value <= BAND_MAX
        and abs(value * 2 - round(value * 2)) < 1e-9
    )


@dataclass(frozen=True)
class EssayRecord:
    """One essay, optionally with an expert band label."""

    id: str
    body: str
    prompt: str = ""
    label: float | None = None

    def __post_init__(self):
        if not self.body or not any(c.isalpha() for c in self.body):
            raise CorpusError(f"essay {self.id!r}: empty essay body")
        if self.label is not None:
            if not math.isfinite(self.label) or not (BAND_MIN <= self.label <= BAND_MAX):
                raise CorpusError(f"essay {self.id!r}: band out of range: {self.label}")


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise CorpusError("split fractions must be positive")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise CorpusError(f"split fractions sum to {sum(fracs)}, expected 1.0")


def _record_from_row(row: dict, index: int) -> EssayRecord:
    essay = (row.get("essay") or "").strip()
    if not essay:
        raise CorpusError(f"row {index}: empty essay")
    band = row.get("band")
    label = None
    if band is not None and str(band).strip() != "":
        try:
            label = float(band)
        except (TypeError, ValueError):
            raise CorpusError(f"row {index}: unparseable band {band!r}") from None
        if not math.isfinite(label) or not (BAND_MIN <= label <= BAND_MAX):
            raise CorpusError(f"row {index}: band out of range: {label}")
    rec_id = str(row.get("id") or "").strip() or f"row-{index}"
    try:
        return EssayRecord(id=rec_id, body=essay, prompt=str(row.get("prompt") or ""), label=label)
    except CorpusError as exc:
        raise CorpusError(f"row {index}: {exc}") from None


def load_dataset(path: str | Path, format: str | None = None) -> list[EssayRecord]:
    """Load essays from a CSV or JSONL file.

    Columns/keys: id (optional), prompt (optional), essay (required),
    band (optional). Row order is preserved; any malformed row raises a
    CorpusError naming its index.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"no such file: {path}")
    fmt = format or ("jsonl" if path.suffix in (".jsonl", ".ndjson") else "csv")
    records: list[EssayRecord] = []
    if fmt == "csv":
        with path.open(newline="", encoding="utf-8") as fh:
            for index, row in enumerate(csv.DictReader(fh)):
                records.append(_record_from_row(row, index))
    elif fmt == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for index, line in enumerate(fh):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"row {index}: invalid JSON: {exc}") from None
                records.append(_record_from_row(row, index))
    else:
        raise CorpusError(f"unknown format {fmt!r} (expected csv or jsonl)")
    return records


def save_dataset(records: list[EssayRecord], path: str | Path) -> None:
    """Write records as CSV with the canonical column set."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "prompt", "essay", "band"])
        for rec in records:
            writer.writerow([rec.id, rec.prompt, rec.body, "" if rec.label is None else rec.label])


def _partition_sizes(n: int, fracs: tuple[float, float, float]) -> list[int]:
    # Largest-remainder apportionment: each size within 1 of frac*n, sum == n.
    raw = [f * n for f in fracs]
    sizes = [math.floor(r) for r in raw]
    remainders = sorted(range(3), key=lambda i: raw[i] - sizes[i], reverse=True)
    for i in range(n - sum(sizes)):
        sizes[remainders[i % 3]] += 1
    return sizes


def split_dataset(
    records: list[EssayRecord], spec: SplitSpec
) -> tuple[list[EssayRecord], list[EssayRecord], list[EssayRecord]]:
    """Seeded uniform shuffle followed by contiguous slicing.

    Deterministic for identical (records, spec); partitions are disjoint
    and their union is the input.
    """
    if len(records) < 10:
        raise CorpusError(f"need at least 10 records to split, got {len(records)}")
    shuffled = list(records)
    random.Random(spec.seed).shuffle(shuffled)
    n_train, n_val, _ = _partition_sizes(
        len(records), (spec.train_frac, spec.val_frac, spec.test_frac)
    )
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )
