"""Per-(category, year) citation baselines and per-article normalized scores.

Every (article, category) assignment contributes one observation to its
category-year cell, so a multiply-classified article is counted once per
category. Baselines always come from the full dataset; any filtering by
country or author count happens later, at grouping time.

A cell whose citations are all zero is degenerate: both of its means are
zero, no score can be formed against it, and downstream analyses drop its
observations (with a count of how many were dropped).
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from . import stats
from .ingest import ArticleRecord, IngestError, _open_text

__all__ = [
    "FieldYearKey",
    "Baseline",
    "NormalizedObservation",
    "MissingBaselineError",
    "compute_baselines",
    "normalize",
    "normalize_dataset",
    "write_baselines_csv",
    "read_baselines_csv",
]

BASELINE_CSV_HEADER = ("category", "year", "n", "arith_mean", "geo_mean")


class MissingBaselineError(LookupError):
    """No baseline exists for the requested (category, year) cell."""


@dataclass(frozen=True)
class FieldYearKey:
    """Identifies one normalization cell."""

    category: str
    year: int


@dataclass(frozen=True)
class Baseline:
    """Citation averages for one cell; ``geo_mean <= arith_mean`` always."""

    key: FieldYearKey
    n: int
    arith_mean: float
    geo_mean: float


@dataclass(frozen=True)
class NormalizedObservation:
    """One (article, category) pair with its normalized score(s).

    Scores are ``None`` exactly when the cell is degenerate (its mean is
    zero, so no ratio exists).
    """

    article_id: str
    key: FieldYearKey
    raw_citations: int
    score_arith: float | None
    score_geo: float | None


def compute_baselines(
    records: Iterable[ArticleRecord],
) -> dict[FieldYearKey, Baseline]:
    """Fold citation counts into per-cell baselines.

    All records contribute, including those without country information.
    Returns an empty mapping for an empty input.
    """
    cells: dict[FieldYearKey, list[int]] = defaultdict(list)
    for rec in records:
        for cat in rec.categories:
            cells[FieldYearKey(cat, rec.year)].append(rec.citations)
    baselines: dict[FieldYearKey, Baseline] = {}
    for key, counts in cells.items():
        baselines[key] = Baseline(
            key=key,
            n=len(counts),
            arith_mean=math.fsum(counts) / len(counts),
            geo_mean=stats.geometric_mean(counts),
        )
    return baselines


def normalize(
    record: ArticleRecord,
    category: str,
    baselines: Mapping[FieldYearKey, Baseline],
) -> NormalizedObservation:
    """Score one (article, category) assignment against its cell baseline.

    A score above 1 means the article outperformed its cell average.
    Raises :class:`MissingBaselineError` naming the cell when no baseline
    was computed for it.
    """
    key = FieldYearKey(category, record.year)
    base = baselines.get(key)
    if base is None:
        raise MissingBaselineError(
            f"no baseline for category {category!r}, year {record.year}"
        )
    c = record.citations
    return NormalizedObservation(
        article_id=record.id,
        key=key,
        raw_citations=c,
        score_arith=c / base.arith_mean if base.arith_mean > 0 else None,
        score_geo=c / base.geo_mean if base.geo_mean > 0 else None,
    )


def normalize_dataset(
    records: Iterable[ArticleRecord],
    baselines: Mapping[FieldYearKey, Baseline],
) -> list[NormalizedObservation]:
    """Score every (article, category) assignment, in input order."""
    return [normalize(rec, cat, baselines) for rec in records for cat in rec.categories]


def write_baselines_csv(baselines: Mapping[FieldYearKey, Baseline], dest) -> None:
    """Write baselines as ``category,year,n,arith_mean,geo_mean``.

    Means are written with shortest round-trip precision, so reading the
    file back reproduces them bit-exactly.
    """
    stream, owned = _open_text(dest, "w")
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(BASELINE_CSV_HEADER)
        for key in sorted(baselines, key=lambda k: (k.category, k.year)):
            base = baselines[key]
            writer.writerow(
                [key.category, key.year, base.n, repr(base.arith_mean), repr(base.geo_mean)]
            )
        stream.flush()
    finally:
        if owned:
            stream.close()


def read_baselines_csv(source) -> dict[FieldYearKey, Baseline]:
    """Read a baselines CSV produced by :func:`write_baselines_csv`."""
    stream, owned = _open_text(source)
    try:
        reader = csv.reader(stream)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != BASELINE_CSV_HEADER:
            raise IngestError(
                "baselines CSV header must be exactly " + ",".join(BASELINE_CSV_HEADER)
            )
        baselines: dict[FieldYearKey, Baseline] = {}
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(BASELINE_CSV_HEADER):
                raise IngestError(
                    f"baselines CSV line {reader.line_num}: expected "
                    f"{len(BASELINE_CSV_HEADER)} columns, got {len(row)}"
                )
            try:
                key = FieldYearKey(row[0], int(row[1]))
                baselines[key] = Baseline(
                    key=key,
                    n=int(row[2]),
                    arith_mean=float(row[3]),
                    geo_mean=float(row[4]),
                )
            except ValueError as exc:
                raise IngestError(
                    f"baselines CSV line {reader.line_num}: {exc}"
                ) from None
        return baselines
    finally:
        if owned:
            stream.close()
