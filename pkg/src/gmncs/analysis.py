"""Collaboration profiles and grouped indicator summaries.

This is the engine behind a country-by-author-count comparison chart:
records are classified by author-count bucket and by whether their
affiliations name one country (domestic), several (international) or
none (unknown); normalized scores are then pooled per (group, bucket)
and summarized with an offset geometric mean and its confidence
interval.

The set-level value for a group is ``exp(mean(ln(1 + score))) - 1`` over
its member observations, i.e. the same offset geometric mean applied a
second time, now to cell-normalized scores.
"""

from __future__ import annotations

import logging
import csv
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from . import stats
from .baselines import NormalizedObservation, compute_baselines, normalize_dataset
from .ingest import ArticleRecord, IngestError, _open_text

__all__ = [
    "DOMESTIC",
    "INTERNATIONAL",
    "UNKNOWN",
    "ALL_GROUP",
    "OVERFLOW_BUCKET",
    "CollaborationProfile",
    "GroupingSpec",
    "GroupSummary",
    "AnalysisTable",
    "AnalysisError",
    "classify",
    "group_gmncs",
    "analyze_dataset",
    "write_analysis_csv",
    "read_analysis_csv",
]

logger = logging.getLogger(__name__)

DOMESTIC = "domestic"
INTERNATIONAL = "international"
UNKNOWN = "unknown"

ALL_GROUP = "All"
OVERFLOW_BUCKET = "10+"
MAX_BUCKET = 10

ANALYSIS_CSV_HEADER = ("group", "author_bucket", "n", "gmncs", "ci_low", "ci_high")


class AnalysisError(ValueError):
    """The dataset cannot support the requested analysis."""


@dataclass(frozen=True)
class CollaborationProfile:
    """How one article was produced.

    ``author_bucket`` is the author count when it lies in 1..10 and
    ``None`` beyond that. ``country_status`` is ``domestic`` for exactly
    one recorded country, ``international`` for two or more, ``unknown``
    for none.
    """

    author_bucket: int | None
    country_status: str
    countries: tuple[str, ...]

    @property
    def country(self) -> str | None:
        """The single country of a domestic article, else ``None``."""
        return self.countries[0] if self.country_status == DOMESTIC else None


def classify(record: ArticleRecord) -> CollaborationProfile:
    """Derive the collaboration profile of a record."""
    n_countries = len(record.countries)
    if n_countries == 0:
        status = UNKNOWN
    elif n_countries == 1:
        status = DOMESTIC
    else:
        status = INTERNATIONAL
    bucket = record.author_count if 1 <= record.author_count <= MAX_BUCKET else None
    return CollaborationProfile(
        author_bucket=bucket, country_status=status, countries=record.countries
    )


@dataclass(frozen=True)
class GroupingSpec:
    """Which groups to form and how to summarize them.

    ``countries`` selects the per-country groups (codes are uppercased).
    By default a country group holds only domestic articles from that
    country; with ``domestic_only=False`` it holds every article listing
    the country. The pooled ``All`` group takes every scored observation,
    including international and unknown-country ones, unless the
    corresponding ``include_*`` switch turns them off.

    ``min_n`` is the smallest group size that gets a confidence interval
    (never below 2, since a single observation has no spread estimate).
    With ``per_article=True`` each article's scores are first averaged
    across its categories, so the pooled samples hold one value per
    article instead of one per assignment.
    """

    countries: tuple[str, ...] = ()
    include_all: bool = True
    domestic_only: bool = True
    include_international: bool = True
    include_unknown: bool = True
    bucket_min: int = 1
    bucket_max: int = MAX_BUCKET
    overflow_bucket: bool = False
    level: float = 0.95
    min_n: int = 2
    per_article: bool = False

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValueError("confidence level must lie strictly between 0 and 1")
        if not 1 <= self.bucket_min <= self.bucket_max <= MAX_BUCKET:
            raise ValueError(f"bucket range must lie within [1, {MAX_BUCKET}]")
        if self.min_n < 1:
            raise ValueError("min_n must be >= 1")
        object.__setattr__(
            self, "countries", tuple(c.upper() for c in self.countries)
        )


@dataclass(frozen=True)
class GroupSummary:
    """Point estimate and interval for one (group, author bucket) pool."""

    group: str
    author_bucket: int | str
    n: int
    gmncs: float
    ci_low: float | None
    ci_high: float | None
    level: float | None = None


@dataclass
class AnalysisTable:
    """All (group, bucket) rows for one chart, plus bookkeeping."""

    rows: list[GroupSummary]
    excluded_degenerate: int
    level: float


def _memberships(profile: CollaborationProfile, spec: GroupingSpec) -> list[str]:
    groups: list[str] = []
    if spec.include_all:
        status = profile.country_status
        if (
            status == DOMESTIC
            or (status == INTERNATIONAL and spec.include_international)
            or (status == UNKNOWN and spec.include_unknown)
        ):
            groups.append(ALL_GROUP)
    if spec.countries:
        if spec.domestic_only:
            if profile.country_status == DOMESTIC and profile.country in spec.countries:
                groups.append(profile.country)
        else:
            groups.extend(c for c in profile.countries if c in spec.countries)
    return groups


def _bucket_sort_key(bucket: int | str) -> tuple[int, int]:
    return (0, bucket) if isinstance(bucket, int) else (1, 0)


def _average_per_article(
    observations: Sequence[NormalizedObservation],
) -> list[NormalizedObservation]:
    by_article: dict[str, list[NormalizedObservation]] = defaultdict(list)
    for obs in observations:
        by_article[obs.article_id].append(obs)
    merged: list[NormalizedObservation] = []
    for article_id, group in by_article.items():
        merged.append(
            NormalizedObservation(
                article_id=article_id,
                key=group[0].key,
                raw_citations=group[0].raw_citations,
                score_arith=None,
                score_geo=sum(o.score_geo for o in group) / len(group),
            )
        )
    return merged


def group_gmncs(
    observations: Iterable[NormalizedObservation],
    profiles: Mapping[str, CollaborationProfile],
    spec: GroupingSpec | None = None,
) -> list[GroupSummary]:
    """Pool scored observations per (group, author bucket) and summarize.

    Observations without a geometric score (degenerate cells) are
    skipped. Empty groups are simply absent from the output. Rows are
    ordered by group label, then bucket (overflow last).
    """
    spec = spec or GroupingSpec()
    scored = [o for o in observations if o.score_geo is not None]
    if spec.per_article:
        scored = _average_per_article(scored)
    pools: dict[tuple[str, int | str], list[float]] = defaultdict(list)
    for obs in scored:
        profile = profiles[obs.article_id]
        if profile.author_bucket is None:
            if not spec.overflow_bucket:
                continue
            bucket: int | str = OVERFLOW_BUCKET
        else:
            if not spec.bucket_min <= profile.author_bucket <= spec.bucket_max:
                continue
            bucket = profile.author_bucket
        for group in _memberships(profile, spec):
            pools[(group, bucket)].append(obs.score_geo)

    ci_floor = max(2, spec.min_n)
    rows: list[GroupSummary] = []
    for (group, bucket), values in sorted(
        pools.items(), key=lambda item: (item[0][0], _bucket_sort_key(item[0][1]))
    ):
        if len(values) >= ci_floor:
            est = stats.geometric_mean_ci(values, spec.level)
            rows.append(
                GroupSummary(group, bucket, len(values), est.center, est.low, est.high, spec.level)
            )
        else:
            rows.append(
                GroupSummary(
                    group, bucket, len(values), stats.geometric_mean(values), None, None, spec.level
                )
            )
    return rows


def analyze_dataset(
    records: Sequence[ArticleRecord], spec: GroupingSpec | None = None
) -> AnalysisTable:
    """Full pipeline: baselines, scores, profiles, grouped summaries.

    Raises :class:`AnalysisError` when no cell has a positive baseline
    (empty dataset or all citation counts zero).
    """
    spec = spec or GroupingSpec()
    records = list(records)
    baselines = compute_baselines(records)
    degenerate = [key for key, base in baselines.items() if base.geo_mean == 0.0]
    if len(degenerate) == len(baselines):
        raise AnalysisError("no usable baseline")
    if degenerate:
        logger.warning(
            "%d degenerate cell(s) excluded from grouping (all-zero citations)",
            len(degenerate),
        )
    observations = normalize_dataset(records, baselines)
    profiles = {rec.id: classify(rec) for rec in records}
    rows = group_gmncs(observations, profiles, spec)
    excluded = sum(1 for obs in observations if obs.score_geo is None)
    return AnalysisTable(rows=rows, excluded_degenerate=excluded, level=spec.level)


def _format_bound(value: float | None) -> str:
    return "" if value is None else repr(value)


def write_analysis_csv(table: AnalysisTable | Sequence[GroupSummary], dest) -> None:
    """Write rows as ``group,author_bucket,n,gmncs,ci_low,ci_high``.

    Absent interval bounds become empty fields.
    """
    rows = table.rows if isinstance(table, AnalysisTable) else table
    stream, owned = _open_text(dest, "w")
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(ANALYSIS_CSV_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.group,
                    row.author_bucket,
                    row.n,
                    repr(row.gmncs),
                    _format_bound(row.ci_low),
                    _format_bound(row.ci_high),
                ]
            )
        stream.flush()
    finally:
        if owned:
            stream.close()


def read_analysis_csv(source) -> list[GroupSummary]:
    """Read rows written by :func:`write_analysis_csv`.

    The confidence level is not part of the file format, so it comes back
    as ``None``.
    """
    stream, owned = _open_text(source)
    try:
        reader = csv.reader(stream)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != ANALYSIS_CSV_HEADER:
            raise IngestError(
                "analysis CSV header must be exactly " + ",".join(ANALYSIS_CSV_HEADER)
            )
        rows: list[GroupSummary] = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(ANALYSIS_CSV_HEADER):
                raise IngestError(
                    f"analysis CSV line {reader.line_num}: expected "
                    f"{len(ANALYSIS_CSV_HEADER)} columns, got {len(row)}"
                )
            try:
                bucket: int | str = row[1] if row[1] == OVERFLOW_BUCKET else int(row[1])
                rows.append(
                    GroupSummary(
                        group=row[0],
                        author_bucket=bucket,
                        n=int(row[2]),
                        gmncs=float(row[3]),
                        ci_low=float(row[4]) if row[4] else None,
                        ci_high=float(row[5]) if row[5] else None,
                    )
                )
            except ValueError as exc:
                raise IngestError(f"analysis CSV line {reader.line_num}: {exc}") from None
        return rows
    finally:
        if owned:
            stream.close()
