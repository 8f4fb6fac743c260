"""Reading, validating and writing bibliographic article datasets.

Two line-oriented formats are supported:

* ``jsonl``: one object per line with exactly the keys
  ``id, year, categories, citations, author_count, countries``.
* ``csv``: header ``id,year,categories,citations,author_count,countries``;
  the ``categories`` and ``countries`` cells hold ``;``-separated tokens,
  an empty cell meaning an empty sequence.

Parsing is streaming and single-pass. A malformed line never aborts the
parse; it is reported as a :class:`RecordError` carrying the line number,
so ``len(records) + len(errors)`` equals the number of (non-blank) data
lines. Only an unreadable or undecodable source is fatal.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

__all__ = [
    "ArticleRecord",
    "RecordError",
    "DatasetReport",
    "IngestError",
    "parse_dataset",
    "write_dataset",
    "validate_dataset",
]

CSV_HEADER = ("id", "year", "categories", "citations", "author_count", "countries")
_JSON_FIELDS = frozenset(CSV_HEADER)


class IngestError(Exception):
    """Fatal ingestion problem: unreadable source, bad header, unknown format."""


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True)
class ArticleRecord:
    """One journal article.

    ``countries`` is normalized on construction: codes are uppercased and
    deduplicated (first occurrence wins). An empty country list means the
    affiliation countries are unknown; such records still feed baselines.
    """

    id: str
    year: int
    categories: tuple[str, ...]
    citations: int
    author_count: int
    countries: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("id must be a non-empty string")
        if not _is_int(self.year):
            raise ValueError("year must be an integer")
        cats = tuple(self.categories)
        if not cats or any(not isinstance(c, str) or not c for c in cats):
            raise ValueError("categories must be a non-empty sequence of non-empty strings")
        if not _is_int(self.citations):
            raise ValueError("citations must be an integer")
        if self.citations < 0:
            raise ValueError("citations must be >= 0")
        if not _is_int(self.author_count):
            raise ValueError("author_count must be an integer")
        if self.author_count < 1:
            raise ValueError("author_count must be >= 1")
        seen: dict[str, None] = {}
        for code in self.countries:
            if not isinstance(code, str) or not code:
                raise ValueError("countries must be a sequence of non-empty strings")
            seen.setdefault(code.upper(), None)
        object.__setattr__(self, "categories", cats)
        object.__setattr__(self, "countries", tuple(seen))


@dataclass(frozen=True)
class RecordError:
    """A rejected input line: 1-based line number plus the reason."""

    line: int
    reason: str


@dataclass
class DatasetReport:
    """Summary produced by :func:`validate_dataset`."""

    n_records: int
    duplicate_ids: tuple[str, ...]
    year_range: tuple[int, int] | None
    category_counts: dict[str, int]
    unknown_country_count: int
    warnings: tuple[str, ...] = field(default_factory=tuple)


def _resolve_format(source, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("jsonl", "csv"):
            raise IngestError(f"unknown format {fmt!r} (expected 'jsonl' or 'csv')")
        return fmt
    name = None
    if isinstance(source, (str, Path)):
        name = str(source)
    else:
        name = getattr(source, "name", None)
    if isinstance(name, str):
        suffix = Path(name).suffix.lower()
        if suffix in (".jsonl", ".ndjson"):
            return "jsonl"
        if suffix == ".csv":
            return "csv"
    raise IngestError("cannot determine format; pass fmt='jsonl' or 'csv'")


def _open_text(source, mode: str = "r") -> tuple[IO[str], bool]:
    """Return a text stream and whether the caller owns (must close) it."""
    if isinstance(source, (str, Path)):
        try:
            return open(source, mode, encoding="utf-8", newline=""), True
        except OSError as exc:
            raise IngestError(f"cannot open {source}: {exc.strerror or exc}") from exc
    if isinstance(source, io.TextIOBase):
        return source, False
    # binary stream: wrap without closing the underlying buffer on GC
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), False


def parse_dataset(
    source, fmt: str | None = None
) -> tuple[list[ArticleRecord], list[RecordError]]:
    """Parse a dataset from a path or stream.

    ``fmt`` may be omitted when the source name carries a ``.jsonl``,
    ``.ndjson`` or ``.csv`` extension. Returns the well-formed records in
    input order together with the per-line errors; blank lines are
    skipped and counted as neither.
    """
    resolved = _resolve_format(source, fmt)
    stream, owned = _open_text(source)
    records: list[ArticleRecord] = []
    errors: list[RecordError] = []
    try:
        if resolved == "jsonl":
            _parse_jsonl(stream, records, errors)
        else:
            _parse_csv(stream, records, errors)
    except UnicodeDecodeError as exc:
        raise IngestError(f"source is not valid UTF-8: {exc}") from exc
    finally:
        if owned:
            stream.close()
    return records, errors


def _parse_jsonl(stream: IO[str], records, errors) -> None:
    for lineno, line in enumerate(stream, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            errors.append(RecordError(lineno, f"invalid JSON: {exc.msg}"))
            continue
        try:
            records.append(_record_from_json(raw))
        except ValueError as exc:
            errors.append(RecordError(lineno, str(exc)))


def _record_from_json(raw) -> ArticleRecord:
    if not isinstance(raw, dict):
        raise ValueError("line must be a JSON object")
    missing = _JSON_FIELDS - raw.keys()
    if missing:
        raise ValueError(f"missing field {sorted(missing)[0]!r}")
    extra = raw.keys() - _JSON_FIELDS
    if extra:
        raise ValueError(f"unexpected field {sorted(extra)[0]!r}")
    for key in ("categories", "countries"):
        if not isinstance(raw[key], list):
            raise ValueError(f"{key} must be an array")
    return ArticleRecord(
        id=raw["id"],
        year=raw["year"],
        categories=tuple(raw["categories"]),
        citations=raw["citations"],
        author_count=raw["author_count"],
        countries=tuple(raw["countries"]),
    )


def _parse_csv(stream: IO[str], records, errors) -> None:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("CSV source is empty (missing header)") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise IngestError(
            "CSV header must be exactly " + ",".join(CSV_HEADER)
        )
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        lineno = reader.line_num
        if len(row) != len(CSV_HEADER):
            errors.append(
                RecordError(lineno, f"expected {len(CSV_HEADER)} columns, got {len(row)}")
            )
            continue
        try:
            records.append(_record_from_csv_row(row))
        except ValueError as exc:
            errors.append(RecordError(lineno, str(exc)))


def _parse_int(cell: str, name: str) -> int:
    try:
        return int(cell.strip())
    except ValueError:
        raise ValueError(f"{name} must be an integer") from None


def _split_tokens(cell: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in cell.split(";") if tok.strip())


def _record_from_csv_row(row: Sequence[str]) -> ArticleRecord:
    return ArticleRecord(
        id=row[0].strip(),
        year=_parse_int(row[1], "year"),
        categories=_split_tokens(row[2]),
        citations=_parse_int(row[3], "citations"),
        author_count=_parse_int(row[4], "author_count"),
        countries=_split_tokens(row[5]),
    )


def write_dataset(records: Iterable[ArticleRecord], dest, fmt: str | None = None) -> None:
    """Serialize records to ``dest`` (path or text stream).

    Output is bit-stable and round-trips: parsing it back reproduces the
    records exactly.
    """
    resolved = _resolve_format(dest, fmt)
    stream, owned = _open_text(dest, "w")
    try:
        if resolved == "jsonl":
            for rec in records:
                stream.write(
                    json.dumps(
                        {
                            "id": rec.id,
                            "year": rec.year,
                            "categories": list(rec.categories),
                            "citations": rec.citations,
                            "author_count": rec.author_count,
                            "countries": list(rec.countries),
                        },
                        ensure_ascii=False,
                    )
                )
                stream.write("\n")
        else:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for rec in records:
                writer.writerow(
                    [
                        rec.id,
                        rec.year,
                        ";".join(rec.categories),
                        rec.citations,
                        rec.author_count,
                        ";".join(rec.countries),
                    ]
                )
        stream.flush()
    finally:
        if owned:
            stream.close()


def validate_dataset(records: Sequence[ArticleRecord]) -> DatasetReport:
    """Summarize a parsed dataset: duplicates, year span, category and
    unknown-country tallies. Never raises; the caller decides whether any
    reported problem (duplicate ids, emptiness) is fatal."""
    id_counts = Counter(rec.id for rec in records)
    duplicates = tuple(sorted(i for i, n in id_counts.items() if n > 1))
    years = [rec.year for rec in records]
    category_counts: Counter[str] = Counter()
    for rec in records:
        category_counts.update(rec.categories)
    warnings: list[str] = []
    if not records:
        warnings.append("dataset is empty")
    if duplicates:
        warnings.append(f"{len(duplicates)} duplicate id(s)")
    return DatasetReport(
        n_records=len(records),
        duplicate_ids=duplicates,
        year_range=(min(years), max(years)) if years else None,
        category_counts=dict(sorted(category_counts.items())),
        unknown_country_count=sum(1 for rec in records if not rec.countries),
        warnings=tuple(warnings),
    )
