"""Three-variant measurement of word-order and word-structure information.

For each book and replicate, one verse permutation is drawn and applied
to all three variants so comparisons are paired: the original variant is
the verse-shuffled text itself, the order variant additionally permutes
tokens, and the structure variant masks word internals (then carries the
same verse permutation). The two penalties are

    d_order     = h(order variant)     - h(original variant)
    d_structure = h(structure variant) - h(original variant)

in bits per character: the description-length cost of having destroyed
that dimension of regularity. Replicates vary only the derived seeds.
Estimation noise can push a penalty slightly below zero on short books;
values are reported as computed, with a warning.
"""

from __future__ import annotations

import csv
import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .corpus import Book, flatten
from .entropy import entropy_rate, match_lengths
from .transforms import (
    SeedSpec,
    build_mask_table,
    derive_seed,
    destroy_word_order,
    mask_word_structure,
    shuffle_verses,
)

logger = logging.getLogger(__name__)

GROUP_KEYS = ("translation", "language")

#: Fixed column order of the results table.
RESULT_COLUMNS = (
    "translation_id",
    "language",
    "book_id",
    "replicate",
    "N",
    "h_original",
    "h_order",
    "h_structure",
    "d_order",
    "d_structure",
)


def format_float(x: float) -> str:
    """Serialize with 6 significant digits (round-half-even)."""
    return format(x, ".6g")


@dataclass(frozen=True)
class MeasureConfig:
    master_seed: int = 0
    replicates: int = 3
    order_scope: str = "per_verse"
    verse_shuffle: bool = True

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")


@dataclass(frozen=True)
class BookMeasurement:
    """One replicate's entropy estimates and penalties for one book."""

    translation_id: str
    language: str
    book_id: int
    replicate: int
    n_chars: int
    h_original: float
    h_order: float
    h_structure: float
    d_order: float
    d_structure: float
    seeds: Mapping[str, int] = field(default_factory=dict)

    @property
    def has_negative_penalty(self) -> bool:
        return self.d_order < 0 or self.d_structure < 0

    def csv_row(self) -> list[str]:
        return [
            self.translation_id,
            self.language,
            str(self.book_id),
            str(self.replicate),
            str(self.n_chars),
            format_float(self.h_original),
            format_float(self.h_order),
            format_float(self.h_structure),
            format_float(self.d_order),
            format_float(self.d_structure),
        ]


@dataclass(frozen=True)
class AggregateMeasurement:
    """Per-group (translation or language) averages for one book."""

    group: str
    book_id: int
    mean_d_order: float
    mean_d_structure: float
    std_d_order: float | None
    std_d_structure: float | None
    count: int


def measure_replicate(book: Book, replicate: int, config: MeasureConfig) -> BookMeasurement:
    """Estimate all three variants of one book for one replicate."""
    seeds = {
        purpose: derive_seed(
            SeedSpec(
                master_seed=config.master_seed,
                translation_id=book.translation_id,
                book_id=book.book_id,
                replicate_index=replicate,
                purpose=purpose,
            )
        )
        for purpose in ("verse_shuffle", "order_shuffle", "mask_draw")
    }

    base = shuffle_verses(book, seeds["verse_shuffle"]) if config.verse_shuffle else book
    original = flatten(base)
    h_original = entropy_rate(match_lengths(original)).h_bpc

    order_variant = destroy_word_order(base, seeds["order_shuffle"], config.order_scope)
    h_order = entropy_rate(match_lengths(order_variant.sequence)).h_bpc

    table = build_mask_table(original.lexicon, original.alphabet, seeds["mask_draw"])
    masked_variant = mask_word_structure(base, table)
    h_structure = entropy_rate(match_lengths(masked_variant.sequence)).h_bpc

    result = BookMeasurement(
        translation_id=book.translation_id,
        language=book.language,
        book_id=book.book_id,
        replicate=replicate,
        n_chars=original.n,
        h_original=h_original,
        h_order=h_order,
        h_structure=h_structure,
        d_order=h_order - h_original,
        d_structure=h_structure - h_original,
        seeds=seeds,
    )
    if result.has_negative_penalty:
        logger.warning(
            "negative penalty for %s book %d replicate %d "
            "(d_order=%.4g, d_structure=%.4g): estimation noise at N=%d",
            book.translation_id,
            book.book_id,
            replicate,
            result.d_order,
            result.d_structure,
            result.n_chars,
        )
    return result


def measure_book(book: Book, config: MeasureConfig | None = None) -> list[BookMeasurement]:
    """Measure every replicate of one book."""
    config = config or MeasureConfig()
    return [measure_replicate(book, r, config) for r in range(config.replicates)]


def aggregate(
    measurements: Sequence[BookMeasurement], group_by: str = "language"
) -> list[AggregateMeasurement]:
    """Average penalties per group and book.

    Replicate variability is folded in first: replicates are averaged
    per translation, and for language grouping those translation means
    are then averaged (unweighted) per language. The reported standard
    deviation is the sample standard deviation over the group's units
    (replicates, respectively translations); it is absent for singleton
    groups.
    """
    if not measurements:
        raise ValueError("no measurements to aggregate")
    if group_by not in GROUP_KEYS:
        raise ValueError(f"unknown grouping {group_by!r}")

    per_translation: dict[tuple[str, int], dict] = {}
    for m in measurements:
        slot = per_translation.setdefault(
            (m.translation_id, m.book_id),
            {"language": m.language, "d_order": [], "d_structure": []},
        )
        slot["d_order"].append(m.d_order)
        slot["d_structure"].append(m.d_structure)

    def _stats(values: list[float]) -> tuple[float, float | None]:
        mean = statistics.fmean(values)
        std = statistics.stdev(values) if len(values) > 1 else None
        return mean, std

    if group_by == "translation":
        rows = []
        for (tid, book_id), slot in sorted(per_translation.items()):
            mo, so = _stats(slot["d_order"])
            ms, ss = _stats(slot["d_structure"])
            rows.append(
                AggregateMeasurement(
                    group=tid,
                    book_id=book_id,
                    mean_d_order=mo,
                    mean_d_structure=ms,
                    std_d_order=so,
                    std_d_structure=ss,
                    count=len(slot["d_order"]),
                )
            )
        return rows

    per_language: dict[tuple[str, int], dict] = {}
    for (tid, book_id), slot in sorted(per_translation.items()):
        lang_slot = per_language.setdefault(
            (slot["language"], book_id), {"d_order": [], "d_structure": []}
        )
        lang_slot["d_order"].append(statistics.fmean(slot["d_order"]))
        lang_slot["d_structure"].append(statistics.fmean(slot["d_structure"]))

    rows = []
    for (lang, book_id), slot in sorted(per_language.items()):
        mo, so = _stats(slot["d_order"])
        ms, ss = _stats(slot["d_structure"])
        rows.append(
            AggregateMeasurement(
                group=lang,
                book_id=book_id,
                mean_d_order=mo,
                mean_d_structure=ms,
                std_d_order=so,
                std_d_structure=ss,
                count=len(slot["d_order"]),
            )
        )
    return rows


def sort_measurements(measurements: Iterable[BookMeasurement]) -> list[BookMeasurement]:
    """Deterministic merge order, independent of execution schedule."""
    return sorted(
        measurements, key=lambda m: (m.translation_id, m.book_id, m.replicate)
    )


def write_results_csv(measurements: Sequence[BookMeasurement], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for m in sort_measurements(measurements):
        writer.writerow(m.csv_row())


def read_results_csv(source: str | Path | IO[str]) -> list[BookMeasurement]:
    """Read a results table back; raises ValueError on schema mismatch."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_results_csv(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(header) != RESULT_COLUMNS:
        raise ValueError(
            f"results CSV schema mismatch: expected columns {','.join(RESULT_COLUMNS)}"
        )
    rows = []
    for line_no, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(RESULT_COLUMNS):
            raise ValueError(f"results CSV row {line_no}: wrong field count")
        rows.append(
            BookMeasurement(
                translation_id=rec[0],
                language=rec[1],
                book_id=int(rec[2]),
                replicate=int(rec[3]),
                n_chars=int(rec[4]),
                h_original=float(rec[5]),
                h_order=float(rec[6]),
                h_structure=float(rec[7]),
                d_order=float(rec[8]),
                d_structure=float(rec[9]),
            )
        )
    return rows
