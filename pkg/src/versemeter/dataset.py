"""Labeled verse corpora: CSV loading, trimming, downsampling, diacritic
variants, and deterministic train/validation/test splits.

The CSV layout is `verse,meter,poet,age` (poet and age optional), one
row per verse, UTF-8.
"""

from __future__ import annotations

import csv
import random
from collections import Counter
from dataclasses import dataclass, replace

from . import textnorm
from .scansion import ENGLISH_FAMILIES, METER_NAMES

ARABIC = "arabic"
ENGLISH = "english"


class DatasetError(ValueError):
    pass


class FractionError(DatasetError):
    pass


class MalformedRow(DatasetError):
    def __init__(self, line: int, detail: str):
        self.line = line
        super().__init__(f"line {line}: {detail}")


class UnknownMeterLabel(DatasetError):
    def __init__(self, line: int, label: str):
        self.line = line
        self.label = label
        super().__init__(f"line {line}: unknown meter label {label!r}")


class KTooLarge(DatasetError):
    pass


class NotEnoughRecords(DatasetError):
    pass


def known_labels(language: str) -> tuple[str, ...]:
    if language == ARABIC:
        return METER_NAMES
    if language == ENGLISH:
        return ENGLISH_FAMILIES
    raise ValueError(f"unknown language: {language!r}")


@dataclass(frozen=True)
class Record:
    verse: str
    meter: str | None  # None only for unlabeled scan input
    poet: str | None = None
    age: str | None = None


@dataclass(frozen=True)
class Corpus:
    language: str
    records: tuple[Record, ...]

    def __len__(self) -> int:
        return len(self.records)

    @property
    def class_index(self) -> dict[str, int]:
        """Label -> record count; labels in canonical table order."""
        counts = Counter(r.meter for r in self.records)
        return {
            label: counts[label] for label in known_labels(self.language)
            if counts[label]
        }

    def stats(self) -> dict:
        return {
            "language": self.language,
            "total": len(self.records),
            "classes": self.class_index,
        }


def load_csv(path, language: str) -> Corpus:
    """Load a corpus file, validating labels against the language."""
    labels = set(known_labels(language))
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return Corpus(language, ())
        header = [h.strip() for h in header]
        if header[:2] != ["verse", "meter"]:
            raise MalformedRow(1, f"expected header verse,meter[,poet,age]; got {header}")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise MalformedRow(line, f"expected at least 2 fields, got {len(row)}")
            verse, meter = row[0], row[1] or None
            if meter is not None and meter not in labels:
                raise UnknownMeterLabel(line, meter)
            poet = row[2] if len(row) > 2 and row[2] else None
            age = row[3] if len(row) > 3 and row[3] else None
            records.append(Record(verse, meter, poet, age))
    return Corpus(language, tuple(records))


def save_csv(corpus: Corpus, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["verse", "meter", "poet", "age"])
        for r in corpus.records:
            writer.writerow([r.verse, r.meter, r.poet or "", r.age or ""])


def trim_smallest(corpus: Corpus, k: int) -> Corpus:
    """Drop all records of the k smallest classes (ties by label order)."""
    counts = corpus.class_index
    if k == 0:
        return corpus
    if k >= len(counts):
        raise KTooLarge(f"cannot trim {k} of {len(counts)} nonempty classes")
    smallest = {
        label
        for label, _ in sorted(counts.items(), key=lambda kv: (kv[1], kv[0]))[:k]
    }
    return replace(
        corpus,
        records=tuple(r for r in corpus.records if r.meter not in smallest),
    )


def downsample(corpus: Corpus, label: str, n: int, seed: int) -> Corpus:
    """Keep a uniform seeded sample of n records of one class."""
    member_idx = [i for i, r in enumerate(corpus.records) if r.meter == label]
    if n > len(member_idx):
        raise NotEnoughRecords(
            f"class {label!r} has {len(member_idx)} records, asked to keep {n}"
        )
    keep = set(random.Random(seed).sample(member_idx, n))
    return replace(
        corpus,
        records=tuple(
            r
            for i, r in enumerate(corpus.records)
            if r.meter != label or i in keep
        ),
    )


def make_variant(corpus: Corpus, diacritics: str) -> Corpus:
    """Diacritic variant: "keep" is identity, "strip" removes all marks.

    Stripping runs the full ingestion pipeline first (factoring shaddah
    and tanween), so geminated letters stay doubled and the tanween noon
    survives; only the marks themselves disappear.
    """
    if diacritics == "keep":
        return corpus
    if diacritics != "strip":
        raise ValueError("diacritics variant must be 'keep' or 'strip'")
    if corpus.language != ARABIC:
        raise ValueError("diacritic variants apply to Arabic corpora only")
    records = tuple(
        replace(
            r,
            verse=textnorm.strip_diacritics(textnorm.canonicalize(r.verse)).text(),
        )
        for r in corpus.records
    )
    return replace(corpus, records=records)


@dataclass(frozen=True)
class SplitCorpus:
    train: tuple[Record, ...]
    validation: tuple[Record, ...]
    test: tuple[Record, ...]
    seed: int


def split(
    corpus: Corpus,
    val_frac: float,
    test_frac: float,
    seed: int,
    stratified: bool = False,
) -> SplitCorpus:
    """Seeded shuffle then contiguous slicing into train/validation/test.

    Unstratified by default; stratified splits apply the same rule per
    class so tiny classes cannot vanish from a split.
    """
    if not (0.0 < val_frac < 1.0 and 0.0 < test_frac < 1.0):
        raise FractionError("fractions must be in (0, 1)")
    if val_frac + test_frac >= 1.0:
        raise FractionError("validation + test fractions must be < 1")

    rng = random.Random(seed)

    def slice_group(indices):
        indices = list(indices)
        rng.shuffle(indices)
        n = len(indices)
        nv = int(n * val_frac)
        nt = int(n * test_frac)
        cut_val = n - nv - nt
        return indices[:cut_val], indices[cut_val : cut_val + nv], indices[cut_val + nv :]

    if stratified:
        train_i, val_i, test_i = [], [], []
        by_label: dict[str, list[int]] = {}
        for i, r in enumerate(corpus.records):
            by_label.setdefault(r.meter, []).append(i)
        for label in known_labels(corpus.language):
            if label not in by_label:
                continue
            tr, va, te = slice_group(by_label[label])
            train_i += tr
            val_i += va
            test_i += te
    else:
        train_i, val_i, test_i = slice_group(range(len(corpus.records)))

    pick = lambda idx: tuple(corpus.records[i] for i in idx)
    return SplitCorpus(pick(train_i), pick(val_i), pick(test_i), seed)
