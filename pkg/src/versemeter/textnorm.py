"""Arabic verse text model: parsing, cleaning, and mark factoring.

A verse is a sequence of letters, each carrying at most one mark, plus
word separators.  Raw Unicode is messy (marks are standalone codepoints,
orderings vary, anomalies like doubled harakah occur in scraped poetry),
so `parse` normalizes everything into that model.  The composite marks
shaddah and tanween are shorthand for two-letter pronunciations and are
expanded by the `factor_*` functions before any scansion or encoding.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, replace
from enum import Enum

# The 36 base letters: 28 primary consonants plus the 8 derived forms
# (hamza and its seats, alef madda, teh marbuta, alef maksura).  The two
# codepoint ranges below cover exactly these and nothing else.
_LETTER_RANGES = ((0x0621, 0x063A), (0x0641, 0x064A))
LETTERS: tuple[str, ...] = tuple(
    chr(cp) for lo, hi in _LETTER_RANGES for cp in range(lo, hi + 1)
)
LETTER_SET = frozenset(LETTERS)

#: Word separator pseudo-letter.  Never carries a mark.
SEPARATOR = " "

NOON = "ن"  # ن, the phantom letter pronounced by tanween
_TATWEEL = "ـ"  # kashida: pure text decoration, always dropped
_SHADDAH_CP = "ّ"


class Diacritic(Enum):
    """The four primitive marks left after factoring."""

    FATHA = "َ"
    DAMMA = "ُ"
    KASRA = "ِ"
    SUKUN = "ْ"


#: The three vowel marks ("harakah"); SUKUN is the explicit no-vowel mark.
HARAKAH = (Diacritic.FATHA, Diacritic.DAMMA, Diacritic.KASRA)


class CompositeMark(Enum):
    """Surface-only shorthand marks; never present after factoring.

    Shaddah doubles its letter (first copy sukun, second copy the fused
    harakah); tanween appends a sukun-ed noon after its harakah.
    """

    SHADDAH_FATHA = _SHADDAH_CP + "َ"
    SHADDAH_DAMMA = _SHADDAH_CP + "ُ"
    SHADDAH_KASRA = _SHADDAH_CP + "ِ"
    TANWEEN_FATH = "ً"
    TANWEEN_DAMM = "ٌ"
    TANWEEN_KASR = "ٍ"


Mark = Diacritic | CompositeMark

_SHADDAH_TO_HARAKAH = {
    CompositeMark.SHADDAH_FATHA: Diacritic.FATHA,
    CompositeMark.SHADDAH_DAMMA: Diacritic.DAMMA,
    CompositeMark.SHADDAH_KASRA: Diacritic.KASRA,
}
_TANWEEN_TO_HARAKAH = {
    CompositeMark.TANWEEN_FATH: Diacritic.FATHA,
    CompositeMark.TANWEEN_DAMM: Diacritic.DAMMA,
    CompositeMark.TANWEEN_KASR: Diacritic.KASRA,
}

_DIACRITIC_BY_CP = {d.value: d for d in Diacritic}
_TANWEEN_BY_CP = {m.value: m for m in _TANWEEN_TO_HARAKAH}
_MARK_CPS = frozenset(_DIACRITIC_BY_CP) | frozenset(_TANWEEN_BY_CP) | {_SHADDAH_CP}


class TextNormError(ValueError):
    """Base class for verse parsing failures."""


class UnknownCodepoint(TextNormError):
    def __init__(self, position: int, codepoint: str):
        self.position = position
        self.codepoint = codepoint
        super().__init__(
            f"unmappable codepoint U+{ord(codepoint):04X} at position {position}"
        )


class OrphanDiacritic(TextNormError):
    def __init__(self, position: int):
        self.position = position
        super().__init__(f"diacritic with no preceding letter at position {position}")


@dataclass(frozen=True)
class DiacritizedChar:
    """One base letter (or separator) with at most one mark."""

    letter: str
    mark: Mark | None = None

    def __post_init__(self):
        if self.letter == SEPARATOR:
            if self.mark is not None:
                raise TextNormError("a word separator cannot carry a mark")
        elif self.letter not in LETTER_SET:
            raise TextNormError(f"not a base letter: {self.letter!r}")

    @property
    def is_separator(self) -> bool:
        return self.letter == SEPARATOR

    def text(self) -> str:
        if self.is_separator:
            return SEPARATOR
        return self.letter + (self.mark.value if self.mark else "")


SEP_CHAR = DiacritizedChar(SEPARATOR)


@dataclass(frozen=True)
class Verse:
    """A parsed verse plus its optional corpus metadata."""

    chars: tuple[DiacritizedChar, ...] = ()
    label: str | None = None
    poet: str | None = None
    age: str | None = None

    def __len__(self) -> int:
        return len(self.chars)

    def __iter__(self):
        return iter(self.chars)

    def text(self) -> str:
        """UTF-8/NFC serialization; round-trips through `parse`."""
        return unicodedata.normalize("NFC", "".join(c.text() for c in self.chars))

    def has_composite_marks(self) -> bool:
        return any(isinstance(c.mark, CompositeMark) for c in self.chars)


def _resolve_marks(raw_marks: list[str]) -> Mark | None:
    """Collapse the raw mark codepoints seen on one letter into one Mark.

    Unicode normalization may order shaddah before or after its harakah,
    so marks are gathered first and fused here.  Anomalies are cleaned:
    duplicate vowel marks keep the first, and a shaddah that is not
    completed by a harakah is dropped (shaddah must fuse with a harakah;
    anything else has no place in the data model).
    """
    shaddah = _SHADDAH_CP in raw_marks
    vowels = [cp for cp in raw_marks if cp != _SHADDAH_CP]
    first = vowels[0] if vowels else None
    if first is None:
        return None  # bare shaddah (if any) dropped
    if first in _TANWEEN_BY_CP:
        return _TANWEEN_BY_CP[first]
    diacritic = _DIACRITIC_BY_CP[first]
    if shaddah and diacritic in HARAKAH:
        return CompositeMark(_SHADDAH_CP + first)
    return diacritic


def parse(raw: str, policy: str = "skip") -> Verse:
    """Parse raw Unicode text into a cleaned verse.

    policy: "skip" drops unmappable codepoints and orphan marks;
    "strict" raises UnknownCodepoint / OrphanDiacritic instead.
    Whitespace runs collapse to a single separator and tatweel is always
    dropped.  The result satisfies the Verse invariants (see `clean`).
    """
    if policy not in ("skip", "strict"):
        raise ValueError(f"unknown parse policy: {policy!r}")
    strict = policy == "strict"
    text = unicodedata.normalize("NFC", raw)

    # working entries: [letter, [raw mark codepoints]] or None for a separator
    entries: list[list | None] = []
    current: list | None = None
    for pos, ch in enumerate(text):
        if ch in LETTER_SET:
            current = [ch, []]
            entries.append(current)
        elif ch.isspace():
            current = None
            entries.append(None)
        elif ch == _TATWEEL:
            continue
        elif ch in _MARK_CPS:
            if current is None:
                if strict:
                    raise OrphanDiacritic(pos)
                continue
            current[1].append(ch)
        else:
            if strict:
                raise UnknownCodepoint(pos, ch)
            continue

    chars = [
        SEP_CHAR if e is None else DiacritizedChar(e[0], _resolve_marks(e[1]))
        for e in entries
    ]
    return clean(Verse(tuple(chars)))


def clean(verse: Verse) -> Verse:
    """Re-establish the verse invariants; idempotent.

    Drops leading/trailing separators and collapses separator runs.  The
    surface anomalies named by the corpus cleaning rules (doubled
    harakah, orphan marks, non-alphabetic glyphs) cannot be represented
    in a Verse and are resolved during `parse`.
    """
    out: list[DiacritizedChar] = []
    for c in verse.chars:
        if c.is_separator and (not out or out[-1].is_separator):
            continue
        out.append(c)
    while out and out[-1].is_separator:
        out.pop()
    return replace(verse, chars=tuple(out))


def factor_shaddah(verse: Verse) -> Verse:
    """Expand every shaddah mark: (L, shaddah+H) -> (L, sukun), (L, H)."""
    out: list[DiacritizedChar] = []
    for c in verse.chars:
        if c.mark in _SHADDAH_TO_HARAKAH:
            out.append(DiacritizedChar(c.letter, Diacritic.SUKUN))
            out.append(DiacritizedChar(c.letter, _SHADDAH_TO_HARAKAH[c.mark]))
        else:
            out.append(c)
    return replace(verse, chars=tuple(out))


def factor_tanween(verse: Verse) -> Verse:
    """Expand every tanween mark: (L, tanween-H) -> (L, H), (noon, sukun)."""
    out: list[DiacritizedChar] = []
    for c in verse.chars:
        if c.mark in _TANWEEN_TO_HARAKAH:
            out.append(DiacritizedChar(c.letter, _TANWEEN_TO_HARAKAH[c.mark]))
            out.append(DiacritizedChar(NOON, Diacritic.SUKUN))
        else:
            out.append(c)
    return replace(verse, chars=tuple(out))


def strip_diacritics(verse: Verse) -> Verse:
    """Remove every mark; letters and separators are unchanged."""
    return replace(
        verse,
        chars=tuple(
            c if c.mark is None else DiacritizedChar(c.letter) for c in verse.chars
        ),
    )


def canonicalize(raw: str, policy: str = "skip") -> Verse:
    """Full ingestion pipeline: parse, clean, factor shaddah and tanween.

    The result contains only the four primitive marks (or none) and is
    what the encoders and the scansion engine consume.
    """
    return factor_tanween(factor_shaddah(parse(raw, policy)))
