"""Foot and meter tables, verse scansion, and the rule-based classifier.

A scansion pattern is an ASCII string over '/' (vowel, i.e. a letter
carrying harakah) and '0' (consonant: sukun or a bare mad letter), in
pronunciation order (left to right).  Classical Arabic sources print
these right-to-left; `display` can render that form.

Also contains a synthetic verse generator that inverts the scansion
rules to mint labeled data for training and oracle tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .textnorm import (
    HARAKAH,
    LETTERS,
    SEP_CHAR,
    CompositeMark,
    Diacritic,
    DiacritizedChar,
    Verse,
)

VOWEL = "/"
CONSONANT = "0"

STRESSED = "/"
UNSTRESSED = "×"  # ×

#: Bare mad letters lengthen the preceding vowel and scan as '0'.
MAD_LETTERS = frozenset(("ا", "و", "ى"))  # ا و ى

ARABIC = "arabic"
ENGLISH = "english"


class ScansionError(ValueError):
    pass


class UnknownFoot(ScansionError):
    pass


class UnknownMeter(ScansionError):
    pass


class MissingDiacritic(ScansionError):
    def __init__(self, position: int, letter: str):
        self.position = position
        self.letter = letter
        super().__init__(
            f"letter {letter!r} at position {position} carries no diacritic"
        )


@dataclass(frozen=True)
class Foot:
    name: str
    text: str  # Arabic mnemonic (fully diacritized) or the English foot name
    pattern: str
    language: str


def _foot(name, text, pattern):
    return Foot(name, text, pattern, ARABIC)


# The eight classical Arabic feet.  Pattern strings are pronunciation
# order; classical tables print them reversed.
ARABIC_FEET: tuple[Foot, ...] = (
    _foot("fa'ulun", "فَعُوْلُنْ", "//0/0"),
    _foot("fa'ilun", "فَاْعِلُنْ", "/0//0"),
    _foot("mustaf'ilun", "مُسْتَفْعِلُنْ", "/0/0//0"),
    _foot("mafa'eelun", "مَفَاْعِيْلُنْ", "//0/0/0"),
    _foot("maf'ulatu", "مَفْعُوْلَاْتُ", "/0/0/0/"),
    _foot("fa'ilatun", "فَاْعِلَاْتُنْ", "/0//0/0"),
    _foot("mufa'alatun", "مُفَاْعَلَتُنْ", "//0///0"),
    _foot("mutafa'ilun", "مُتَفَاْعِلُنْ", "///0//0"),
)

# al-Taweel closes on a shortened mafa'eelun; the classical table writes
# it as its own mnemonic, so it lives outside the table of eight.
_TAWEEL_TAIL = _foot("mafa'ilun", "مَفَاْعِلُنْ", "//0//0")

ENGLISH_FEET: tuple[Foot, ...] = tuple(
    Foot(name, name, pattern, ENGLISH)
    for name, pattern in (
        ("Iamb", "×/"),
        ("Trochee", "/×"),
        ("Dactyl", "/××"),
        ("Anapest", "××/"),
        ("Pyrrhic", "××"),
        ("Amphibrach", "×/×"),
        ("Spondee", "//"),
    )
)

_FEET_BY_NAME: dict[str, Foot] = {}
for f in ARABIC_FEET + (_TAWEEL_TAIL,) + ENGLISH_FEET:
    _FEET_BY_NAME[f.name] = f
    _FEET_BY_NAME[f.text] = f


@dataclass(frozen=True)
class Meter:
    name: str
    feet: tuple[Foot, ...]

    @property
    def pattern(self) -> str:
        return "".join(f.pattern for f in self.feet)


def _meter(name, *feet_names):
    return Meter(name, tuple(_FEET_BY_NAME[n] for n in feet_names))


# The sixteen classical meters, in table order (the classifier's
# tie-break order).  Feet are listed in pronunciation order.
ARABIC_METERS: tuple[Meter, ...] = (
    _meter("al-Taweel", "fa'ulun", "mafa'eelun", "fa'ulun", "mafa'ilun"),
    _meter("al-Kamel", "mutafa'ilun", "mutafa'ilun", "mutafa'ilun"),
    _meter("al-Baseet", "mustaf'ilun", "fa'ilun", "mustaf'ilun", "fa'ilun"),
    _meter("al-Khafeef", "fa'ilatun", "mustaf'ilun", "fa'ilatun"),
    _meter("al-Wafeer", "mufa'alatun", "mufa'alatun", "fa'ulun"),
    _meter("al-Rigz", "mustaf'ilun", "mustaf'ilun", "mustaf'ilun"),
    _meter("al-Raml", "fa'ilatun", "fa'ilatun", "fa'ilatun"),
    _meter("al-Motakarib", "fa'ulun", "fa'ulun", "fa'ulun", "fa'ulun"),
    _meter("al-Sar'e", "mustaf'ilun", "mustaf'ilun", "maf'ulatu"),
    _meter("al-Monsareh", "mustaf'ilun", "maf'ulatu", "mustaf'ilun"),
    _meter("al-Mogtath", "mustaf'ilun", "fa'ilatun", "fa'ilatun"),
    _meter("al-Madeed", "fa'ilatun", "fa'ilun", "fa'ilatun"),
    _meter("al-Hazg", "mafa'eelun", "mafa'eelun"),
    _meter("al-Motadarik", "fa'ilun", "fa'ilun", "fa'ilun", "fa'ilun"),
    _meter("al-Moktadib", "maf'ulatu", "mustaf'ilun", "mustaf'ilun"),
    _meter("al-Modar'e", "mafa'eelun", "fa'ilatun", "fa'ilatun"),
)

METER_NAMES: tuple[str, ...] = tuple(m.name for m in ARABIC_METERS)
_METERS_BY_NAME = {m.name: m for m in ARABIC_METERS}

# English classification families: the four feet that label the corpus.
ENGLISH_FAMILIES: tuple[str, ...] = ("Iambic", "Trochee", "Dactyl", "Anapaestic")
_FAMILY_FEET: tuple[tuple[str, Foot], ...] = (
    ("Iambic", _FEET_BY_NAME["Iamb"]),
    ("Trochee", _FEET_BY_NAME["Trochee"]),
    ("Dactyl", _FEET_BY_NAME["Dactyl"]),
    ("Anapaestic", _FEET_BY_NAME["Anapest"]),
)
MAX_REPETITIONS = 8  # monometer .. octameter


def foot_pattern(name: str) -> str:
    """Pattern of a foot, looked up by transliterated name or mnemonic."""
    try:
        return _FEET_BY_NAME[name].pattern
    except KeyError:
        raise UnknownFoot(f"unknown foot: {name!r}")


def meter_pattern(name: str) -> str:
    """Full pattern of one shatr of an Arabic meter."""
    try:
        return _METERS_BY_NAME[name].pattern
    except KeyError:
        raise UnknownMeter(f"unknown meter: {name!r}")


def display(pattern: str, rtl: bool = False) -> str:
    """Render a pattern, optionally in the classical right-to-left form."""
    return pattern[::-1] if rtl else pattern


def to_pattern(verse: Verse) -> str:
    """Scan a fully diacritized, factored verse into its pattern.

    harakah -> '/', sukun -> '0', bare mad letter -> '0'; separators
    contribute nothing.  A bare non-mad letter is an error, as is any
    unfactored shaddah/tanween mark.
    """
    out = []
    for pos, c in enumerate(verse.chars):
        if c.is_separator:
            continue
        if isinstance(c.mark, CompositeMark):
            raise ScansionError(
                f"unfactored {c.mark.name} at position {pos}; factor the verse first"
            )
        if c.mark is None:
            if c.letter in MAD_LETTERS:
                out.append(CONSONANT)
            else:
                raise MissingDiacritic(pos, c.letter)
        elif c.mark is Diacritic.SUKUN:
            out.append(CONSONANT)
        else:
            out.append(VOWEL)
    return "".join(out)


def edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance (insert / delete / substitute)."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def classify_rule_based(verse: Verse) -> tuple[str, int]:
    """Nearest meter by edit distance over patterns.

    Ties break by meter table order.  Returns (meter name, distance).
    """
    pattern = to_pattern(verse)
    best_name, best_d = None, None
    for meter in ARABIC_METERS:
        target = meter.pattern
        if pattern == target:
            return meter.name, 0
        # the distance is bounded below by the length difference
        if best_d is not None and abs(len(pattern) - len(target)) >= best_d:
            continue
        d = edit_distance(pattern, target)
        if best_d is None or d < best_d:
            best_name, best_d = meter.name, d
    return best_name, best_d


def classify_stress(stress: str) -> tuple[str, int]:
    """Nearest (family foot, repetitions) for an English stress pattern.

    Searches the four classification families times 1..8 repetitions;
    ties break by family order, then by fewer repetitions.
    """
    if not stress:
        raise ScansionError("empty stress pattern")
    bad = set(stress) - {STRESSED, UNSTRESSED}
    if bad:
        raise ScansionError(f"stress patterns use only '/' and '×': {bad}")
    best = None  # (distance, family, k)
    for family, foot in _FAMILY_FEET:
        for k in range(1, MAX_REPETITIONS + 1):
            d = edit_distance(foot.pattern * k, stress)
            if best is None or d < best[0]:
                best = (d, family, k)
    return best[1], best[2]


# Letters used by the generator for '/' and consonant-'0' realizations.
# Mad letters are excluded so the verse-to-pattern mapping stays exact.
_CONSONANT_POOL = tuple(l for l in LETTERS if l not in MAD_LETTERS)
_MAD_POOL = tuple(sorted(MAD_LETTERS))
_SEPARATOR_PROB = 0.25


def generate_synthetic(
    meter_name: str,
    *,
    drop_diacritics: float = 0.0,
    seed: int | None = None,
    rng: random.Random | None = None,
) -> Verse:
    """Mint one labeled verse whose scansion equals the meter's pattern.

    '/' becomes a random non-mad letter with a random harakah; '0'
    becomes either a bare mad letter or a non-mad letter with sukun.
    Separators are sprinkled between characters, never adjacent.  With
    drop_diacritics > 0 each mark is independently removed with that
    probability (the verse then no longer scans cleanly, which is the
    point of the noise).
    """
    if not 0.0 <= drop_diacritics <= 1.0:
        raise ValueError("drop_diacritics must be in [0, 1]")
    pattern = meter_pattern(meter_name)
    if rng is None:
        rng = random.Random(seed)

    chars = []
    for symbol in pattern:
        if symbol == VOWEL:
            chars.append(
                DiacritizedChar(rng.choice(_CONSONANT_POOL), rng.choice(HARAKAH))
            )
        elif rng.random() < 0.5:
            chars.append(DiacritizedChar(rng.choice(_MAD_POOL)))
        else:
            chars.append(DiacritizedChar(rng.choice(_CONSONANT_POOL), Diacritic.SUKUN))

    with_seps = [chars[0]]
    for c in chars[1:]:
        if rng.random() < _SEPARATOR_PROB:
            with_seps.append(SEP_CHAR)
        with_seps.append(c)

    if drop_diacritics > 0.0:
        with_seps = [
            DiacritizedChar(c.letter)
            if not c.is_separator and c.mark is not None and rng.random() < drop_diacritics
            else c
            for c in with_seps
        ]
    return Verse(tuple(with_seps), label=meter_name)


def tables_as_json() -> dict:
    """Foot and meter tables in a plain-JSON shape, for documentation."""
    return {
        "arabic_feet": [
            {"name": f.name, "text": f.text, "pattern": f.pattern}
            for f in ARABIC_FEET
        ],
        "english_feet": [
            {"name": f.name, "pattern": f.pattern} for f in ENGLISH_FEET
        ],
        "arabic_meters": [
            {
                "name": m.name,
                "feet": [f.name for f in m.feet],
                "pattern": m.pattern,
                "scansion_rtl": display(m.pattern, rtl=True),
            }
            for m in ARABIC_METERS
        ],
    }
