"""Character encoding schemes mapping verse characters to 0/1 vectors.

Arabic treats a (letter, diacritic-state) combination as one symbol:
36 letters x (4 diacritics + bare) + separator = 181 symbols.  English
has 26 letters + space + apostrophe = 28.  Three schemes:

  one-hot  one 1 among n zeros         (n = 181 Arabic, 28 English)
  binary   symbol index as big-endian bits  (n = 8 Arabic, 5 English)
  two-hot  letter one-hot (37) stacked on diacritic one-hot (4),
           Arabic only                 (n = 41)

Symbol order is fixed and documented: base letters in Unicode codepoint
order, diacritic states bare < fatha < damma < kasra < sukun, separator
last.  English: a-z, space, apostrophe.  Every scheme is invertible.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .textnorm import LETTERS, SEPARATOR, Diacritic, DiacritizedChar, Verse

ONE_HOT = "one-hot"
BINARY = "binary"
TWO_HOT = "two-hot"
SCHEMES = (ONE_HOT, BINARY, TWO_HOT)

ARABIC = "arabic"
ENGLISH = "english"

APOSTROPHE = "'"

# bare < fatha < damma < kasra < sukun
_STATES: tuple[Diacritic | None, ...] = (None,) + tuple(Diacritic)


class EncodingError(ValueError):
    """Base class for encoding failures."""


class UnknownSymbol(EncodingError):
    pass


class SchemeUnsupported(EncodingError):
    pass


class InvalidCodeword(EncodingError):
    pass


def normalize_english(text: str) -> str:
    """Lowercase, fold curly apostrophes, collapse whitespace runs.

    Characters outside the alphabet are left alone; the encoder rejects
    them with their position.
    """
    folded = text.lower().replace("’", APOSTROPHE)
    return " ".join(folded.split())


class Alphabet:
    """Ordered symbol table for one language.

    Arabic symbols are DiacritizedChar values; English symbols are
    single-character strings.
    """

    def __init__(self, language: str):
        if language == ARABIC:
            symbols: list = [
                DiacritizedChar(letter, state)
                for letter in LETTERS
                for state in _STATES
            ]
            symbols.append(DiacritizedChar(SEPARATOR))
            self.letter_count = len(LETTERS) + 1  # 37, separator included
        elif language == ENGLISH:
            symbols = [chr(c) for c in range(ord("a"), ord("z") + 1)]
            symbols += [" ", APOSTROPHE]
            self.letter_count = len(symbols)  # 28
        else:
            raise ValueError(f"unknown language: {language!r}")
        self.language = language
        self.symbols = tuple(symbols)
        self._index = {s: i for i, s in enumerate(self.symbols)}

    @property
    def size(self) -> int:
        return len(self.symbols)

    def symbol_index(self, symbol) -> int:
        try:
            return self._index[symbol]
        except (KeyError, TypeError):
            raise UnknownSymbol(f"not in the {self.language} alphabet: {symbol!r}")

    def symbol_at(self, index: int):
        return self.symbols[index]


@lru_cache(maxsize=None)
def alphabet(language: str) -> Alphabet:
    return Alphabet(language)


def scheme_width(scheme: str, alpha: Alphabet) -> int:
    """Vector length n of a scheme over an alphabet."""
    if scheme == ONE_HOT:
        return alpha.size
    if scheme == BINARY:
        return int(np.ceil(np.log2(alpha.size)))
    if scheme == TWO_HOT:
        if alpha.language != ARABIC:
            raise SchemeUnsupported("two-hot encoding is defined for Arabic only")
        return alpha.letter_count + len(Diacritic)  # 37 + 4 = 41
    raise ValueError(f"unknown scheme: {scheme!r}")


def encode_char(symbol, scheme: str, alpha: Alphabet) -> np.ndarray:
    """Encode one symbol into a float vector of the scheme's width."""
    n = scheme_width(scheme, alpha)
    v = np.zeros(n)
    if scheme == ONE_HOT:
        v[alpha.symbol_index(symbol)] = 1.0
    elif scheme == BINARY:
        index = alpha.symbol_index(symbol)
        for k in range(n):  # big-endian: bit 0 is the most significant
            v[k] = (index >> (n - 1 - k)) & 1
    else:  # TWO_HOT
        if not isinstance(symbol, DiacritizedChar):
            raise UnknownSymbol(f"two-hot expects a DiacritizedChar, got {symbol!r}")
        if symbol.is_separator:
            v[alpha.letter_count - 1] = 1.0
        else:
            try:
                v[LETTERS.index(symbol.letter)] = 1.0
            except ValueError:
                raise UnknownSymbol(f"not a base letter: {symbol.letter!r}")
            if symbol.mark is not None:
                if not isinstance(symbol.mark, Diacritic):
                    raise UnknownSymbol(f"unfactored mark: {symbol.mark}")
                v[alpha.letter_count + list(Diacritic).index(symbol.mark)] = 1.0
    return v


def decode_char(v: np.ndarray, scheme: str, alpha: Alphabet):
    """Invert `encode_char`; rejects vectors that are not valid codewords."""
    v = np.asarray(v)
    n = scheme_width(scheme, alpha)
    if v.shape != (n,):
        raise InvalidCodeword(f"expected shape ({n},), got {v.shape}")
    if not np.all((v == 0.0) | (v == 1.0)):
        raise InvalidCodeword("entries must be exactly 0 or 1")

    if scheme == ONE_HOT:
        ones = np.flatnonzero(v)
        if len(ones) != 1:
            raise InvalidCodeword(f"one-hot vector with {len(ones)} ones")
        return alpha.symbol_at(int(ones[0]))

    if scheme == BINARY:
        index = 0
        for bit in v:
            index = (index << 1) | int(bit)
        if index >= alpha.size:
            raise InvalidCodeword(f"binary code {index} out of range")
        return alpha.symbol_at(index)

    letter_block = v[: alpha.letter_count]
    diac_block = v[alpha.letter_count :]
    letter_ones = np.flatnonzero(letter_block)
    diac_ones = np.flatnonzero(diac_block)
    if len(letter_ones) != 1:
        raise InvalidCodeword(f"two-hot letter block with {len(letter_ones)} ones")
    if len(diac_ones) > 1:
        raise InvalidCodeword(f"two-hot diacritic block with {len(diac_ones)} ones")
    li = int(letter_ones[0])
    if li == alpha.letter_count - 1:
        if len(diac_ones):
            raise InvalidCodeword("separator cannot carry a diacritic")
        return DiacritizedChar(SEPARATOR)
    mark = list(Diacritic)[int(diac_ones[0])] if len(diac_ones) else None
    return DiacritizedChar(LETTERS[li], mark)


@dataclass
class EncodedMatrix:
    """n x p matrix; column j encodes character j of the verse."""

    values: np.ndarray
    scheme: str

    @property
    def width(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]


def encode_verse(verse, scheme: str, alpha: Alphabet) -> EncodedMatrix:
    """Encode a Verse (Arabic) or string (English) as an n x p matrix."""
    if alpha.language == ARABIC:
        if not isinstance(verse, Verse):
            raise UnknownSymbol("the Arabic encoder expects a parsed Verse")
        symbols = verse.chars
    else:
        symbols = tuple(verse)
    n = scheme_width(scheme, alpha)
    m = np.zeros((n, len(symbols)))
    for j, sym in enumerate(symbols):
        try:
            m[:, j] = encode_char(sym, scheme, alpha)
        except UnknownSymbol as exc:
            raise UnknownSymbol(f"character {j}: {exc}") from exc
    return EncodedMatrix(m, scheme)


# Dense binary file format: header {magic, scheme id, n, p}, then the
# matrix row-major as 32-bit little-endian floats.
_MAGIC = b"VMX1"
_HEADER = struct.Struct("<4sBII")
_SCHEME_IDS = {ONE_HOT: 1, BINARY: 2, TWO_HOT: 3}
_SCHEME_BY_ID = {v: k for k, v in _SCHEME_IDS.items()}


def save_matrix(matrix: EncodedMatrix, path) -> None:
    n, p = matrix.values.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _SCHEME_IDS[matrix.scheme], n, p))
        fh.write(np.ascontiguousarray(matrix.values, dtype="<f4").tobytes())


def load_matrix(path) -> EncodedMatrix:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise EncodingError("truncated matrix file")
        magic, scheme_id, n, p = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise EncodingError(f"bad magic {magic!r}")
        if scheme_id not in _SCHEME_BY_ID:
            raise EncodingError(f"unknown scheme id {scheme_id}")
        payload = fh.read(4 * n * p)
    if len(payload) != 4 * n * p:
        raise EncodingError("truncated matrix payload")
    data = np.frombuffer(payload, dtype="<f4")
    values = data.reshape(n, p).astype(float)
    return EncodedMatrix(values, _SCHEME_BY_ID[scheme_id])
