import random

import pytest

from versemeter import textnorm as tn
from versemeter.textnorm import (
    HARAKAH,
    LETTERS,
    NOON,
    SEP_CHAR,
    CompositeMark,
    Diacritic,
    DiacritizedChar,
    OrphanDiacritic,
    UnknownCodepoint,
    Verse,
)

FATHA = Diacritic.FATHA
SUKUN = Diacritic.SUKUN
DAL = "د"  # د
REH = "ر"  # ر


def ch(letter, mark=None):
    return DiacritizedChar(letter, mark)


def random_verse(rng, n=12, composites=True):
    """Random structurally valid verse, possibly with composite marks."""
    marks = [None, *Diacritic]
    if composites:
        marks += list(CompositeMark)
    chars = []
    for _ in range(rng.randint(1, n)):
        if chars and not chars[-1].is_separator and rng.random() < 0.2:
            chars.append(SEP_CHAR)
        chars.append(ch(rng.choice(LETTERS), rng.choice(marks)))
    return Verse(tuple(chars))


class TestParse:
    def test_letter_with_harakah(self):
        assert tn.parse("دَ").chars == (ch(DAL, FATHA),)

    def test_empty_input(self):
        assert tn.parse("").chars == ()

    def test_harakah_after_space_is_dropped(self):
        verse = tn.parse("د  َر")
        assert verse.chars == (ch(DAL), SEP_CHAR, ch(REH))

    def test_harakah_after_space_strict(self):
        with pytest.raises(OrphanDiacritic):
            tn.parse("د  َر", policy="strict")

    def test_orphan_at_start_strict(self):
        with pytest.raises(OrphanDiacritic):
            tn.parse("َد", policy="strict")

    def test_unknown_codepoint(self):
        assert tn.parse("د!ر").chars == (ch(DAL), ch(REH))
        with pytest.raises(UnknownCodepoint) as exc:
            tn.parse("د!ر", policy="strict")
        assert exc.value.position == 1

    def test_whitespace_runs_collapse(self):
        verse = tn.parse("د \t\n ر")
        assert verse.chars == (ch(DAL), SEP_CHAR, ch(REH))

    def test_tatweel_dropped_silently(self):
        assert tn.parse("دـر", policy="strict").chars == (ch(DAL), ch(REH))

    def test_duplicate_harakah_keeps_first(self):
        assert tn.parse("دَُ").chars == (ch(DAL, FATHA),)

    def test_shaddah_fuses_either_mark_order(self):
        want = (ch(DAL, CompositeMark.SHADDAH_FATHA),)
        assert tn.parse("دَّ").chars == want
        assert tn.parse("دَّ").chars == want

    def test_bare_shaddah_dropped(self):
        assert tn.parse("دّر").chars == (ch(DAL), ch(REH))
        assert tn.parse("دّْ").chars == (ch(DAL, SUKUN),)

    def test_tanween_parses(self):
        assert tn.parse("لٌ").chars == (ch("ل", CompositeMark.TANWEEN_DAMM),)

    def test_bad_policy(self):
        with pytest.raises(ValueError):
            tn.parse("د", policy="lenient")


class TestClean:
    def test_separator_only_verse_empties(self):
        assert tn.clean(Verse((SEP_CHAR, SEP_CHAR))).chars == ()

    def test_edges_and_runs(self):
        verse = Verse((SEP_CHAR, ch(DAL), SEP_CHAR, SEP_CHAR, ch(REH), SEP_CHAR))
        assert tn.clean(verse).chars == (ch(DAL), SEP_CHAR, ch(REH))

    def test_idempotent(self):
        rng = random.Random(7)
        for _ in range(200):
            once = tn.clean(random_verse(rng))
            assert tn.clean(once) == once

    def test_already_clean_unchanged(self):
        verse = tn.parse("دَ ر")
        assert tn.clean(verse) == verse


class TestFactoring:
    def test_shaddah_expansion(self):
        # the canonical gemination fixture
        assert tn.factor_shaddah(tn.parse("دَّ")).text() == "دْدَ"

    def test_tanween_damm(self):
        got = tn.factor_tanween(tn.parse("رَجُلٌ"))
        assert got.text() == "رَجُلُنْ"

    def test_tanween_kasr(self):
        got = tn.factor_tanween(tn.parse("رَجُلٍ"))
        assert got.text() == "رَجُلِنْ"

    def test_no_composites_is_identity(self):
        verse = tn.parse("دَ رْ")
        assert tn.factor_shaddah(verse) == verse
        assert tn.factor_tanween(verse) == verse

    def test_two_shaddah_letters_in_a_row(self):
        verse = tn.parse("دَّرُّ")
        got = tn.factor_shaddah(verse)
        assert got.chars == (
            ch(DAL, SUKUN), ch(DAL, FATHA),
            ch(REH, SUKUN), ch(REH, Diacritic.DAMMA),
        )

    def test_factored_output_has_only_primitive_marks(self):
        rng = random.Random(3)
        for _ in range(300):
            verse = tn.factor_tanween(tn.factor_shaddah(random_verse(rng)))
            assert not verse.has_composite_marks()

    def test_factor_order_commutes(self):
        # no letter can carry both marks, so the expansions are independent
        rng = random.Random(11)
        for _ in range(300):
            verse = random_verse(rng)
            a = tn.factor_tanween(tn.factor_shaddah(verse))
            b = tn.factor_shaddah(tn.factor_tanween(verse))
            assert a == b

    def test_shaddah_length_law(self):
        rng = random.Random(5)
        for _ in range(300):
            verse = random_verse(rng)
            n_shaddah = sum(
                1 for c in verse.chars
                if isinstance(c.mark, CompositeMark) and "SHADDAH" in c.mark.name
            )
            assert len(tn.factor_shaddah(verse)) == len(verse) + n_shaddah

    def test_tanween_inserts_exactly_the_noons(self):
        rng = random.Random(9)
        for _ in range(300):
            verse = random_verse(rng)
            n_tanween = sum(
                1 for c in verse.chars
                if isinstance(c.mark, CompositeMark) and "TANWEEN" in c.mark.name
            )
            before = [c.letter for c in tn.strip_diacritics(verse).chars]
            after = [c.letter for c in tn.strip_diacritics(tn.factor_tanween(verse)).chars]
            assert len(after) == len(before) + n_tanween
            # removing the inserted noons recovers the original letters
            trimmed = list(after)
            removed = 0
            i = 0
            while i < len(trimmed):
                if removed < n_tanween and trimmed[i] == NOON and (
                    i >= len(before) or trimmed[i] != before[i]
                ):
                    trimmed.pop(i)
                    removed += 1
                else:
                    i += 1
            assert trimmed == before


class TestStripDiacritics:
    def test_definition(self):
        assert tn.strip_diacritics(tn.parse("دَ")).chars == (ch(DAL),)

    def test_idempotent_on_bare(self):
        verse = tn.parse("در")
        assert tn.strip_diacritics(verse) == verse

    def test_factored_word(self):
        verse = tn.canonicalize("رَجُلٌ")
        assert tn.strip_diacritics(verse).text() == "رجلن"


class TestSerialization:
    def test_round_trip_canonical(self):
        rng = random.Random(21)
        for _ in range(300):
            verse = tn.factor_tanween(tn.factor_shaddah(tn.clean(random_verse(rng))))
            assert tn.parse(verse.text()).chars == verse.chars

    def test_round_trip_with_composites(self):
        rng = random.Random(22)
        for _ in range(300):
            verse = tn.clean(random_verse(rng))
            assert tn.parse(verse.text()).chars == verse.chars

    def test_nfc_stable(self):
        import unicodedata

        verse = tn.canonicalize("رَجُلٌ دَّ")
        text = verse.text()
        assert unicodedata.normalize("NFC", text) == text


class TestModelInvariants:
    def test_letter_roster_has_36(self):
        assert len(LETTERS) == 36
        assert len(set(LETTERS)) == 36

    def test_four_primitive_diacritics(self):
        assert len(Diacritic) == 4
        assert len(HARAKAH) == 3

    def test_six_composite_kinds(self):
        assert len(CompositeMark) == 6

    def test_separator_cannot_carry_mark(self):
        with pytest.raises(tn.TextNormError):
            DiacritizedChar(tn.SEPARATOR, FATHA)

    def test_non_letter_rejected(self):
        with pytest.raises(tn.TextNormError):
            DiacritizedChar("x")
