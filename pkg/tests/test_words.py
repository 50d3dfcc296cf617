"""Words in the level-2 subgroup and the bottom-row bijections."""
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphere_interp.words import (IDENTITY, BottomRow, UnimodularMatrix, WordElement, WordOverflowError,
                                 alpha_entry, complete_row, enumerate_bottom_rows, enumerate_words,
                                 matrix_to_word, rows_to_csv, verify_membership, word_to_matrix)

letters = st.lists(st.tuples(st.sampled_from("AB"), st.integers(-4, 4).filter(bool)), max_size=6)


def test_word_to_matrix_examples():
    assert word_to_matrix(WordElement()) == IDENTITY
    assert word_to_matrix(WordElement((("B", -1),))).as_tuple() == (1, 0, 2, 1)
    assert word_to_matrix(WordElement((("B", 1), ("A", 1)))).as_tuple() == (1, 2, -2, -3)


def test_word_validation():
    with pytest.raises(ValueError):
        WordElement((("B", 1), ("B", 2)))
    with pytest.raises(ValueError):
        WordElement((("B", 0), ("A", 1)))
    WordElement((("B", 1), ("A", 0)))
    with pytest.raises(ValueError):
        UnimodularMatrix(1, 1, 1, 1)


def test_overflow_is_hard_error():
    with pytest.raises(WordOverflowError):
        word_to_matrix(WordElement((("A", 2 ** 62),)))


@given(letters)
def test_word_roundtrip(seq):
    w = WordElement.reduce(seq)
    m = word_to_matrix(w)
    assert word_to_matrix(matrix_to_word(m)) in (m, -m)
    assert matrix_to_word(m) == w


def test_enumerate_rows_examples():
    rows = enumerate_bottom_rows("P", 2, 3)
    assert {(r.c, r.d) for r in rows} == {(2, 1), (2, -1), (2, 3), (2, -3)}
    assert [(r.c, r.d) for r in enumerate_bottom_rows("Ptilde", 1, 0)] == [(1, 0)]
    assert all(math.gcd(r.c, r.d) == 1 for r in enumerate_bottom_rows("Ptilde", 15, 40))
    with pytest.raises(ValueError):
        BottomRow(2, 2, "P")
    with pytest.raises(ValueError):
        BottomRow(3, 1, "P")


def test_alpha_entry_examples():
    assert alpha_entry(BottomRow(2, 1, "P")) == 1
    assert alpha_entry(BottomRow(1, 0, "Ptilde")) == 0
    assert alpha_entry(BottomRow(2, -1, "P")) == -1


def test_membership_examples():
    assert not verify_membership(UnimodularMatrix(1, 2, 0, 1), "B")
    assert verify_membership(UnimodularMatrix(1, 0, 2, 1), "B")
    assert verify_membership(UnimodularMatrix(0, -1, 1, 0), "Btilde")
    with pytest.raises(ValueError):
        verify_membership(IDENTITY, "C")


@pytest.mark.parametrize("kind,mem", [("P", "B"), ("Ptilde", "Btilde")])
def test_completed_rows_are_members(kind, mem):
    for row in enumerate_bottom_rows(kind, 30, 60):
        M = complete_row(row)
        assert verify_membership(M, mem)
        assert abs(M.a) <= abs(M.c)


def test_word_oracle_matches_congruence():
    """Every B-word with small exponents lands on the completed row of its bottom row."""
    seen = 0
    for w in enumerate_words(3, 3):
        M = word_to_matrix(w).normalized()
        assert abs(M.a) <= abs(M.c)
        row = BottomRow(M.c, M.d, "P")
        assert alpha_entry(row) == M.a
        seen += 1
    assert seen > 100


def test_rows_csv():
    text = rows_to_csv(enumerate_bottom_rows("P", 2, 1))
    assert text.splitlines() == ["kind,c,d,alpha", "P,2,-1,-1", "P,2,1,1"]
