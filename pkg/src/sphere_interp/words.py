"""Words in the free generators ``A = [T^2]`` and ``B = [S T^2 S]`` and their bottom rows.

The set ``BSET`` is the set of reduced words that start with a nonzero power of
``B``; ``BSET_TILDE = BSET * S  u  {S}``.  Each class is identified with a
normalized bottom row ``(c, d)`` with ``c > 0``:

* kind ``"P"``: ``c`` even and nonzero, ``d`` odd, ``gcd(c, d) = 1``;
* kind ``"Ptilde"``: ``c`` odd, ``d`` even, ``gcd(c, d) = 1``.

The top-left entry of the unique class representative is returned by
:func:`alpha_entry` through a congruence; :func:`verify_membership` is the
word-reduction oracle used to cross-check it.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Sequence, Tuple

__all__ = [
    "INT64_MAX",
    "WordOverflowError",
    "UnimodularMatrix",
    "WordElement",
    "BottomRow",
    "A0",
    "B0",
    "S0",
    "word_to_matrix",
    "matrix_to_word",
    "enumerate_bottom_rows",
    "enumerate_words",
    "alpha_entry",
    "complete_row",
    "verify_membership",
    "rows_to_csv",
]

INT64_MAX = 2**63 - 1
REDUCTION_STEP_CAP = 10**6

KINDS = ("P", "Ptilde")


class WordOverflowError(OverflowError):
    """An integer entry left the signed 64-bit range."""


def _chk(v: int) -> int:
    if abs(v) > INT64_MAX:
        raise WordOverflowError(f"matrix entry {v} exceeds the 64-bit range")
    return v


@dataclass(frozen=True)
class UnimodularMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for v in (self.a, self.b, self.c, self.d):
            _chk(int(v))
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.as_tuple()} is not 1")

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        a, b, c, d = self.as_tuple()
        e, f, g, h = other.as_tuple()
        return UnimodularMatrix(_chk(a * e + b * g), _chk(a * f + b * h),
                                _chk(c * e + d * g), _chk(c * f + d * h))

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def __neg__(self) -> "UnimodularMatrix":
        return UnimodularMatrix(-self.a, -self.b, -self.c, -self.d)

    def normalized(self) -> "UnimodularMatrix":
        """Representative of the +-class with ``c > 0``, or ``c = 0, d > 0``."""
        if self.c < 0 or (self.c == 0 and self.d < 0):
            return -self
        return self

    def power(self, e: int) -> "UnimodularMatrix":
        base = self if e >= 0 else self.inverse()
        out = IDENTITY
        for _ in range(abs(e)):
            out = out @ base
        return out


IDENTITY = UnimodularMatrix(1, 0, 0, 1)
A0 = UnimodularMatrix(1, 2, 0, 1)
B0 = UnimodularMatrix(1, 0, -2, 1)
S0 = UnimodularMatrix(0, -1, 1, 0)


def _gen_power(g: str, e: int) -> UnimodularMatrix:
    # A0^e = [1 2e; 0 1], B0^e = [1 0; -2e 1]
    if g == "A":
        return UnimodularMatrix(1, _chk(2 * e), 0, 1)
    if g == "B":
        return UnimodularMatrix(1, 0, _chk(-2 * e), 1)
    raise ValueError(f"unknown generator {g!r}")


@dataclass(frozen=True)
class WordElement:
    """Reduced word as a tuple of ``(generator, exponent)`` letters."""

    letters: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        letters = tuple((str(g), int(e)) for g, e in self.letters)
        object.__setattr__(self, "letters", letters)
        for i, (g, e) in enumerate(letters):
            if g not in ("A", "B"):
                raise ValueError(f"unknown generator {g!r}")
            if e == 0 and not (g == "A" and i == len(letters) - 1):
                raise ValueError("only a trailing A letter may carry exponent 0")
            if i and letters[i - 1][0] == g:
                raise ValueError("word is not reduced: repeated generator")

    @classmethod
    def reduce(cls, letters: Iterable[Tuple[str, int]]) -> "WordElement":
        """Free reduction of an arbitrary letter sequence."""
        out: List[List] = []
        for g, e in letters:
            if e == 0:
                continue
            if out and out[-1][0] == g:
                out[-1][1] += e
                if out[-1][1] == 0:
                    out.pop()
            else:
                out.append([g, e])
        return cls(tuple((g, e) for g, e in out))

    @property
    def starts_with_B(self) -> bool:
        return bool(self.letters) and self.letters[0][0] == "B" and self.letters[0][1] != 0

    def __len__(self) -> int:
        return len(self.letters)


@dataclass(frozen=True)
class BottomRow:
    c: int
    d: int
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if math.gcd(self.c, self.d) != 1:
            raise ValueError(f"gcd({self.c}, {self.d}) != 1")
        if self.c <= 0:
            raise ValueError("bottom rows are normalized with c > 0")
        if self.kind == "P" and not (self.c % 2 == 0 and self.d % 2 == 1):
            raise ValueError(f"({self.c}, {self.d}) is not a P row")
        if self.kind == "Ptilde" and not (self.c % 2 == 1 and self.d % 2 == 0):
            raise ValueError(f"({self.c}, {self.d}) is not a Ptilde row")


def word_to_matrix(w: WordElement) -> UnimodularMatrix:
    """Multiply out ``w`` with ``A0 = [1 2; 0 1]`` and ``B0 = [1 0; -2 1]``."""
    m = IDENTITY
    for g, e in w.letters:
        m = m @ _gen_power(g, e)
    return m


def matrix_to_word(m: UnimodularMatrix) -> WordElement:
    """Rewrite ``+-m`` (an element of the level-2 subgroup) as a reduced word.

    Right multiplication by ``A0^j`` shifts ``d`` by ``2jc`` and by ``B0^j``
    shifts ``c`` by ``-2jd``; alternating the two strictly shrinks the bottom
    row until ``c = 0``.
    """
    a, b, c, d = m.as_tuple()
    if a % 2 == 0 or d % 2 == 0 or b % 2 or c % 2:
        raise ValueError("matrix is not in the level-2 subgroup")
    applied: List[Tuple[str, int]] = []
    steps = 0
    while c != 0:
        steps += 1
        if steps > REDUCTION_STEP_CAP:
            raise RuntimeError("word reduction did not terminate")
        if abs(d) > abs(c):
            # d -> d + 2jc with |d| < |c|
            j = -_round_div(d, 2 * c)
            a, b, c, d = a, b + 2 * j * a, c, d + 2 * j * c
            applied.append(("A", j))
        else:
            j = _round_div(c, 2 * d)
            a, b, c, d = a - 2 * j * b, b, c - 2 * j * d, d
            applied.append(("B", j))
    # now +-[1 2h; 0 1]
    h = b * a // 2
    letters = [("A", h)] + [(g, -e) for g, e in reversed(applied)]
    return WordElement.reduce(letters)


def _round_div(x: int, y: int) -> int:
    """Nearest integer to ``x / y``."""
    q, r = divmod(x, y)
    if 2 * abs(r) > abs(y) or (2 * abs(r) == abs(y) and r * y > 0):
        q += 1
    return q


def enumerate_bottom_rows(kind: str, c_max: int, d_halfwidth: int) -> List[BottomRow]:
    """All normalized rows of ``kind`` with ``0 < c <= c_max`` and ``|d| <= d_halfwidth``."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if c_max < 1 or d_halfwidth < 0:
        raise ValueError("c_max must be >= 1 and d_halfwidth >= 0")
    c0 = 2 if kind == "P" else 1
    rows = []
    for c in range(c0, c_max + 1, 2):
        dstart = -d_halfwidth
        # d has the opposite parity to c
        if (dstart - c) % 2 == 0:
            dstart += 1
        for d in range(dstart, d_halfwidth + 1, 2):
            if math.gcd(c, d) == 1:
                rows.append(BottomRow(c, d, kind))
    return rows


def enumerate_words(max_abs_exponent: int, max_letters: int) -> Iterator[WordElement]:
    """Reduced words starting with ``B``, each exponent in ``[-E, E] \\ {0}``."""
    exps = [e for e in range(-max_abs_exponent, max_abs_exponent + 1) if e]

    def rec(prefix, last):
        if prefix:
            yield WordElement(tuple(prefix))
        if len(prefix) >= max_letters:
            return
        g = "A" if last == "B" else "B"
        for e in exps:
            prefix.append((g, e))
            yield from rec(prefix, g)
            prefix.pop()

    for e in exps:
        yield from rec([("B", e)], "B")


def alpha_entry(row: BottomRow) -> int:
    """Top-left entry of the class representative with bottom row ``row``.

    For ``P`` rows: the odd ``a`` in ``(-c, c)`` with ``a d = 1 (mod 2c)``.
    For ``Ptilde`` rows: the even ``a`` in ``(-c, c)`` with ``a d = 1 (mod c)``.
    """
    c, d = row.c, row.d
    if row.kind == "P":
        inv = pow(d, -1, 2 * c)
        return inv if inv < c else inv - 2 * c
    if c == 1:
        return 0
    inv = pow(d, -1, c)
    a = inv if inv % 2 == 0 else inv - c
    if a % 2 or not -c < a < c:
        raise ValueError(f"no admissible alpha for {row}")
    return a


def complete_row(row: BottomRow) -> UnimodularMatrix:
    """The class representative ``[alpha b; c d]``."""
    a = alpha_entry(row)
    b, rem = divmod(a * row.d - 1, row.c)
    if rem:
        raise ValueError(f"alpha congruence failed for {row}")
    return UnimodularMatrix(a, b, row.c, row.d)


def verify_membership(m: UnimodularMatrix, kind: str) -> bool:
    """Whether the +-class of ``m`` lies in ``BSET`` (``kind="B"``) or ``BSET_TILDE``."""
    if kind == "B":
        if m.c % 2 or m.b % 2 or m.a % 2 == 0:
            return False
        return matrix_to_word(m).starts_with_B
    if kind == "Btilde":
        t = m @ S0.inverse()
        if t.c % 2 or t.b % 2 or t.a % 2 == 0:
            return False
        w = matrix_to_word(t)
        return len(w) == 0 or w.starts_with_B
    raise ValueError("kind must be 'B' or 'Btilde'")


def rows_to_csv(rows: Sequence[BottomRow], fh=None) -> str:
    """Debug dump with columns ``kind,c,d,alpha``."""
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "c", "d", "alpha"])
    for r in rows:
        w.writerow([r.kind, r.c, r.d, alpha_entry(r)])
    return buf.getvalue() if fh is None else ""
