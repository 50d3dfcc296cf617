"""Result records shared by the two coefficient pipelines, plus their CSV schema."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

__all__ = ["CoefficientResult", "COEFF_CSV_COLUMNS", "fmt17", "coefficients_to_csv"]

COEFF_CSV_COLUMNS = ["p", "n", "r", "method", "re", "im", "error_estimate"]


def fmt17(x: float) -> str:
    """Fixed 17-significant-digit rendering used in every data file."""
    return format(float(x), ".17g")


@dataclass
class CoefficientResult:
    """A Fourier coefficient ``b_{p,n}(r)`` (or its tilde partner) with provenance.

    ``error_estimate`` is the error the method reports for ``value``.  Whether
    it is a proven bound is recorded in ``rigorous``.  ``flagged`` is set when
    the estimate exceeds the requested tolerance.
    """

    p: int
    n: int
    r: float
    value: complex
    method: str
    error_estimate: float
    tilde: bool = False
    c_max: Optional[int] = None
    tail_bound: float = math.inf
    rigorous: bool = False
    flagged: bool = False
    note: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.p < 5:
            raise ValueError("p must be >= 5")
        if self.r < 0:
            raise ValueError("r must be >= 0")
        if self.method not in ("contour", "closed_form"):
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def vanishing_ok(self) -> bool:
        """For ``n <= 0`` the value must lie within its error estimate of zero."""
        return self.n > 0 or abs(self.value) <= self.error_estimate

    def csv_row(self) -> list:
        tag = self.method + ("_tilde" if self.tilde else "")
        return [str(self.p), str(self.n), fmt17(self.r), tag, fmt17(self.value.real),
                fmt17(self.value.imag), fmt17(self.error_estimate)]


def coefficients_to_csv(results: Iterable[CoefficientResult], fh=None, extra_columns=()) -> str:
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COEFF_CSV_COLUMNS + list(extra_columns))
    for res in results:
        row = res.csv_row()
        for col in extra_columns:
            v = getattr(res, col, res.extra.get(col, ""))
            row.append(v if isinstance(v, str) else fmt17(v) if isinstance(v, float) else str(v))
        w.writerow(row)
    return buf.getvalue() if fh is None else ""
