"""Power norms, Cesàro averages of C and their limits.

Operator norms are witnessed, not computed: each table row is the largest
ratio ``||T f|| / ||f||`` over a witness set, a lower bound for ``||T||``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from cesaro_lab.analytic import (
    ONE,
    PHI,
    AtomSum,
    FunctionModel,
    combine,
    derived_series,
    power_of_one_minus,
)
from cesaro_lab.norms import DEFAULT_GRID, GridOptions, weighted_sup_norm
from cesaro_lab.operator import cesaro_iterate, cesaro_mean, cesaro_power

__all__ = [
    "TableRow",
    "ConvergenceTable",
    "project_P",
    "default_witnesses",
    "power_norm_table",
    "mean_norm_table",
    "mean_convergence",
    "predicted_mean_norm",
    "successive_difference",
]


class TableRow(NamedTuple):
    n: int
    value: float
    predicted: Optional[float] = None


@dataclass(frozen=True)
class ConvergenceTable:
    kind: str  # power_norm | mean_residual | mean_norm | successive_diff
    gamma: float
    rows: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ns = [row.n for row in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("table indices must be strictly increasing")
        if any(row.value < 0 for row in self.rows):
            raise ValueError("table values must be nonnegative")

    def value(self, n: int) -> float:
        for row in self.rows:
            if row.n == n:
                return row.value
        raise KeyError(n)

    @property
    def values(self) -> list:
        return [row.value for row in self.rows]

    def to_csv(self, header: Optional[dict] = None) -> str:
        buf = io.StringIO()
        for key, value in (header or {}).items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "value", "predicted"])
        for row in self.rows:
            pred = "" if row.predicted is None else f"{row.predicted:.9g}"
            writer.writerow([row.n, f"{row.value:.9g}", pred])
        return buf.getvalue()


def project_P(f: FunctionModel, gamma: float) -> AtomSum:
    """``P f = f(0) phi``, the limit of the Cesàro averages when ``gamma > 1``."""
    if not gamma > 1:
        raise ValueError("the projection onto span{phi} needs gamma > 1")
    return combine(PHI, f.value_at_zero(), "scale")


def default_witnesses(gamma: float) -> list:
    """``(1-z)^{-gamma}``, plus ``phi`` when that is a different element of ``A^{-gamma}``, plus ``1``."""
    out = [power_of_one_minus(gamma)]
    if gamma > 1:
        out.append(PHI)
    out.append(ONE)
    return out


def _ratio(image, base_norm, gamma, opts):
    return weighted_sup_norm(image, gamma, opts).value / base_norm


def _indices(n_max, ns):
    if ns is None:
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        return list(range(1, n_max + 1))
    out = sorted(set(int(n) for n in ns))
    if not out or out[0] < 1:
        raise ValueError("indices must be positive")
    return out


def power_norm_table(gamma: float, n_max: int = 8, witnesses: Optional[Sequence] = None,
                     opts: GridOptions = DEFAULT_GRID, ns=None) -> ConvergenceTable:
    """Row ``n``: ``max_f ||C^n f|| / ||f||`` with prediction ``max{1, gamma^-n}``."""
    if witnesses is None:
        witnesses = default_witnesses(gamma)
    idx = _indices(n_max, ns)
    rows = []
    for n in idx:
        best = 0.0
        for f in witnesses:
            base = weighted_sup_norm(f, gamma, opts).value
            if base > 0:
                best = max(best, _ratio(cesaro_power(f, n), base, gamma, opts))
        rows.append(TableRow(n, best, max(1.0, gamma ** (-n))))
    return ConvergenceTable("power_norm", gamma, tuple(rows))


def predicted_mean_norm(gamma, n: int, exact: bool = False):
    """``1`` for ``gamma >= 1``, else ``(1/n) sum_{m=1}^n gamma^{-m}``.

    With ``exact=True`` the value is a :class:`Fraction` of the binary64
    ``gamma``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    g = Fraction(gamma)
    if g <= 0:
        raise ValueError("gamma must be positive")
    if g >= 1:
        value = Fraction(1)
    else:
        value = sum((1 / g) ** m for m in range(1, n + 1)) / n
    return value if exact else float(value)


def mean_norm_table(gamma: float, n_max: int = 16, witnesses: Optional[Sequence] = None,
                    opts: GridOptions = DEFAULT_GRID, ns=None) -> ConvergenceTable:
    """Row ``n``: ``max_f ||C_[n] f|| / ||f||`` with the predicted average norm."""
    if witnesses is None:
        witnesses = default_witnesses(gamma)
    rows = []
    for n in _indices(n_max, ns):
        best = 0.0
        for f in witnesses:
            base = weighted_sup_norm(f, gamma, opts).value
            if base > 0:
                best = max(best, _ratio(cesaro_mean(f, n), base, gamma, opts))
        rows.append(TableRow(n, best, predicted_mean_norm(gamma, n)))
    return ConvergenceTable("mean_norm", gamma, tuple(rows))


def mean_convergence(f: FunctionModel, gamma: float, n_max: int = 64, ns=None,
                     opts: GridOptions = DEFAULT_GRID) -> ConvergenceTable:
    """Row ``n``: ``||C_[n] f - P f||_{-gamma}``."""
    target = combine(project_P(f, gamma), -1.0, "scale")
    rows = []
    for n in _indices(n_max, ns):
        residual = combine(cesaro_mean(f, n), target, "add")
        rows.append(TableRow(n, weighted_sup_norm(residual, gamma, opts).value, None))
    return ConvergenceTable("mean_residual", gamma, tuple(rows))


def successive_difference(f: FunctionModel, gamma: float, n_max: int = 32, ns=None,
                          opts: GridOptions = DEFAULT_GRID) -> ConvergenceTable:
    """Row ``n``: ``||C^{n+1} f - C^n f||_{-gamma}`` (``gamma >= 1``)."""
    if not gamma >= 1:
        raise ValueError("successive differences are tabulated for gamma >= 1")
    rows = []
    for n in _indices(n_max, ns):
        diff = derived_series(f, lambda c, k=n: cesaro_iterate(c, k, "difference"),
                              label=f"C^{n + 1} f - C^{n} f")
        rows.append(TableRow(n, weighted_sup_norm(diff, gamma, opts).value, None))
    return ConvergenceTable("successive_diff", gamma, tuple(rows))

