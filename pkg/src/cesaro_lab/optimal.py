"""Optimal domains ``[C, A^{-gamma}]`` and ``[C, A_0^{-gamma}]`` and the witness catalog.

``f`` lies in ``[C, A^{-gamma}]`` exactly when ``f phi`` lies in
``A^{-(gamma+1)}`` (and likewise for the little spaces), so membership is
decided by the growth-space classifier applied to ``f phi``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from cesaro_lab.analytic import (
    ONE,
    PHI,
    FunctionModel,
    combine,
    differentiate,
    evaluate,
    integrate,
    power_of_one_minus,
)
from cesaro_lab.expr import parse_expression
from cesaro_lab.norms import (
    DEFAULT_GRID,
    GridOptions,
    MembershipVerdict,
    NormEstimate,
    Space,
    classify_membership,
    weighted_sup_norm,
)
from cesaro_lab.operator import apply_cesaro
from cesaro_lab.spectral import eigenfunction

__all__ = [
    "optimal_domain_membership",
    "optimal_domain_norm",
    "OptimalNorm",
    "differentiate",
    "integrate",
    "delta_bound_check",
    "DeltaReport",
    "WitnessEntry",
    "witness_g",
    "witness_catalog",
    "check_entry",
    "catalog_rows",
    "catalog_json",
]


def optimal_domain_membership(f: FunctionModel, gamma: float, which: str = "big",
                              opts: GridOptions = DEFAULT_GRID) -> MembershipVerdict:
    """Verdict for ``[C, A^{-gamma}]`` (``big``) or ``[C, A_0^{-gamma}]`` (``little``)."""
    if which not in ("big", "little"):
        raise ValueError("which must be 'big' or 'little'")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    spaces = (Space("CA", gamma), Space("CA0", gamma))
    both = classify_membership(combine(f, op="multiply_by_phi"), gamma + 1.0, opts, spaces=spaces)
    return both.big if which == "big" else both.little


class OptimalNorm(NamedTuple):
    norm_def: NormEstimate  # ||C f||_{-gamma}
    norm_equiv: NormEstimate  # ||f phi||_{-(gamma+1)}


def optimal_domain_norm(f: FunctionModel, gamma: float,
                        opts: GridOptions = DEFAULT_GRID) -> OptimalNorm:
    return OptimalNorm(weighted_sup_norm(apply_cesaro(f), gamma, opts),
                       weighted_sup_norm(combine(f, op="multiply_by_phi"), gamma + 1.0, opts))


@dataclass(frozen=True)
class DeltaReport:
    lhs: float
    rhs: float
    norm_def: float
    constant: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + 1e-12)


def delta_bound_check(f: FunctionModel, z0, r: float, gamma: float,
                      opts: GridOptions = DEFAULT_GRID) -> DeltaReport:
    """Check ``|f(z0)| <= |1-z0| r^2 / ((r-|z0|)^2 (1-r)^gamma) * ||C f||_{-gamma}``.

    The bound comes from ``f = (1-z)(z C f)'`` and Cauchy's estimate on
    ``|z| = r``.
    """
    z0 = complex(z0)
    if not abs(z0) < r < 1.0:
        raise ValueError(f"need |z0| < r < 1, got |z0| = {abs(z0)}, r = {r}")
    lhs = abs(evaluate(f, z0)[0])
    norm = weighted_sup_norm(apply_cesaro(f), gamma, opts).value
    const = abs(1.0 - z0) * r * r / ((r - abs(z0)) ** 2 * (1.0 - r) ** gamma)
    return DeltaReport(lhs, const * norm, norm, const)


@dataclass(frozen=True)
class WitnessEntry:
    name: str
    model: FunctionModel
    gamma: float
    expected: dict  # Space -> "in" | "out"
    provenance: str = field(default="", compare=False)


def witness_g(gamma: float):
    """``g = (1-z) / (1+z)^{gamma+1}``: in ``[C, A^{-gamma}]`` but not in ``A^{-gamma}``."""
    return parse_expression(f"(1-z)*(1+z)^-{gamma + 1.0!r}")


def _verdict(flag: bool) -> str:
    return "in" if flag else "out"


def witness_catalog(gamma: float) -> list:
    """Named functions with their expected verdicts at ``gamma``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    big, little = Space("A", gamma), Space("A0", gamma)
    cbig, clittle = Space("CA", gamma), Space("CA0", gamma)
    entries = [
        WitnessEntry("g", witness_g(gamma), gamma,
                     {big: "out", little: "out", cbig: "in", clittle: "out"},
                     "(1-z)/(1+z)^(gamma+1): the growth space sits properly inside its "
                     "optimal domain, and the little optimal domain misses g"),
    ]
    beta = gamma + 1.0
    entries.append(WitnessEntry(
        f"f_{beta:g}", power_of_one_minus(beta), gamma,
        {Space("A", beta): "in", big: "out", cbig: "out", clittle: "out"},
        "(1-z)^(-beta) with beta = gamma+1: larger growth spaces are not inside the "
        "optimal domain"))
    entries.append(WitnessEntry(
        "phi", PHI, gamma,
        {big: _verdict(gamma >= 1), little: _verdict(gamma > 1),
         cbig: _verdict(gamma >= 1), clittle: _verdict(gamma > 1)},
        "1/(1-z), the fixed point of C"))
    for m in range(1, math.ceil(gamma) + 2):
        entries.append(WitnessEntry(
            f"e_{m}", eigenfunction(m), gamma,
            {big: _verdict(m <= gamma), little: _verdict(m < gamma),
             cbig: _verdict(m <= gamma), clittle: _verdict(m < gamma)},
            f"z^{m - 1}(1-z)^(-{m}), eigenfunction of C for 1/{m}"))
    everywhere = {big: "in", little: "in", cbig: "in", clittle: "in"}
    entries.append(WitnessEntry("one", ONE, gamma, dict(everywhere), "constant function"))
    entries.append(WitnessEntry("poly", parse_expression("1 + 2*z - 3*z^4 + 0.5i*z^7"), gamma,
                                dict(everywhere), "a polynomial"))
    entries.append(WitnessEntry("C(1)", apply_cesaro(ONE), gamma, dict(everywhere),
                                "C(1) = log(1/(1-z))/z, logarithmic growth only"))
    return entries


def check_entry(entry: WitnessEntry, opts: GridOptions = DEFAULT_GRID) -> dict:
    """Observed verdicts for every space named in ``entry.expected``."""
    out = {}
    cache = {}
    for space in entry.expected:
        if space.kind in ("A", "A0"):
            if space.gamma not in cache:
                cache[space.gamma] = classify_membership(entry.model, space.gamma, opts)
            both = cache[space.gamma]
            out[space] = both.big if space.kind == "A" else both.little
        else:
            which = "big" if space.kind == "CA" else "little"
            out[space] = optimal_domain_membership(entry.model, space.gamma, which, opts)
    return out


def catalog_rows(entries) -> list:
    return [{"name": e.name, "gamma": e.gamma, "space": str(space), "expected": verdict,
             "provenance": e.provenance}
            for e in entries for space, verdict in e.expected.items()]


def catalog_json(gamma: float, meta: dict | None = None) -> str:
    return json.dumps({"meta": dict(meta or {}, gamma=gamma),
                       "rows": catalog_rows(witness_catalog(gamma))}, indent=2)
