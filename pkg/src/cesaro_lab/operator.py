"""The Cesàro operator ``C`` acting on coefficient streams.

``C f`` has coefficients ``(1/(n+1)) sum_{k<=n} f^(k)``.  Every operator
image is a lazy :class:`GeneratorSeries`; closed-form identities for
particular images are kept as test oracles elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from cesaro_lab import _kernels
from cesaro_lab.analytic import (
    AnalyticError,
    AtomSum,
    DivisionByZError,
    FunctionModel,
    GeneratorSeries,
    coefficients,
    combine,
    derived_series,
    integrate,
    series_from_coefficients,
)

__all__ = [
    "SingularDiagonalError",
    "cesaro_coefficients",
    "cesaro_iterate",
    "apply_cesaro",
    "apply_inverse_cesaro",
    "cesaro_power",
    "cesaro_mean",
    "solve_lambda_resolvent",
    "solve_identity_minus_C",
    "theoretical_norm_bound",
    "norm_bound_profile",
    "Step",
    "OperatorPipeline",
]


class SingularDiagonalError(AnalyticError):
    """``lam`` equals a diagonal entry ``1/(m+1)`` of the lower-triangular matrix of C."""

    def __init__(self, lam, m):
        super().__init__(f"lambda = {lam} equals the diagonal entry 1/(m+1) at m = {m}")
        self.lam = lam
        self.m = m


def cesaro_coefficients(c: np.ndarray) -> np.ndarray:
    return _kernels.cesaro_step(np.ascontiguousarray(c, dtype=np.complex128))


def _inverse_coefficients(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=np.complex128)
    n = np.arange(g.size, dtype=np.float64)
    out = (n + 1.0) * g
    out[1:] -= n[1:] * g[:-1]
    return out


def apply_cesaro(f: FunctionModel) -> GeneratorSeries:
    """``C f`` as a coefficient stream (compensated running prefix sum)."""
    return derived_series(f, cesaro_coefficients, nonnegative=f.nonnegative_coefficients,
                          label="C f")


def apply_inverse_cesaro(g: FunctionModel) -> GeneratorSeries:
    """``C^{-1} g``: ``f^(n) = (n+1) g^(n) - n g^(n-1)``."""
    degree = None if g.degree is None else g.degree + 1
    return derived_series(g, _inverse_coefficients, degree=degree, label="C^-1 g")


def cesaro_iterate(c: np.ndarray, n: int, mode: str = "power") -> np.ndarray:
    """Coefficients of ``C^n f``, ``C_[n] f`` (``mean``) or ``C^{n+1} f - C^n f`` (``difference``)."""
    code = {"power": 0, "mean": 1, "difference": 2}[mode]
    return _kernels.cesaro_iterate(np.ascontiguousarray(c, dtype=np.complex128), int(n), code)


def cesaro_power(f: FunctionModel, n: int) -> GeneratorSeries:
    """``C^n f`` (``n >= 0``)."""
    if n < 0:
        raise ValueError("power must be nonnegative")
    power = int(n)
    return derived_series(f, lambda c: cesaro_iterate(c, power),
                          degree=f.degree if power == 0 else None,
                          nonnegative=f.nonnegative_coefficients, label=f"C^{power} f")


def cesaro_mean(f: FunctionModel, n: int) -> GeneratorSeries:
    """``(1/n) sum_{m=1}^n C^m f``, by fresh iteration."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    count = int(n)
    return derived_series(f, lambda c: cesaro_iterate(c, count, "mean"),
                          nonnegative=f.nonnegative_coefficients, label=f"C_[{count}] f")


def _check_diagonal(lam: complex, n_top: int) -> None:
    if lam.imag != 0 or lam.real <= 0:
        return
    m = round(1.0 / lam.real - 1.0)
    if 0 <= m <= n_top and abs(lam.real - 1.0 / (m + 1)) <= 4e-16 / (m + 1):
        raise SingularDiagonalError(lam, int(m))


def solve_lambda_resolvent(h: FunctionModel, lam, N: int) -> GeneratorSeries:
    """Degree-``N`` section of the formal solution of ``(lam I - C) f = h``.

    The system is lower triangular, so these coefficients do not depend on
    ``N``: the section of the formal inverse is the inverse of the section.
    """
    lam = complex(lam)
    if N < 0:
        raise ValueError("N must be nonnegative")
    _check_diagonal(lam, N)
    hc = np.ascontiguousarray(coefficients(h, N), dtype=np.complex128)
    f = _kernels.resolvent_substitution(hc, lam)
    if not np.all(np.isfinite(f)):
        raise AnalyticError("resolvent coefficients overflowed")
    return series_from_coefficients(f, polynomial=True, label=f"resolvent({lam}, {N})")


def solve_identity_minus_C(h: FunctionModel) -> GeneratorSeries:
    """Solve ``(I - C) f = h`` with ``f = h + phi * J(h/z)``; needs ``h(0) = 0``."""
    c0 = h.value_at_zero()
    if isinstance(h, AtomSum):
        if c0 != 0:
            raise DivisionByZError(f"h(0) = {c0}; the range of I - C is h(0) = 0")
    elif abs(c0) > 1e-12:
        raise DivisionByZError(f"h(0) = {c0}; the range of I - C is h(0) = 0")
    inner = combine(integrate(combine(h, op="divide_by_z")), op="multiply_by_phi")
    return combine(h, inner, "add")


def _phi_gamma(s: np.ndarray, gamma: float) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    out = np.empty_like(s)
    zero = s == 0
    out[zero] = gamma
    t = s[~zero]
    # 1 - (1-s)^gamma without cancellation; log1p(-1) = -inf is intended
    with np.errstate(divide="ignore"):
        out[~zero] = -np.expm1(gamma * np.log1p(-t)) / t
    return out


def norm_bound_profile(gamma: float, points: int = 2049):
    """``(s, phi(s))`` on a uniform grid of ``[0, 1]``."""
    s = np.linspace(0.0, 1.0, points)
    return s, _phi_gamma(s, gamma)


def theoretical_norm_bound(gamma: float, points: int = 2049) -> float:
    """``max{1, M/gamma}`` with ``M = sup_{[0,1]} (1 - (1-s)^gamma)/s``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    s, phi = norm_bound_profile(gamma, points)
    k = int(np.argmax(phi))
    best = float(phi[k])
    lo, hi = s[max(k - 1, 0)], s[min(k + 1, s.size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -_phi_gamma(np.array([x]), gamma)[0],
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    return max(1.0, best / gamma)


class Step(NamedTuple):
    kind: str  # apply_C | apply_C_inverse | resolvent | mean | power
    arg: object = None
    size: int | None = None


_STEP_KINDS = ("apply_C", "apply_C_inverse", "resolvent", "mean", "power")


@dataclass(frozen=True)
class OperatorPipeline:
    """An immutable chain of operator steps applied to ``base``.

    ``resolvent`` steps carry ``(lam, N)`` and produce a degree-``N`` section.
    """

    base: FunctionModel
    steps: tuple = ()

    def __post_init__(self):
        for step in self.steps:
            if step.kind not in _STEP_KINDS:
                raise ValueError(f"unknown step {step.kind!r}")
            if step.kind == "resolvent" and step.size is None:
                raise ValueError("resolvent step needs a section size")

    def then(self, kind: str, arg=None, size=None) -> "OperatorPipeline":
        return OperatorPipeline(self.base, self.steps + (Step(kind, arg, size),))

    @cached_property
    def realized(self) -> FunctionModel:
        f = self.base
        for step in self.steps:
            if step.kind == "apply_C":
                f = apply_cesaro(f)
            elif step.kind == "apply_C_inverse":
                f = apply_inverse_cesaro(f)
            elif step.kind == "mean":
                f = cesaro_mean(f, int(step.arg))
            elif step.kind == "power":
                f = cesaro_power(f, int(step.arg))
            else:
                f = solve_lambda_resolvent(f, step.arg, int(step.size))
        return f

    def coefficient(self, n: int) -> complex:
        return complex(coefficients(self.realized, n)[n])

    def __str__(self):
        parts = []
        for step in self.steps:
            if step.kind == "resolvent":
                parts.append(f"resolvent({step.arg}, N={step.size})")
            elif step.arg is None:
                parts.append(step.kind)
            else:
                parts.append(f"{step.kind}({step.arg})")
        return " -> ".join(["base"] + parts)

