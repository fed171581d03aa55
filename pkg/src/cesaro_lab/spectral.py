"""Exact spectra of C on growth spaces and finite-section resolvent probes."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from cesaro_lab.analytic import (
    AtomSum,
    FunctionModel,
    coefficients,
    monomial,
    power_of_one_minus,
    series_from_coefficients,
)
from cesaro_lab.norms import DEFAULT_GRID, GridOptions, MembershipVerdict, classify_membership, weighted_sup_norm
from cesaro_lab.operator import cesaro_coefficients, solve_lambda_resolvent

__all__ = [
    "SpectrumDescriptor",
    "reference_spectrum",
    "default_probes",
    "resolvent_probe_norm",
    "probe_norm_ladder",
    "PortraitRow",
    "PortraitTable",
    "portrait",
    "off_diagonal",
    "eigenfunction",
    "EigenReport",
    "verify_eigenfunction",
    "DEFAULT_SECTIONS",
    "PROBE_SEED",
]

DEFAULT_SECTIONS = (128, 512, 2048)
PROBE_SEED = 20211
PERTURBATION = 1e-9


@dataclass(frozen=True)
class SpectrumDescriptor:
    """Closed disk ``|lam - c| <= R`` with ``c = R = 1/(2 gamma)`` plus eigenvalues ``1/m``."""

    gamma: float
    space: str
    disk_center: float
    disk_radius: float
    eigen_indices: tuple

    @property
    def eigenvalues(self) -> tuple:
        return tuple(1.0 / m for m in self.eigen_indices)

    def _on_eigenvalue(self, lam: complex, tol: float) -> bool:
        return any(abs(lam - 1.0 / m) <= tol for m in self.eigen_indices)

    def contains(self, lam, tol: float = 1e-12) -> bool:
        lam = complex(lam)
        return abs(lam - self.disk_center) <= self.disk_radius + tol or self._on_eigenvalue(lam, tol)

    def classify(self, lam, tol: float = 1e-12) -> str:
        """``inside`` (open disk or eigenvalue), ``boundary`` (circle) or ``outside``."""
        lam = complex(lam)
        if self._on_eigenvalue(lam, tol):
            return "inside"
        d = abs(lam - self.disk_center)
        if abs(d - self.disk_radius) <= tol:
            return "boundary"
        return "inside" if d < self.disk_radius else "outside"


def reference_spectrum(gamma: float, space: str = "big") -> SpectrumDescriptor:
    """Spectrum of C on ``A^{-gamma}`` (``big``) or ``A_0^{-gamma}`` (``little``).

    Both spaces share the disk; the point spectrum is ``{1/m : m <= gamma}``
    on the big space and ``{1/m : m < gamma}`` on the little one.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if space not in ("big", "little"):
        raise ValueError("space must be 'big' or 'little'")
    top = math.floor(gamma)
    if space == "little" and top == gamma:
        top -= 1
    c = 1.0 / (2.0 * gamma)
    return SpectrumDescriptor(gamma, space, c, c, tuple(range(1, int(top) + 1)))


def default_probes(seed: int = PROBE_SEED, count: int = 4, degree: int = 8) -> list:
    """``1, z, z^2`` and ``count`` seeded random polynomials of degree ``<= degree``."""
    rng = np.random.default_rng(seed)
    probes = [monomial(0), monomial(1), monomial(2)]
    for _ in range(count):
        c = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        probes.append(series_from_coefficients(c, polynomial=True, label="random probe"))
    return probes


def off_diagonal(lam, eps: float = PERTURBATION, n_top: int = 1 << 20) -> complex:
    """Shift ``lam`` by ``eps`` if it sits on a diagonal value ``1/(m+1)``."""
    lam = complex(lam)
    if lam.imag == 0 and lam.real > 0:
        m = round(1.0 / lam.real - 1.0)
        if 0 <= m <= n_top and abs(lam.real - 1.0 / (m + 1)) <= 1e-15:
            return lam + eps
    return lam


def resolvent_probe_norm(lam, gamma: float, N: int, probes: Optional[Sequence[FunctionModel]] = None,
                         opts: GridOptions = DEFAULT_GRID) -> float:
    """``max_p ||section_N (lam - C)^{-1} p|| / ||p||`` in the ``-gamma`` norm (a lower bound)."""
    if probes is None:
        probes = default_probes()
    best = 0.0
    for p in probes:
        base = weighted_sup_norm(p, gamma, opts).value
        if base == 0.0:
            continue
        f = solve_lambda_resolvent(p, lam, N)
        best = max(best, weighted_sup_norm(f, gamma, opts).value / base)
    return best


def probe_norm_ladder(lam, gamma: float, sections: Sequence[int] = DEFAULT_SECTIONS,
                      probes=None, opts: GridOptions = DEFAULT_GRID) -> list:
    """``nu_N`` for increasing ``N``, as a running maximum so the ladder never decreases."""
    out = []
    running = 0.0
    for n in sorted(sections):
        running = max(running, resolvent_probe_norm(lam, gamma, n, probes, opts))
        out.append(running)
    return out


class PortraitRow(NamedTuple):
    lam: complex
    nu: tuple
    classification: str
    growth_ratio: float


@dataclass(frozen=True)
class PortraitTable:
    gamma: float
    space: str
    sections: tuple
    rows: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def to_csv(self, header: Optional[dict] = None) -> str:
        buf = io.StringIO()
        for key, value in (header or {}).items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re_lambda", "im_lambda"] + [f"nu_{n}" for n in self.sections]
                        + ["growth_ratio", "classification"])
        for row in self.rows:
            writer.writerow([f"{row.lam.real:.9g}", f"{row.lam.imag:.9g}"]
                            + [f"{v:.9g}" for v in row.nu]
                            + [f"{row.growth_ratio:.9g}", row.classification])
        return buf.getvalue()


def portrait(re_range, im_range, step: float, gamma: float,
             sections: Sequence[int] = DEFAULT_SECTIONS, space: str = "big",
             probes=None, opts: GridOptions = DEFAULT_GRID) -> PortraitTable:
    """Probe-norm ladder on a rectangular grid of ``lam`` values.

    Grid points on a diagonal value ``1/(m+1)`` are nudged by ``1e-9``;
    the classification uses the unperturbed point.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    desc = reference_spectrum(gamma, space)
    sections = tuple(sorted(sections))
    if probes is None:
        probes = default_probes()

    def axis(lo, hi):
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(count)

    rows = []
    for im in axis(*im_range):
        for re in axis(*re_range):
            lam = complex(float(re), float(im))
            nu = probe_norm_ladder(off_diagonal(lam), gamma, sections, probes, opts)
            ratio = nu[-1] / nu[0] if nu[0] > 0 else math.inf
            rows.append(PortraitRow(lam, tuple(nu), desc.classify(lam), ratio))
    return PortraitTable(gamma, space, sections, tuple(rows),
                         {"probe_seed": PROBE_SEED, "perturbation": PERTURBATION})


def eigenfunction(m: int) -> AtomSum:
    """``e_m = z^{m-1} (1-z)^{-m}``."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    return power_of_one_minus(float(m), power=m - 1)


@dataclass(frozen=True)
class EigenReport:
    m: int
    gamma: float
    n_max: int
    residual: float  # max_n |(C e - e/m)^(n)| / max(1, |e^(n)|)
    absolute_residual: float
    big: MembershipVerdict
    little: MembershipVerdict
    expected_big: str
    expected_little: str

    @property
    def ok(self) -> bool:
        return (self.residual <= 1e-12 and self.big.verdict == self.expected_big
                and self.little.verdict == self.expected_little)


def verify_eigenfunction(m: int, gamma: float, n_max: int = 2000,
                         opts: GridOptions = DEFAULT_GRID) -> EigenReport:
    """Check ``C e_m = e_m / m`` and the membership of ``e_m`` in both spaces.

    The residual is measured per coefficient relative to ``max(1, |e^(n)|)``
    because the coefficients of ``e_m`` grow like ``n^{m-1}``.
    """
    e = eigenfunction(m)
    c = np.asarray(coefficients(e, n_max))
    diff = np.abs(cesaro_coefficients(c) - c / m)
    residual = float(np.max(diff / np.maximum(1.0, np.abs(c))))
    verdicts = classify_membership(e, gamma, opts)
    return EigenReport(m, gamma, n_max, residual, float(np.max(diff)), verdicts.big,
                       verdicts.little, "in" if m <= gamma else "out",
                       "in" if m < gamma else "out")
