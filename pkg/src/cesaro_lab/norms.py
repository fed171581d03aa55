"""Weighted sup norms ``sup (1-|z|)^gamma |f(z)|`` and growth-space membership.

The probe grid uses radii ``r_j = 1 - 2**(-j/4)`` and, per radius, a
uniform angle set that doubles until the weighted maximum settles.  Values
are always actual evaluations, so every estimate is a lower bound on the
true norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from cesaro_lab.analytic import (
    DEFAULT_MAX_COEFFS,
    AtomSum,
    CoefficientBudgetExceeded,
    FunctionModel,
    GeneratorSeries,
    circle_values,
    log1p,
)

__all__ = [
    "GridOptions",
    "NormEstimate",
    "ProfileRow",
    "Space",
    "MembershipVerdict",
    "Membership",
    "grid_radii",
    "weighted_sup_norm",
    "monomial_norm",
    "boundary_profile",
    "classify_membership",
    "weighted_value",
]


@dataclass(frozen=True)
class GridOptions:
    """Probe grid and budget settings.

    ``j_max`` bounds the radii for plain coefficient streams (their partial
    sums need ``~30/(1-r)`` terms); closed forms and polynomials go out to
    ``j_max_closed``.
    """

    j_max: int = 64
    j_max_closed: int = 96
    angles_init: int = 256
    angles_max: int = 4096
    rel_tol: float = 1e-3
    tail_rel_tol: float = 1e-10
    max_coeffs: int = DEFAULT_MAX_COEFFS
    refine: bool = True
    slope_window: int = 12
    slope_dead_zone: float = 0.05

    @property
    def r_max(self) -> float:
        return 1.0 - 2.0 ** (-self.j_max / 4.0)

    @classmethod
    def from_pairs(cls, text: str | None) -> "GridOptions":
        """Parse ``"j_max=60,angles_init=128"``; unknown keys raise ``KeyError``."""
        opts = cls()
        if not text:
            return opts
        known = {f.name: f.type for f in fields(cls)}
        updates = {}
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep:
                raise ValueError(f"expected key=value, got {item!r}")
            if key not in known:
                raise KeyError(key)
            default = getattr(opts, key)
            if isinstance(default, bool):
                updates[key] = value.strip().lower() in ("1", "true", "yes", "on")
            elif isinstance(default, int):
                updates[key] = int(value)
            else:
                updates[key] = float(value)
        return replace(opts, **updates)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_GRID = GridOptions()


@dataclass(frozen=True)
class NormEstimate:
    value: float
    argmax_z: complex
    radial_resolution: int
    angular_resolution: int
    stable: bool
    gamma: float = 1.0
    reliable: bool = True

    def __float__(self):
        return float(self.value)


class ProfileRow(NamedTuple):
    r: float
    m_r: float
    reliable: bool
    theta: float = 0.0
    angles: int = 0
    converged: bool = True  # angle doubling settled within rel_tol
    spread: float = 0.0  # change at the last angle doubling


class Space(NamedTuple):
    """A named space: ``A`` / ``A0`` growth spaces or optimal domains ``CA`` / ``CA0``."""

    kind: str
    gamma: float

    def __str__(self):
        g = f"{self.gamma:g}"
        return {
            "A": f"A^{{-{g}}}",
            "A0": f"A_0^{{-{g}}}",
            "CA": f"[C,A^{{-{g}}}]",
            "CA0": f"[C,A_0^{{-{g}}}]",
        }[self.kind]


@dataclass(frozen=True)
class MembershipVerdict:
    space: Space
    verdict: str  # "in" | "out" | "indeterminate"
    method: str  # "analytic" | "numeric"
    evidence: dict = field(default_factory=dict, compare=False)


class Membership(NamedTuple):
    big: MembershipVerdict
    little: MembershipVerdict


def grid_radii(f: FunctionModel, opts: GridOptions = DEFAULT_GRID) -> np.ndarray:
    j_top = opts.j_max_closed if (f.closed_form or f.is_polynomial) else opts.j_max
    j = np.arange(j_top + 1)
    return 1.0 - 2.0 ** (-j / 4.0)


def weighted_value(f: FunctionModel, gamma: float, z: complex, opts: GridOptions = DEFAULT_GRID) -> float:
    """``(1-|z|)^gamma |f(z)|`` at a single point."""
    r = abs(z)
    theta = math.atan2(z.imag, z.real)
    vals, _ = circle_values(f, r, 1, angles=[theta], rel_tol=opts.tail_rel_tol,
                            max_coeffs=opts.max_coeffs, r_max=opts.r_max)
    zz = r * np.exp(1j * np.array([theta]))
    return float((1.0 - np.abs(zz[0])) ** gamma * abs(vals[0]))


def _uses_axis_only(f: FunctionModel, opts: GridOptions) -> bool:
    if f.nonnegative_coefficients:
        return True
    if isinstance(f, GeneratorSeries) and not f.closed_form:
        count = f.degree + 1 if f.degree is not None else min(opts.max_coeffs, 2048)
        try:
            # only a certificate when every coefficient used is checked
            return f.degree is not None and f.nonnegative_upto(count)
        except CoefficientBudgetExceeded:
            return False
    return False


def _series_nonneg(f: FunctionModel, count: int) -> bool:
    if not isinstance(f, GeneratorSeries) or f.closed_form:
        return False
    try:
        return f.nonnegative_upto(count)
    except CoefficientBudgetExceeded:
        return False


def _radius_max(f, gamma, r, opts, axis_only):
    """Max of the weighted modulus on ``|z| = r``: ``(value, theta, angles, converged, spread)``."""
    if r == 0.0 or axis_only:
        vals, _ = circle_values(f, r, 1, rel_tol=opts.tail_rel_tol,
                                max_coeffs=opts.max_coeffs, r_max=opts.r_max)
        return (1.0 - r) ** gamma * abs(vals[0]), 0.0, 1, True, 0.0
    m = opts.angles_init
    best = None
    while True:
        vals, _ = circle_values(f, r, m, rel_tol=opts.tail_rel_tol,
                                max_coeffs=opts.max_coeffs, r_max=opts.r_max)
        thetas = 2.0 * math.pi * np.arange(m) / m
        z = r * np.exp(1j * thetas)
        w = (1.0 - np.abs(z)) ** gamma * np.abs(vals)
        k = int(np.argmax(w))
        current = (float(w[k]), float(thetas[k]), m)
        spread = 0.0 if best is None else abs(current[0] - best[0])
        if best is not None and spread <= opts.rel_tol * max(current[0], 1e-300):
            return max(current, best) + (True, spread)
        best = current if best is None or current[0] >= best[0] else best
        if m >= opts.angles_max:
            return best + (False, spread)
        m *= 2


def _scan(f, gamma, radii, opts, axis_only):
    rows = []
    for r in radii:
        try:
            val, theta, m, ok, spread = _radius_max(f, gamma, float(r), opts, axis_only)
            rows.append(ProfileRow(float(r), val, True, theta, m, ok, spread))
        except CoefficientBudgetExceeded:
            rows.append(ProfileRow(float(r), float("nan"), False, 0.0, 0))
    return rows


def _refine(f, gamma, r0, theta0, radii, j, m, opts, axis_only):
    """Local search around a grid maximum; returns ``(value, z)``.

    Alternating golden-section sweeps in ``log(1-r)`` and ``theta``, then a
    simplex polish for cheap evaluators.  Only improvements are kept, so
    the result never drops below the grid value.
    """
    def wval(r, theta):
        try:
            return weighted_value(f, gamma, r * complex(math.cos(theta), math.sin(theta)), opts)
        except CoefficientBudgetExceeded:
            return -1.0

    cheap = f.closed_form or f.is_polynomial
    best_r, best_t = r0, theta0
    best_v = wval(r0, theta0)
    lo_r = radii[max(j - 1, 0)]
    hi_r = radii[min(j + 1, len(radii) - 1)]
    s_lo = math.log(1.0 - hi_r)
    s_hi = math.log(1.0 - lo_r) if lo_r > 0 else 0.0
    dtheta = 2.0 * math.pi / max(m, 1)
    for _ in range(8 if cheap else 2):
        before = best_v
        if hi_r > lo_r:
            res = minimize_scalar(lambda s: -wval(1.0 - math.exp(s), best_t),
                                  bounds=(s_lo, s_hi), method="bounded",
                                  options={"xatol": 1e-12})
            if -res.fun > best_v:
                best_v, best_r = -res.fun, 1.0 - math.exp(res.x)
        if axis_only or best_r == 0.0:
            break
        res = minimize_scalar(lambda t: -wval(best_r, t),
                              bounds=(best_t - dtheta, best_t + dtheta), method="bounded",
                              options={"xatol": 1e-13})
        if -res.fun > best_v:
            best_v, best_t = -res.fun, float(res.x)
        if best_v - before <= 1e-15 * best_v:
            break
    if cheap and not axis_only and best_r > 0.0:
        res = minimize(lambda x: -wval(1.0 - math.exp(x[0]), x[1]),
                       [math.log(1.0 - best_r), best_t], method="Nelder-Mead",
                       bounds=[(s_lo, s_hi), (best_t - dtheta, best_t + dtheta)],
                       options={"xatol": 1e-13, "fatol": 1e-17, "maxiter": 400})
        if -res.fun > best_v:
            best_v = -res.fun
            best_r, best_t = 1.0 - math.exp(res.x[0]), float(res.x[1])
    return best_v, best_r * complex(math.cos(best_t), math.sin(best_t))


def weighted_sup_norm(f: FunctionModel, gamma: float, opts: GridOptions = DEFAULT_GRID) -> NormEstimate:
    """Lower-bound estimate of ``||f||_{-gamma}``.

    ``stable`` is set when every radius was evaluated within budget, the
    estimate did not move by more than ``rel_tol`` when the outermost
    doubling of ``1/(1-r)`` was added, and angle doubling converged.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    radii = grid_radii(f, opts)
    axis_only = _uses_axis_only(f, opts)
    rows = _scan(f, gamma, radii, opts, axis_only)
    good = [(i, row) for i, row in enumerate(rows) if row.reliable]
    if not good:
        return NormEstimate(0.0, 0j, len(radii), 0, False, gamma, False)
    j, best = max(good, key=lambda item: item[1].m_r)
    value = best.m_r
    z = best.r * complex(math.cos(best.theta), math.sin(best.theta))
    inner = [row.m_r for i, row in good if i < len(rows) - 4]
    inner_max = max(inner) if inner else 0.0
    reliable = len(good) == len(rows)
    ang_res = max(row.angles for _, row in good)
    # an unsettled row matters only if its uncertainty could carry it past the estimate
    converged = all(row.converged or row.m_r + 10.0 * row.spread < value for _, row in good)
    stable = reliable and converged and (value - inner_max) <= opts.rel_tol * max(value, 1e-300)
    if opts.refine and value > 0:
        v, zr = _refine(f, gamma, best.r, best.theta, radii, j, best.angles, opts, axis_only)
        if v > value:
            value, z = v, zr
    if value > 0:
        # report the value re-evaluated at the returned point
        value = max(weighted_value(f, gamma, z, opts), 0.0) if abs(z) > 0 else value
    return NormEstimate(float(value), complex(z), len(radii), int(ang_res), bool(stable), gamma,
                        reliable)


def monomial_norm(k: int, gamma: float) -> float:
    """``sup_r (1-r)^gamma r^k``, attained at ``r = k/(k+gamma)``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1.0
    return math.exp(gamma * math.log(gamma) + k * math.log(k) - (k + gamma) * math.log(k + gamma))


def boundary_profile(f: FunctionModel, gamma: float, radii: Optional[Sequence[float]] = None,
                     opts: GridOptions = DEFAULT_GRID) -> list:
    """Rows ``(r, m(r), reliable)`` with ``m(r) = (1-r)^gamma max_theta |f(r e^{i theta})|``."""
    if radii is None:
        radii = grid_radii(f, opts)
    for r in radii:
        if not 0.0 <= r < 1.0:
            raise ValueError(f"radius {r} outside [0, 1)")
    axis_only = _uses_axis_only(f, opts)
    return _scan(f, gamma, radii, opts, axis_only)


# ---------------------------------------------------------------------------
# membership

_UNIT_TOL = 1e-15


def _atom_boundary_orders(atom):
    """Map boundary direction ``a`` -> (beta, q) for one atom."""
    orders = {}
    for a, beta in atom.factors:
        if abs(abs(a) - 1.0) <= _UNIT_TOL:
            orders[a] = (beta, 0)
    if atom.log_power:
        key = next((a for a in orders if a == 1), 1 + 0j)
        beta = orders.get(key, (0.0, 0))[0]
        orders[key] = (beta, atom.log_power)
    return orders


def _leading_coefficient(atom, a):
    zs = a.conjugate()
    c = atom.scale * zs ** atom.power
    for b, beta in atom.factors:
        if b != a:
            c *= (1.0 - b * zs) ** (-beta)
    if atom.log_power and a != 1:
        c *= (-complex(log1p(-zs))) ** atom.log_power
    return complex(c)


def _grows(order):
    beta, q = order
    return beta > 0 or (beta == 0 and q > 0)


def _analytic_orders(f: AtomSum):
    """Worst growth order per boundary point, or ``None`` if leading terms cancel."""
    points: dict = {}
    for atom in f.atoms:
        for a, order in _atom_boundary_orders(atom).items():
            points.setdefault(a, []).append((order, atom))
    result = {}
    for a, entries in points.items():
        top = max(order for order, _ in entries)
        if not _grows(top):
            continue
        tied = [atom for order, atom in entries if order == top]
        if len(tied) > 1:
            leads = [_leading_coefficient(atom, a) for atom in tied]
            if abs(sum(leads)) <= 1e-12 * sum(abs(c) for c in leads):
                return None
        result[a] = top
    return result


def _analytic_verdicts(orders, gamma, big_space, little_space):
    big_in, little_in = True, True
    worst = None
    for a, (beta, q) in orders.items():
        if beta > gamma or (beta == gamma and q > 0):
            big_in = False
        if beta >= gamma:
            little_in = False
        if worst is None or (beta, q) > worst[1]:
            worst = (a, (beta, q))
    if worst is None:
        evidence = {"rule": "no growing boundary singularity", "gamma": gamma}
    else:
        a, (beta, q) = worst
        evidence = {"pole": complex(a).conjugate(), "exponent": beta, "log_power": q,
                    "gamma": gamma,
                    "rule": f"exponent {beta:g} vs gamma {gamma:g}, log power {q}"}
    return Membership(
        MembershipVerdict(big_space, "in" if big_in else "out", "analytic", evidence),
        MembershipVerdict(little_space, "in" if little_in else "out", "analytic", evidence),
    )


def _numeric_verdicts(f, gamma, opts, big_space, little_space):
    rows = [row for row in boundary_profile(f, gamma, opts=opts) if row.reliable]
    window = rows[-opts.slope_window:]
    evidence = {"radii": [row.r for row in window], "window": len(window)}
    if window and all(row.m_r == 0.0 for row in window):
        evidence["slope"] = -math.inf
        return Membership(MembershipVerdict(big_space, "in", "numeric", evidence),
                          MembershipVerdict(little_space, "in", "numeric", evidence))
    if len(window) < 3 or any(row.m_r <= 0 for row in window):
        return Membership(MembershipVerdict(big_space, "indeterminate", "numeric", evidence),
                          MembershipVerdict(little_space, "indeterminate", "numeric", evidence))
    x = np.array([-math.log(1.0 - row.r) for row in window])
    y = np.log([row.m_r for row in window])
    slope = float(np.polyfit(x, y, 1)[0])
    evidence["slope"] = slope
    dz = opts.slope_dead_zone
    if slope < -dz:
        big, little = "in", "in"
    elif slope > dz:
        big, little = "out", "out"
    else:
        m = np.array([row.m_r for row in window])
        d = np.diff(m)
        jitter = 1e-6 * np.max(m)
        monotone = bool(np.all(d >= -jitter) or np.all(d <= jitter))
        evidence["monotone"] = monotone
        big, little = ("in", "out") if monotone else ("indeterminate", "indeterminate")
    return Membership(MembershipVerdict(big_space, big, "numeric", evidence),
                      MembershipVerdict(little_space, little, "numeric", evidence))


def classify_membership(f: FunctionModel, gamma: float, opts: GridOptions = DEFAULT_GRID,
                        method: str = "auto", spaces=None) -> Membership:
    """Decide ``f`` against ``A^{-gamma}`` and ``A_0^{-gamma}``.

    Atom sums use the exponent rule at each boundary singularity: with net
    exponent ``beta`` and log power ``q``, ``f`` is in the big space iff
    ``beta < gamma`` or ``beta == gamma and q == 0``, and in the little
    space iff ``beta < gamma``.  Coinciding singularities whose leading
    terms cancel, and all coefficient streams, use the numeric trend of the
    boundary profile instead.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    big_space, little_space = spaces or (Space("A", gamma), Space("A0", gamma))
    if method not in ("auto", "analytic", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    if method != "numeric" and isinstance(f, AtomSum):
        orders = _analytic_orders(f)
        if orders is not None:
            return _analytic_verdicts(orders, gamma, big_space, little_space)
        if method == "analytic":
            raise ValueError("leading boundary terms cancel; analytic rule does not apply")
    elif method == "analytic":
        raise ValueError("analytic rule needs an atom sum")
    return _numeric_verdicts(f, gamma, opts, big_space, little_space)
