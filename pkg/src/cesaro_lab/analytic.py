"""Analytic functions on the unit disc.

Two representations share one interface:

* :class:`AtomSum` -- a finite sum of closed-form atoms
  ``s * z**p * prod_i (1 - a_i z)**(-beta_i) * log(1/(1-z))**q`` with
  ``|a_i| <= 1``.  Evaluation is exact up to rounding, which is what the
  boundary behaviour of witness functions needs.
* :class:`GeneratorSeries` -- a lazily realized stream of Taylor
  coefficients.  Operator images land here.

Values are immutable.  Coefficient caches inside a generator are guarded by
a lock and only ever grow, so concurrent readers see identical numbers.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from cesaro_lab import _kernels

__all__ = [
    "Atom",
    "AtomSum",
    "GeneratorSeries",
    "FunctionModel",
    "log1p",
    "AnalyticError",
    "PoleError",
    "OutOfAlgebraError",
    "CoefficientBudgetExceeded",
    "DivisionByZError",
    "coefficients",
    "evaluate",
    "evaluate_many",
    "combine",
    "differentiate",
    "integrate",
    "truncate",
    "series_from_coefficients",
    "constant",
    "monomial",
    "power_of_one_minus",
    "PHI",
    "ONE",
    "ZERO",
    "DEFAULT_R_MAX",
    "DEFAULT_MAX_COEFFS",
]

DEFAULT_R_MAX = 1.0 - 2.0 ** -16
DEFAULT_MAX_COEFFS = 2 ** 22
_WINDOW = 16


class AnalyticError(ValueError):
    """Base class for errors raised by the function algebra."""


class PoleError(AnalyticError):
    """A factor ``(1 - a z)`` with ``|a| > 1`` was raised to a negative power."""


class OutOfAlgebraError(AnalyticError):
    """The expression has no representation as a finite atom sum."""


class DivisionByZError(AnalyticError):
    """``divide_by_z`` was asked to divide a function with ``f(0) != 0``."""


class CoefficientBudgetExceeded(AnalyticError):
    """Partial sums did not reach the requested tolerance within budget."""

    def __init__(self, message, *, terms=None, tail=None):
        super().__init__(message)
        self.terms = terms
        self.tail = tail


def _as_complex(value) -> complex:
    c = complex(value)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise AnalyticError(f"non-finite value {value!r}")
    return c


# ---------------------------------------------------------------------------
# atoms


def log1p(w) -> np.ndarray:
    """Complex ``log(1 + w)`` accurate near ``w = 0`` (numpy's complex log1p is not)."""
    w = np.asarray(w, dtype=np.complex128)
    u = 1.0 + w
    d = u - 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.log(u) * (w / d)
    return np.where(d == 0, w, out)


@dataclass(frozen=True)
class Atom:
    """``scale * z**power * prod (1 - a z)**(-beta) * log(1/(1-z))**log_power``.

    ``factors`` is a tuple of ``(a, beta)`` pairs sorted by ``a``; equal
    directions are merged and zero exponents dropped by :meth:`make`.
    """

    scale: complex
    power: int = 0
    factors: tuple = ()
    log_power: int = 0

    @classmethod
    def make(cls, scale, power=0, factors=(), log_power=0) -> "Atom":
        scale = _as_complex(scale)
        if power < 0 or int(power) != power:
            raise OutOfAlgebraError(f"monomial power must be a nonnegative integer, got {power}")
        if log_power < 0 or int(log_power) != log_power:
            raise OutOfAlgebraError(f"log power must be a nonnegative integer, got {log_power}")
        merged: dict = {}
        for a, beta in factors:
            a = _as_complex(a)
            beta = float(beta)
            if not math.isfinite(beta):
                raise AnalyticError("non-finite factor exponent")
            if a == 0:
                continue
            if abs(a) > 1.0:
                raise PoleError(f"factor (1 - ({a})*z) has |a| = {abs(a):.6g} > 1")
            merged[a] = merged.get(a, 0.0) + beta
        items = tuple(sorted(((a, b) for a, b in merged.items() if b != 0.0),
                             key=lambda ab: (ab[0].real, ab[0].imag)))
        return cls(scale, int(power), items, int(log_power))

    def key(self):
        return (self.power, self.factors, self.log_power)

    def with_scale(self, scale) -> "Atom":
        return Atom(_as_complex(scale), self.power, self.factors, self.log_power)

    def times(self, other: "Atom") -> "Atom":
        return Atom.make(self.scale * other.scale, self.power + other.power,
                         self.factors + other.factors, self.log_power + other.log_power)

    @property
    def is_monomial(self) -> bool:
        return not self.factors and self.log_power == 0

    def value_at_zero(self) -> complex:
        if self.power == 0 and self.log_power == 0:
            return self.scale
        return 0j

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        out = np.full(z.shape, self.scale, dtype=np.complex128)
        if self.power:
            out = out * z ** self.power
        for a, beta in self.factors:
            base = 1.0 - a * z
            if float(beta).is_integer() and abs(beta) <= 64:
                out = out * base ** (-int(beta))
            else:
                out = out * np.exp(-beta * np.log(base))
        if self.log_power:
            out = out * (-log1p(-z)) ** self.log_power
        return out

    def coefficients(self, count: int) -> np.ndarray:
        """First ``count`` Taylor coefficients, via a first-order ODE recurrence."""
        out = np.zeros(count, dtype=np.complex128)
        if count <= self.power:
            return out
        body = count - self.power
        factors = list(self.factors)
        if self.log_power and not any(a == 1 for a, _ in factors):
            factors.append((1 + 0j, 0.0))
        if not factors:
            series = np.zeros(body, dtype=np.complex128)
            series[0] = 1.0
        else:
            qpoly = np.array([1.0 + 0j])
            for a, _ in factors:
                qpoly = np.convolve(qpoly, np.array([1.0, -a]))
            ppoly = np.zeros(max(len(factors), 1), dtype=np.complex128)
            for i, (a, beta) in enumerate(factors):
                term = np.array([1.0 + 0j])
                for j, (b, _) in enumerate(factors):
                    if j != i:
                        term = np.convolve(term, np.array([1.0, -b]))
                ppoly[: term.size] += a * beta * term
            rpoly = np.array([1.0 + 0j])
            for a, _ in factors:
                if a != 1:
                    rpoly = np.convolve(rpoly, np.array([1.0, -a]))
            series = _kernels.holonomic_series(
                qpoly.astype(np.complex128), ppoly.astype(np.complex128),
                rpoly.astype(np.complex128), self.log_power, body)
            if self.log_power > 1:
                series = series * math.factorial(self.log_power)
        out[self.power:] = self.scale * series
        return out

    def derivative(self) -> list:
        """The derivative as a list of atoms (closed under the algebra)."""
        terms = []
        if self.power:
            terms.append(Atom.make(self.scale * self.power, self.power - 1,
                                   self.factors, self.log_power))
        for a, beta in self.factors:
            terms.append(Atom.make(self.scale * a * beta, self.power,
                                   self.factors + ((a, 1.0),), self.log_power))
        if self.log_power:
            terms.append(Atom.make(self.scale * self.log_power, self.power,
                                   self.factors + ((1 + 0j, 1.0),), self.log_power - 1))
        return terms


def _normalize(atoms) -> tuple:
    acc: dict = {}
    order = []
    for atom in atoms:
        k = atom.key()
        if k not in acc:
            acc[k] = 0j
            order.append(k)
        acc[k] += atom.scale
    out = [Atom(acc[k], k[0], k[1], k[2]) for k in order if acc[k] != 0]
    out.sort(key=lambda at: (at.power, at.log_power, len(at.factors),
                             tuple((a.real, a.imag, b) for a, b in at.factors)))
    return tuple(out)


@dataclass(frozen=True)
class AtomSum:
    """Finite sum of :class:`Atom`; construct through :meth:`of`."""

    atoms: tuple = ()

    @classmethod
    def of(cls, atoms: Sequence[Atom]) -> "AtomSum":
        return cls(_normalize(atoms))

    closed_form = True

    @property
    def is_zero(self) -> bool:
        return not self.atoms

    @property
    def is_polynomial(self) -> bool:
        return all(a.is_monomial for a in self.atoms)

    @property
    def degree(self) -> Optional[int]:
        if not self.is_polynomial:
            return None
        return max((a.power for a in self.atoms), default=0)

    @property
    def nonnegative_coefficients(self) -> bool:
        """Structural sufficient condition for all Taylor coefficients >= 0."""
        for atom in self.atoms:
            if atom.scale.imag != 0 or atom.scale.real <= 0:
                return False
            for a, beta in atom.factors:
                if a.imag != 0 or a.real <= 0 or beta < 0:
                    return False
        return True

    def value_at_zero(self) -> complex:
        return sum((a.value_at_zero() for a in self.atoms), 0j)

    def __call__(self, z):
        return evaluate_many(self, z)

    def __add__(self, other):
        return combine(self, other, "add")

    def __neg__(self):
        return combine(self, -1.0, "scale")

    def __sub__(self, other):
        return combine(self, combine(other, -1.0, "scale"), "add")

    def times(self, other: "AtomSum") -> "AtomSum":
        return AtomSum.of([a.times(b) for a in self.atoms for b in other.atoms])

    def __str__(self):
        from cesaro_lab.expr import to_expression

        return to_expression(self)


# ---------------------------------------------------------------------------
# generator series


class GeneratorSeries:
    """Analytic function given by a deterministic coefficient generator.

    Parameters
    ----------
    block : callable
        ``block(count)`` returns the first ``count`` coefficients as a complex
        array.  It must be prefix-stable: the first ``k`` entries of
        ``block(n)`` equal ``block(k)`` for every ``n >= k``.
    degree : int, optional
        Known polynomial degree; coefficients beyond it are exactly zero.
    limit : int, optional
        Hard length of the stream (array-backed series of unknown tail).
    closed_form : callable, optional
        Vectorized exact evaluator; when present it replaces partial sums.
    growth : float, optional
        Polynomial order estimate ``k`` with ``|f^(n)| = O(n**k)``.
    nonnegative : bool
        Advertised nonnegativity of every coefficient.
    """

    closed_form_eval: Optional[Callable]

    def __init__(self, block: Callable[[int], np.ndarray], *, degree=None, limit=None,
                 closed_form=None, growth=None, nonnegative=False, label=""):
        self._block = block
        self.degree = degree
        self.limit = limit
        self.closed_form_eval = closed_form
        self.growth = growth
        self._nonneg_hint = bool(nonnegative)
        self.label = label
        self._cache = np.zeros(0, dtype=np.complex128)
        self._lock = threading.Lock()

    @property
    def closed_form(self) -> bool:
        return self.closed_form_eval is not None

    @property
    def is_polynomial(self) -> bool:
        return self.degree is not None

    def realized(self, count: int) -> np.ndarray:
        """First ``count`` coefficients (read-only view)."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        if self.degree is not None:
            need = min(count, self.degree + 1)
        else:
            need = count
            if self.limit is not None and count > self.limit:
                raise CoefficientBudgetExceeded(
                    f"series is only known to {self.limit} coefficients, {count} requested",
                    terms=self.limit)
        with self._lock:
            if self._cache.size < need:
                size = max(need, 2 * self._cache.size, 64)
                if self.degree is not None:
                    size = min(size, self.degree + 1)
                if self.limit is not None:
                    size = min(size, self.limit)
                fresh = np.ascontiguousarray(self._block(size), dtype=np.complex128)
                if fresh.shape != (size,):
                    raise AnalyticError("generator returned wrong length")
                fresh.setflags(write=False)
                self._cache = fresh
            cache = self._cache
        if need == count:
            return cache[:count]
        out = np.zeros(count, dtype=np.complex128)
        out[:need] = cache[:need]
        out.setflags(write=False)
        return out

    def nonnegative_upto(self, count: int) -> bool:
        c = self.realized(count)
        return bool(np.all(c.imag == 0) and np.all(c.real >= 0))

    @property
    def nonnegative_coefficients(self) -> bool:
        return self._nonneg_hint

    def value_at_zero(self) -> complex:
        return complex(self.realized(1)[0])

    def __call__(self, z):
        return evaluate_many(self, z)

    def __add__(self, other):
        return combine(self, other, "add")

    def __sub__(self, other):
        return combine(self, combine(other, -1.0, "scale"), "add")

    def __neg__(self):
        return combine(self, -1.0, "scale")

    def __repr__(self):
        tag = self.label or "series"
        return f"GeneratorSeries({tag})"


FunctionModel = Union[AtomSum, GeneratorSeries]


def series_from_coefficients(coeffs, *, polynomial=True, label="") -> GeneratorSeries:
    """Wrap an explicit coefficient array.

    With ``polynomial=True`` the tail is exactly zero; otherwise the stream
    ends at ``len(coeffs)`` and longer requests raise
    :class:`CoefficientBudgetExceeded`.
    """
    arr = np.array(coeffs, dtype=np.complex128)
    arr.setflags(write=False)

    def block(count):
        return arr[:count]

    if polynomial:
        nz = np.flatnonzero(arr)
        degree = int(nz[-1]) if nz.size else 0
        return GeneratorSeries(block, degree=degree, label=label or "polynomial")
    return GeneratorSeries(block, limit=arr.size, label=label or "array")


def _as_series_block(f: FunctionModel) -> Callable[[int], np.ndarray]:
    return lambda count: np.asarray(coefficients(f, count - 1)) if count else np.zeros(0, complex)


def derived_series(f: FunctionModel, transform: Callable[[np.ndarray], np.ndarray], *,
                   degree=None, nonnegative=False, closed_form=None, label="") -> GeneratorSeries:
    """Series whose coefficients are ``transform(coefficients of f)``.

    ``transform`` must act prefix-stably (index ``n`` of the output depends
    only on entries ``0..n`` of the input).
    """
    limit = f.limit if isinstance(f, GeneratorSeries) else None

    def block(count):
        if count == 0:
            return np.zeros(0, dtype=np.complex128)
        return transform(np.asarray(coefficients(f, count - 1)))

    return GeneratorSeries(block, degree=degree, limit=limit, closed_form=closed_form,
                           nonnegative=nonnegative, label=label)


# ---------------------------------------------------------------------------
# constructors


def constant(c) -> AtomSum:
    return AtomSum.of([Atom.make(c)])


def monomial(k: int, c=1.0) -> AtomSum:
    return AtomSum.of([Atom.make(c, k)])


def power_of_one_minus(beta: float, a=1.0, scale=1.0, power=0) -> AtomSum:
    """``scale * z**power * (1 - a z)**(-beta)``."""
    return AtomSum.of([Atom.make(scale, power, ((a, beta),))])


PHI = power_of_one_minus(1.0)
ONE = constant(1.0)
ZERO = AtomSum(())


# ---------------------------------------------------------------------------
# coefficients and evaluation


def coefficients(f: FunctionModel, n_max: int) -> np.ndarray:
    """Taylor coefficients ``f^(0) .. f^(n_max)`` as a complex array."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    count = n_max + 1
    if isinstance(f, AtomSum):
        out = np.zeros(count, dtype=np.complex128)
        for atom in f.atoms:
            out += atom.coefficients(count)
        return out
    return f.realized(count)


def _tail_bound(terms: np.ndarray) -> float:
    """Bound ``sum_{n>N} |c_n| r**n`` from the last computed terms.

    Uses the block ratio ``rho = (max last16 / max previous16)**(1/16)`` and
    a geometric majorant; ``inf`` means the terms are not yet decaying.
    """
    if terms.size < 2 * _WINDOW:
        tail = terms[-_WINDOW:]
        return 0.0 if not np.any(tail) else math.inf
    last = float(np.max(terms[-_WINDOW:]))
    if last == 0.0:
        return 0.0
    prev = float(np.max(terms[-2 * _WINDOW:-_WINDOW]))
    if prev == 0.0:
        return math.inf
    rho = (last / prev) ** (1.0 / _WINDOW)
    if rho >= 1.0:
        return math.inf
    return last * rho / (1.0 - rho)


def _initial_terms(r: float) -> int:
    if r <= 0.0:
        return 1
    return int(2 ** math.ceil(math.log2(max(64.0, 32.0 / (1.0 - r)))))


def _fold_values(coeffs: np.ndarray, r: float, n_angles: int) -> np.ndarray:
    n = coeffs.size
    if r == 0.0:
        return np.full(n_angles, coeffs[0] if n else 0j)
    weights = np.exp(np.arange(n) * math.log(r))
    scaled = coeffs * weights
    pad = (-n) % n_angles
    if pad:
        scaled = np.concatenate([scaled, np.zeros(pad, dtype=np.complex128)])
    folded = scaled.reshape(-1, n_angles).sum(axis=0)
    return np.fft.ifft(folded) * n_angles


def circle_values(f: FunctionModel, r: float, n_angles: int, *, rel_tol=1e-10,
                  max_coeffs=DEFAULT_MAX_COEFFS, r_max=DEFAULT_R_MAX, angles=None):
    """Values of ``f`` at ``r * exp(i theta)``.

    ``theta`` is the uniform set ``2 pi k / n_angles`` unless explicit
    ``angles`` are given.  Returns ``(values, tail)`` where ``tail`` bounds
    the truncation error uniformly in angle (0 for closed forms).
    """
    if not 0.0 <= r < 1.0:
        raise ValueError(f"radius {r} outside [0, 1)")
    if angles is None:
        thetas = 2.0 * math.pi * np.arange(n_angles) / n_angles
    else:
        thetas = np.asarray(angles, dtype=float)
    z = r * np.exp(1j * thetas)
    if f.closed_form:
        return evaluate_many(f, z), 0.0
    if r > r_max:
        raise CoefficientBudgetExceeded(f"radius {r} exceeds r_max {r_max}")
    if r == 0.0:
        return np.full(thetas.shape, complex(f.realized(1)[0])), 0.0
    degree = f.degree
    if degree is not None:
        c = np.asarray(f.realized(degree + 1))
        vals = _fold_values(c, r, n_angles) if angles is None else _direct(c, z)
        return vals, 0.0
    count = _initial_terms(r)
    while True:
        count = min(count, max_coeffs)
        c = np.asarray(f.realized(count))
        vals = _fold_values(c, r, n_angles) if angles is None else _direct(c, z)
        last = c[-2 * _WINDOW:]
        terms = np.abs(last) * np.exp(np.arange(count - last.size, count) * math.log(r))
        tail = _tail_bound(terms)
        scale = float(np.max(np.abs(vals))) if vals.size else 0.0
        if tail <= rel_tol * max(scale, 1e-300) or tail == 0.0:
            return vals, tail
        if count >= max_coeffs:
            raise CoefficientBudgetExceeded(
                f"tail {tail:.3g} above tolerance at r={r} with {count} coefficients",
                terms=count, tail=tail)
        count *= 2


def _direct(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.empty(z.shape, dtype=np.complex128)
    n = np.arange(c.size)
    for i, zi in enumerate(z.ravel()):
        if zi == 0:
            out.ravel()[i] = c[0]
            continue
        logz = cmath.log(zi)
        out.ravel()[i] = np.sum(c * np.exp(n * logz))
    return out


def evaluate_many(f: FunctionModel, z) -> np.ndarray:
    """Vectorized evaluation for closed forms and polynomials."""
    z = np.asarray(z, dtype=np.complex128)
    if isinstance(f, AtomSum):
        out = np.zeros(z.shape, dtype=np.complex128)
        for atom in f.atoms:
            out += atom.evaluate(z)
        return out
    if f.closed_form_eval is not None:
        return np.asarray(f.closed_form_eval(z), dtype=np.complex128)
    if f.degree is not None:
        c = np.asarray(f.realized(f.degree + 1))
        return np.polynomial.polynomial.polyval(z, c)
    return np.array([evaluate(f, zi)[0] for zi in z.ravel()]).reshape(z.shape)


def evaluate(f: FunctionModel, z, tol: float = 1e-12, *, max_coeffs=DEFAULT_MAX_COEFFS,
             r_max=DEFAULT_R_MAX):
    """Evaluate ``f(z)``; returns ``(value, error_estimate)``.

    Closed forms are exact up to rounding (error 0).  Plain generator series
    sum partial sums until the tail estimate drops below ``tol``; failure to
    get there inside ``max_coeffs`` terms raises
    :class:`CoefficientBudgetExceeded` rather than truncating silently.
    """
    z = _as_complex(z)
    if abs(z) >= 1.0:
        raise ValueError(f"|z| = {abs(z)} is not inside the unit disc")
    if f.closed_form or (isinstance(f, GeneratorSeries) and f.degree is not None):
        return complex(evaluate_many(f, np.array([z]))[0]), 0.0
    r = abs(z)
    if r > r_max:
        raise CoefficientBudgetExceeded(f"|z| = {r} exceeds r_max {r_max}")
    if r == 0.0:
        return complex(f.realized(1)[0]), 0.0
    count = _initial_terms(r)
    logz = cmath.log(z)
    while True:
        count = min(count, max_coeffs)
        c = np.asarray(f.realized(count))
        n = np.arange(count)
        terms = c * np.exp(n * logz)
        value = complex(np.sum(terms))
        tail = _tail_bound(np.abs(terms[-2 * _WINDOW:]))
        if tail <= tol:
            return value, tail
        if count >= max_coeffs:
            raise CoefficientBudgetExceeded(
                f"tail {tail:.3g} above tol {tol:g} at |z|={r} with {count} coefficients",
                terms=count, tail=tail)
        count *= 2


# ---------------------------------------------------------------------------
# algebra


def _shift_up(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    out[1:] = c[:-1]
    return out


def _scale_of(g) -> complex:
    if isinstance(g, (AtomSum, GeneratorSeries)):
        raise TypeError("scale expects a scalar")
    return _as_complex(g)


def combine(f: FunctionModel, g=None, op: str = "add") -> FunctionModel:
    """Binary/unary algebra on function models.

    ``op`` is one of ``add`` (``f + g``), ``scale`` (``g * f`` for a scalar
    ``g``), ``multiply_by_phi``, ``multiply_by_z`` and ``divide_by_z``; the
    last three ignore ``g``.
    """
    if op == "add":
        if isinstance(f, AtomSum) and isinstance(g, AtomSum):
            return AtomSum.of(f.atoms + g.atoms)
        fa, ga = f, g
        degree = None
        if fa.is_polynomial and ga.is_polynomial:
            degree = max(fa.degree, ga.degree)
        limit = [m.limit for m in (fa, ga) if isinstance(m, GeneratorSeries) and m.limit]
        closed = None
        if fa.closed_form and ga.closed_form:
            closed = lambda z: evaluate_many(fa, z) + evaluate_many(ga, z)  # noqa: E731

        def block(count):
            return np.asarray(coefficients(fa, count - 1)) + np.asarray(coefficients(ga, count - 1))

        return GeneratorSeries(block, degree=degree, limit=min(limit) if limit else None,
                               closed_form=closed, label="sum")
    if op == "scale":
        s = _scale_of(g)
        if isinstance(f, AtomSum):
            return AtomSum.of([a.with_scale(a.scale * s) for a in f.atoms])
        closed = None
        if f.closed_form:
            closed = lambda z: s * evaluate_many(f, z)  # noqa: E731
        nonneg = f.nonnegative_coefficients and s.imag == 0 and s.real >= 0
        return derived_series(f, lambda c: s * c, degree=f.degree, closed_form=closed,
                              nonnegative=nonneg, label="scaled")
    if op == "multiply_by_phi":
        if isinstance(f, AtomSum):
            return f.times(PHI)
        return derived_series(f, _kernels.prefix_sum, nonnegative=f.nonnegative_coefficients,
                              label="phi*f")
    if op == "multiply_by_z":
        if isinstance(f, AtomSum):
            return AtomSum.of([Atom(a.scale, a.power + 1, a.factors, a.log_power) for a in f.atoms])
        closed = None
        if f.closed_form:
            closed = lambda z: z * evaluate_many(f, z)  # noqa: E731
        return derived_series(f, _shift_up, degree=None if f.degree is None else f.degree + 1,
                              closed_form=closed, nonnegative=f.nonnegative_coefficients,
                              label="z*f")
    if op == "divide_by_z":
        return _divide_by_z(f)
    raise ValueError(f"unknown op {op!r}")


def _divide_by_z(f: FunctionModel) -> FunctionModel:
    if isinstance(f, AtomSum):
        if f.value_at_zero() != 0:
            raise DivisionByZError(f"f(0) = {f.value_at_zero()} is not zero")
        if all(a.power >= 1 for a in f.atoms):
            return AtomSum.of([Atom(a.scale, a.power - 1, a.factors, a.log_power) for a in f.atoms])
        small = 0.05

        def closed(z, _f=f):
            z = np.asarray(z, dtype=np.complex128)
            out = np.empty(z.shape, dtype=np.complex128)
            near = np.abs(z) < small
            far = ~near
            if np.any(far):
                out[far] = evaluate_many(_f, z[far]) / z[far]
            if np.any(near):
                c = coefficients(_f, 48)[1:]
                out[near] = np.polynomial.polynomial.polyval(z[near], c)
            return out

        return GeneratorSeries(lambda count: np.asarray(coefficients(f, count))[1:],
                               closed_form=closed, label="f/z")
    c0 = f.value_at_zero()
    if abs(c0) > 1e-12:
        raise DivisionByZError(f"f(0) = {c0} is not zero (tolerance 1e-12)")
    degree = None if f.degree is None else max(f.degree - 1, 0)
    limit = None if f.limit is None else f.limit - 1

    def block(count):
        return np.asarray(f.realized(count + 1))[1:]

    closed = None
    if f.closed_form:
        small = 0.05

        def closed(z, _f=f):
            z = np.asarray(z, dtype=np.complex128)
            out = np.empty(z.shape, dtype=np.complex128)
            near = np.abs(z) < small
            far = ~near
            if np.any(far):
                out[far] = evaluate_many(_f, z[far]) / z[far]
            if np.any(near):
                out[near] = np.polynomial.polynomial.polyval(z[near], block(48))
            return out

    return GeneratorSeries(block, degree=degree, limit=limit, closed_form=closed,
                           nonnegative=f.nonnegative_coefficients, label="f/z")


def differentiate(f: FunctionModel) -> FunctionModel:
    """``D f = f'``; closed form for atom sums, coefficient shift otherwise."""
    if isinstance(f, AtomSum):
        return AtomSum.of([t for a in f.atoms for t in a.derivative()])
    degree = None if f.degree is None else max(f.degree - 1, 0)
    limit = None if f.limit is None else f.limit - 1

    def block(count):
        c = np.asarray(f.realized(count + 1))
        return c[1:] * np.arange(1, count + 1)

    return GeneratorSeries(block, degree=degree, limit=limit,
                           nonnegative=f.nonnegative_coefficients, label="f'")


def _integrate_coeffs(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    if c.size > 1:
        out[1:] = c[:-1] / np.arange(1, c.size)
    return out


def integrate(f: FunctionModel) -> GeneratorSeries:
    """``J f = int_0^z f``."""
    return derived_series(f, _integrate_coeffs,
                          degree=None if f.degree is None else f.degree + 1,
                          nonnegative=f.nonnegative_coefficients, label="J f")


def truncate(f: FunctionModel, n: int) -> GeneratorSeries:
    """Polynomial section ``sum_{k<=n} f^(k) z**k``."""
    return series_from_coefficients(coefficients(f, n), polynomial=True, label=f"section{n}")
