import math

import numpy as np
import pytest

from cesaro_lab.analytic import ONE, PHI, GeneratorSeries, combine, evaluate, monomial, power_of_one_minus
from cesaro_lab.expr import parse_expression
from cesaro_lab.norms import (
    GridOptions,
    Space,
    boundary_profile,
    classify_membership,
    grid_radii,
    monomial_norm,
    weighted_sup_norm,
    weighted_value,
)
from cesaro_lab.operator import apply_cesaro

from conftest import random_atom_sum


def test_norm_examples():
    est = weighted_sup_norm(power_of_one_minus(0.5), 0.5)
    assert est.value == pytest.approx(1.0, abs=1e-9)
    assert abs(est.argmax_z.imag) < 1e-12 and 0 <= est.argmax_z.real < 1
    est = weighted_sup_norm(monomial(1), 1.0)
    assert est.value == pytest.approx(0.25, rel=1e-12)
    assert est.argmax_z == pytest.approx(0.5, abs=1e-6)
    est = weighted_sup_norm(ONE, 1.7)
    assert est.value == 1.0 and est.argmax_z == 0


def test_monomial_norm_examples():
    assert monomial_norm(0, 2.0) == 1
    assert monomial_norm(1, 1.0) == pytest.approx(0.25, rel=1e-15)
    assert monomial_norm(2, 1.0) == pytest.approx(4 / 27, rel=1e-15)
    with pytest.raises(ValueError):
        monomial_norm(-1, 1.0)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_monomial_engine_agreement(gamma):
    for k in range(33):
        est = weighted_sup_norm(monomial(k), gamma).value
        assert est == pytest.approx(monomial_norm(k, gamma), rel=1e-4)


def test_boundary_profile_examples():
    radii = [0.0, 0.5, 0.9, 0.99, 0.999]
    rows = boundary_profile(PHI, 1.0, radii)
    assert all(row.reliable for row in rows)
    assert np.allclose([row.m_r for row in rows], 1.0)
    rows = boundary_profile(ONE, 1.0, radii)
    assert np.allclose([row.m_r for row in rows], [1 - r for r in radii])
    rows = boundary_profile(power_of_one_minus(2.0), 1.0, radii)
    assert np.allclose([row.m_r for row in rows], [1 / (1 - r) for r in radii])
    with pytest.raises(ValueError):
        boundary_profile(PHI, 1.0, [1.0])


def test_profile_marks_budget_rows():
    opts = GridOptions(max_coeffs=4096)
    rows = boundary_profile(apply_cesaro(PHI), 1.0, [0.5, 0.9999], opts)
    assert rows[0].reliable and not rows[1].reliable
    est = weighted_sup_norm(apply_cesaro(PHI), 1.0, opts)
    assert not est.stable and not est.reliable


def test_membership_examples():
    both = classify_membership(PHI, 1.0)
    assert (both.big.verdict, both.little.verdict) == ("in", "out")
    assert both.big.method == "analytic"
    assert both.big.evidence["exponent"] == 1.0
    both = classify_membership(PHI, 0.5)
    assert both.big.verdict == "out"
    for gamma in (0.1, 1.0, 4.0):
        both = classify_membership(parse_expression("1 + 2*z - z^7"), gamma)
        assert (both.big.verdict, both.little.verdict) == ("in", "in")


def test_membership_log_rules():
    f = parse_expression("(1-z)^-1*log1z")
    both = classify_membership(f, 1.0)
    assert (both.big.verdict, both.little.verdict) == ("out", "out")
    both = classify_membership(parse_expression("log1z^3"), 0.2)
    assert (both.big.verdict, both.little.verdict) == ("in", "in")
    both = classify_membership(parse_expression("(1-z)*log1z"), 0.2)
    assert (both.big.verdict, both.little.verdict) == ("in", "in")


def test_membership_cancellation_goes_numeric():
    # phi - z phi = 1: the leading terms at z = 1 cancel
    f = parse_expression("1/(1-z) - z/(1-z)")
    assert not f.is_zero
    both = classify_membership(f, 1.0)
    assert both.big.method == "numeric"
    assert (both.big.verdict, both.little.verdict) == ("in", "in")
    with pytest.raises(ValueError):
        classify_membership(f, 1.0, method="analytic")


def test_numeric_agrees_with_analytic():
    cases = ["1/(1-z)", "(1-z)^-2", "(1+z)^-0.5", "(1-z)*(1+z)^-2", "z^3*(1-1i*z)^-1.5",
             "(1-z)^-1*(1+z)^-1"]
    for text in cases:
        f = parse_expression(text)
        for gamma in (0.75, 1.0, 2.0):
            a = classify_membership(f, gamma, method="analytic")
            n = classify_membership(f, gamma, method="numeric")
            assert (a.big.verdict, a.little.verdict) == (n.big.verdict, n.little.verdict), text


def test_numeric_on_generators():
    both = classify_membership(apply_cesaro(ONE), 0.5)
    assert both.big.method == "numeric"
    assert (both.big.verdict, both.little.verdict) == ("in", "in")
    assert both.big.evidence["slope"] < -0.05
    both = classify_membership(apply_cesaro(PHI), 1.0)
    assert (both.big.verdict, both.little.verdict) == ("in", "out")


def _oscillating():
    # (1-z)^{-1} (2 + (1-z)^{-5i}): constant trend, modulus oscillating in log(1/(1-r))
    beta = 1 + 5j

    def block(count):
        c = np.empty(count, dtype=complex)
        one = np.empty(count, dtype=complex)
        c[0], one[0] = 1.0, 1.0
        for n in range(count - 1):
            c[n + 1] = c[n] * (n + beta) / (n + 1)
            one[n + 1] = 1.0
        return 2 * one + c

    def closed(z):
        w = 1 - np.asarray(z, dtype=complex)
        return (2 + np.exp(-5j * np.log(w))) / w

    return GeneratorSeries(block, closed_form=closed, label="oscillating")


def test_indeterminate_when_profile_oscillates():
    both = classify_membership(_oscillating(), 1.0)
    assert both.big.method == "numeric"
    assert abs(both.big.evidence["slope"]) <= 0.05
    assert not both.big.evidence["monotone"]
    assert (both.big.verdict, both.little.verdict) == ("indeterminate", "indeterminate")


def test_containment_in_little_implies_big(rng):
    for _ in range(20):
        gamma = float(rng.uniform(0.3, 3.0))
        f = random_atom_sum(rng, gamma)
        both = classify_membership(f, gamma)
        if both.little.verdict == "in":
            assert both.big.verdict == "in"


def test_value_is_reevaluable(rng):
    for _ in range(10):
        gamma = float(rng.uniform(0.3, 2.5))
        f = random_atom_sum(rng, gamma)
        est = weighted_sup_norm(f, gamma)
        z = est.argmax_z
        direct = (1 - abs(z)) ** gamma * abs(evaluate(f, z)[0])
        assert est.value == pytest.approx(direct, rel=1e-9, abs=1e-300)


def test_value_dominates_probed_axis(rng):
    for _ in range(5):
        gamma = float(rng.uniform(0.3, 2.5))
        f = random_atom_sum(rng, gamma)
        est = weighted_sup_norm(f, gamma)
        for r in grid_radii(f):
            assert est.value >= (1 - r) ** gamma * abs(evaluate(f, r)[0]) * (1 - 1e-12)


def test_homogeneity(rng):
    for _ in range(5):
        gamma = float(rng.uniform(0.3, 2.5))
        f = random_atom_sum(rng, gamma)
        c = complex(rng.normal(), rng.normal())
        a = weighted_sup_norm(combine(f, c, "scale"), gamma).value
        b = weighted_sup_norm(f, gamma).value
        assert a == pytest.approx(abs(c) * b, rel=1e-12)


def test_triangle_inequality(rng):
    for _ in range(8):
        gamma = float(rng.uniform(0.3, 2.5))
        f, g = random_atom_sum(rng, gamma), random_atom_sum(rng, gamma)
        lhs = weighted_sup_norm(combine(f, g, "add"), gamma).value
        rhs = weighted_sup_norm(f, gamma).value + weighted_sup_norm(g, gamma).value
        assert lhs <= 1.001 * rhs


def test_norm_chain(rng):
    for _ in range(50):
        gamma = float(rng.uniform(0.3, 2.5))
        f = random_atom_sum(rng, gamma)
        lhs = weighted_sup_norm(combine(f, op="multiply_by_phi"), gamma + 1).value
        assert lhs <= 1.001 * weighted_sup_norm(f, gamma).value


def test_weighted_value_matches_definition():
    z = 0.3 - 0.6j
    assert weighted_value(PHI, 1.5, z) == pytest.approx((1 - abs(z)) ** 1.5 / abs(1 - z))


def test_grid_options_parsing():
    opts = GridOptions.from_pairs("j_max=40, angles_init=128,rel_tol=1e-4,refine=false")
    assert (opts.j_max, opts.angles_init, opts.rel_tol, opts.refine) == (40, 128, 1e-4, False)
    assert opts.r_max == pytest.approx(1 - 2 ** -10)
    with pytest.raises(KeyError):
        GridOptions.from_pairs("nope=1")
    with pytest.raises(ValueError):
        GridOptions.from_pairs("j_max")
    assert len(grid_radii(PHI, opts)) == opts.j_max_closed + 1
    assert len(grid_radii(apply_cesaro(PHI), opts)) == 41


def test_gamma_must_be_positive():
    with pytest.raises(ValueError):
        weighted_sup_norm(PHI, 0.0)
    with pytest.raises(ValueError):
        classify_membership(PHI, -1.0)


def test_space_names():
    assert str(Space("A", 1.0)) == "A^{-1}"
    assert str(Space("CA0", 0.5)) == "[C,A_0^{-0.5}]"


def test_g_witness_profile_is_flat_on_negative_axis():
    gphi = parse_expression("(1+z)^-2")
    rows = boundary_profile(gphi, 2.0, [0.9, 0.99, 0.999])
    assert np.allclose([row.m_r for row in rows], 1.0, rtol=1e-9)
    assert all(abs(abs(row.theta) - math.pi) < 1e-9 for row in rows)
