from fractions import Fraction

import numpy as np
import pytest

from cesaro_lab.analytic import ONE, PHI, coefficients, monomial, power_of_one_minus
from cesaro_lab.ergodic import (
    ConvergenceTable,
    TableRow,
    mean_convergence,
    mean_norm_table,
    power_norm_table,
    predicted_mean_norm,
    project_P,
    successive_difference,
)
from cesaro_lab.norms import classify_membership
from cesaro_lab.operator import cesaro_mean, solve_identity_minus_C


def test_project_examples():
    assert project_P(ONE, 2.0) == PHI
    assert project_P(monomial(1), 2.0).is_zero
    p = project_P(power_of_one_minus(0.5, -1.0), 2.0)
    assert project_P(p, 2.0) == p
    with pytest.raises(ValueError):
        project_P(ONE, 1.0)


def test_predicted_mean_norm():
    assert predicted_mean_norm(2.0, 7) == 1
    assert predicted_mean_norm(0.5, 2) == 3
    assert predicted_mean_norm(0.5, 1) == 2
    for n in range(1, 17):
        assert predicted_mean_norm(0.5, n, exact=True) == Fraction(sum(2 ** m for m in range(1, n + 1)), n)
    with pytest.raises(ValueError):
        predicted_mean_norm(0.5, 0)


def test_table_invariants():
    with pytest.raises(ValueError):
        ConvergenceTable("power_norm", 1.0, (TableRow(2, 1.0), TableRow(1, 1.0)))
    with pytest.raises(ValueError):
        ConvergenceTable("power_norm", 1.0, (TableRow(1, -1.0),))
    t = ConvergenceTable("mean_norm", 2.0, (TableRow(1, 0.5, 1.0), TableRow(3, 0.25)))
    assert t.to_csv().splitlines() == ["n,value,predicted", "1,0.5,1", "3,0.25,"]
    assert t.value(3) == 0.25
    with pytest.raises(KeyError):
        t.value(2)


def test_power_table_gamma_two():
    t = power_norm_table(2.0, 6)
    assert all(row.value <= 1.001 for row in t.rows)
    assert all(row.predicted == 1 for row in t.rows)


def test_power_table_gamma_half():
    t = power_norm_table(0.5, 3, witnesses=[power_of_one_minus(0.5)])
    assert [row.predicted for row in t.rows] == [2, 4, 8]
    assert t.value(1) >= 1.99


def test_power_table_phi_fixed():
    t = power_norm_table(1.0, 5, witnesses=[PHI])
    assert np.allclose(t.values, 1.0, rtol=1e-9)


def test_fixed_point_means():
    for n in range(1, 65):
        assert np.array_equal(coefficients(cesaro_mean(PHI, n), 200), np.ones(201))


def test_mean_convergence_phi_and_z():
    t = mean_convergence(PHI, 2.0, ns=[1, 4, 16])
    assert t.values == [0.0, 0.0, 0.0]
    t = mean_convergence(monomial(1), 2.0, ns=[2, 8, 32])
    v = t.values
    assert v[0] > v[1] > v[2]
    with pytest.raises(ValueError):
        mean_convergence(ONE, 1.0, 4)


def test_mean_norm_bracket_gamma_two():
    t = mean_norm_table(2.0, ns=[1, 2, 4, 8, 16])
    assert all(row.value <= 1.01 * row.predicted for row in t.rows)


def test_successive_difference():
    t = successive_difference(PHI, 1.0, 4)
    assert t.values == [0.0] * 4
    t = successive_difference(ONE, 1.0, ns=[1, 2, 4, 8, 16])
    v = t.values
    assert all(b < a for a, b in zip(v, v[1:]))
    t = successive_difference(ONE, 2.0, ns=[4, 32])
    assert t.value(32) < t.value(4)
    with pytest.raises(ValueError):
        successive_difference(ONE, 0.5, 4)


def test_range_membership():
    f = solve_identity_minus_C(monomial(1))
    assert classify_membership(f, 2.0).big.verdict == "in"
