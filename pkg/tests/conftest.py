import numpy as np
import pytest

from cesaro_lab.analytic import Atom, AtomSum


def random_atom_sum(rng, gamma, n_atoms=None, boundary=True):
    """Random atom sum in ``A^{-gamma}``: boundary exponents stay ``<= gamma``."""
    n_atoms = n_atoms or int(rng.integers(1, 4))
    atoms = []
    for _ in range(n_atoms):
        scale = complex(rng.normal(), rng.normal())
        power = int(rng.integers(0, 4))
        factors = []
        for _ in range(int(rng.integers(0, 3))):
            angle = rng.uniform(0, 2 * np.pi)
            radius = 1.0 if boundary and rng.uniform() < 0.6 else rng.uniform(0.2, 0.9)
            a = radius * complex(np.cos(angle), np.sin(angle))
            top = gamma if radius == 1.0 else 3.0
            factors.append((a, float(rng.uniform(-1.0, top))))
        atoms.append(Atom.make(scale, power, tuple(factors)))
    return AtomSum.of(atoms)


def random_polynomial_coeffs(rng, degree):
    return rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# filled by test_acceptance.py, reported after the run
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[1:])):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}")
