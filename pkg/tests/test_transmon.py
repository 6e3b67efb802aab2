import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sqzqed.transmon import (
    CpbParams, asymptotic_diag, asymptotic_offdiag, charge_matrix_element, cpb_hamiltonian, diagonalize,
    level_slope, transmon_chi, transmon_squeezing_coeffs,
)


def test_cutoff_heuristic():
    p = CpbParams(50.0, 1.0)
    assert p.n_charge_cutoff == CpbParams.min_cutoff(50.0, 1.0) == 20
    with pytest.raises(ValueError):
        CpbParams(50.0, 1.0, n_charge_cutoff=5)
    with pytest.raises(ValueError):
        CpbParams(-1.0, 1.0)


def test_tridiagonal_matches_dense():
    p = CpbParams(10.0, 1.0, 0.3)
    h = cpb_hamiltonian(p)
    spec = diagonalize(p)
    np.testing.assert_allclose(spec.levels, np.linalg.eigvalsh(h), atol=1e-10)
    resid = h @ spec.states - spec.states * spec.levels
    assert np.abs(resid).max() < 1e-10 * np.abs(spec.levels).max()


def test_cutoff_doubling_converged():
    p = CpbParams(50.0, 1.0, 0.25)
    a = diagonalize(p, 4).levels
    b = diagonalize(CpbParams(50.0, 1.0, 0.25, 2 * p.n_charge_cutoff), 4).levels
    np.testing.assert_allclose(a, b, rtol=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.5))
def test_charge_periodicity(ng):
    cut = 30
    a = diagonalize(CpbParams(20.0, 1.0, ng, cut), 5).levels
    b = diagonalize(CpbParams(20.0, 1.0, ng + 1, cut), 5).levels
    np.testing.assert_allclose(a, b, atol=1e-10)


@pytest.mark.parametrize("ratio", [1.0, 10.0, 50.0])
@pytest.mark.parametrize("m", [0, 1, 2])
def test_diagonal_element_is_level_slope(ratio, m):
    p = CpbParams(ratio, 1.0, 0.21)
    spec = diagonalize(p, 3)
    element = charge_matrix_element(spec, m, m).real
    assert element == pytest.approx(-level_slope(p, m) / (8 * p.ec), abs=1e-6)


def test_matrix_element_bounds():
    spec = diagonalize(CpbParams(10.0, 1.0), 3)
    with pytest.raises(IndexError):
        charge_matrix_element(spec, 0, 3)


def test_offdiag_asymptote_improves():
    errs = []
    for ratio in (10.0, 20.0, 50.0, 100.0):
        p = CpbParams(ratio, 1.0, 0.25)
        exact = abs(charge_matrix_element(diagonalize(p, 2), 0, 1))
        errs.append(abs(abs(asymptotic_offdiag(0, p)) - exact) / exact)
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[2] < 0.05


def test_diag_asymptote_order_of_magnitude():
    p = CpbParams(20.0, 1.0, 0.25)
    exact = charge_matrix_element(diagonalize(p, 1), 0, 0).real
    assert asymptotic_diag(0, p) == pytest.approx(exact, rel=0.1)
    with pytest.warns(UserWarning):
        asymptotic_diag(0, CpbParams(5.0, 1.0))


def test_half_integer_offset_kills_diagonal_elements():
    spec = diagonalize(CpbParams(50.0, 1.0, 0.5), 3)
    c = transmon_squeezing_coeffs(spec, 0.1, 15.0)
    assert abs(c.c_minus) < 1e-12 and abs(c.c_plus) < 1e-12


def test_squeezing_coeffs_scale_with_g_squared():
    spec = diagonalize(CpbParams(50.0, 1.0, 0.25), 3)
    a = transmon_squeezing_coeffs(spec, 0.1, 15.0)
    b = transmon_squeezing_coeffs(spec, 0.4, 15.0)
    assert b.c_minus == pytest.approx(16 * a.c_minus)
    assert b.c_plus == pytest.approx(16 * a.c_plus)
    assert a.dominant == "plus"
    with pytest.raises(ValueError):
        transmon_squeezing_coeffs(diagonalize(CpbParams(50.0, 1.0), 2), 0.1, 15.0)


def test_chi_limits_and_guards():
    spec = diagonalize(CpbParams(50.0, 1.0, 0.25), 3)
    w01 = spec.transition01
    assert transmon_chi(spec, 0.1, w01 - 5.0).chi < 0
    # Delta0 straddles Ec: chi changes sign
    lo = transmon_chi(spec, 0.001, w01 - 0.9).chi
    hi = transmon_chi(spec, 0.001, w01 - 1.1).chi
    assert np.sign(lo) != np.sign(hi)
    with pytest.raises(ZeroDivisionError):
        transmon_chi(spec, 0.1, w01)
    with pytest.warns(UserWarning):
        transmon_chi(spec, 2.0, w01 - 5.0)


def test_chi_vanishes_in_harmonic_limit():
    spec = diagonalize(CpbParams(50.0, 1e-6, 0.25), 3)
    res = transmon_chi(spec, 0.05, spec.transition01 - 1.0)
    assert abs(res.chi) < 1e-6


def test_chi_against_three_level_oracle():
    ec, delta0 = 1.0, 4.0
    spec = diagonalize(CpbParams(50.0, ec, 0.25), 3)
    w01 = spec.transition01
    w1 = w01 - delta0
    g = 0.05 * delta0
    nf = 6
    a = np.diag(np.sqrt(np.arange(1, nf)), 1)
    q = np.diag([0.0, w01, 2 * w01 - ec])
    lower = np.zeros((3, 3))
    lower[0, 1], lower[1, 2] = 1.0, np.sqrt(2)
    h = np.kron(q, np.eye(nf)) + w1 * np.kron(np.eye(3), a.T @ a)
    h += g * (np.kron(lower, a.T) + np.kron(lower.T, a))
    w, v = np.linalg.eigh(h)

    def energy(level, n):
        return w[np.argmax(np.abs(v[level * nf + n]) ** 2)]

    exact = ((energy(1, 1) - energy(1, 0)) - (energy(0, 1) - energy(0, 0))) / 2
    assert transmon_chi(spec, g, w1).chi == pytest.approx(exact, rel=0.1)
