"""Steady-state analysis in the two-photon-coherent (b) basis."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fockspace import HilbertDims, TruncationWarning, annihilation, squeeze_unitary
from .model import chi_bar, squeeze_parameter

__all__ = [
    "NumberDistribution", "ThermalFit", "squeeze_parameter", "field_state", "to_b_basis",
    "number_distribution", "thermal_fit", "t_eff_analytic", "thermal_occupation",
    "quadrature_variance",
]


@dataclass(frozen=True)
class NumberDistribution:
    probs: np.ndarray
    basis: str = "a"
    r_used: float = 0.0

    @property
    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)


@dataclass(frozen=True)
class ThermalFit:
    kT: float
    residual: float
    n_points_used: int
    slope: float
    intercept: float


def field_state(rho: np.ndarray, dims: HilbertDims) -> np.ndarray:
    """Reduced field density matrix (qubit traced out)."""
    if not dims.has_qubit:
        return np.asarray(rho)
    n = rho.shape[0] // 2
    return rho[:n, :n] + rho[n:, n:]


def to_b_basis(rho: np.ndarray, r: float, dims: HilbertDims, tail_tol: float = 1e-4) -> np.ndarray:
    """``S(r)^dag rho S(r)``: diagonal entries become ``<n_b|rho|n_b>`` with ``|n_b> = S(r)|n>``."""
    u = squeeze_unitary(dims, r).full()
    rho_b = u.conj().T @ rho @ u
    pops = np.real(np.diag(field_state(rho_b, dims)))
    tail = pops[dims.n_fock // 2:].sum()
    if tail > tail_tol:
        warnings.warn(f"b-basis population above n_fock/2 is {tail:.2e}", TruncationWarning, stacklevel=2)
    return rho_b


def number_distribution(rho: np.ndarray, dims: HilbertDims, basis: str = "a",
                        r: float = 0.0) -> NumberDistribution:
    if basis not in ("a", "b"):
        raise ValueError("basis must be 'a' or 'b'")
    if basis == "b":
        rho = to_b_basis(rho, r, dims)
    else:
        r = 0.0
    probs = np.real(np.diag(field_state(rho, dims))).copy()
    return NumberDistribution(probs, basis, r)


def thermal_fit(dist: NumberDistribution, chi_bar_value: float, min_prob: float = 1e-8,
                max_n: int | None = None) -> ThermalFit:
    """Weighted log-linear fit of ``P(n) ~ exp(-chi_bar n / kT)``.

    Points with ``P(n) > min_prob`` (and ``n < max_n`` if given) enter with
    weight ``P(n)``; the residual is the largest absolute deviation between
    ``P(n)`` and the fitted law on those points, divided by ``max P``.
    """
    p = np.asarray(dist.probs, dtype=float)
    n = np.arange(p.size)
    mask = p > min_prob
    if max_n is not None:
        mask &= n < max_n
    if mask.sum() < 3:
        raise ValueError(f"only {mask.sum()} points above {min_prob:g}; need at least 3 for a thermal fit")
    x, y, w = n[mask], np.log(p[mask]), p[mask]
    slope, intercept = np.polyfit(x, y, 1, w=np.sqrt(w))
    if slope >= 0:
        raise ValueError("distribution is not decreasing; no positive temperature fits it")
    fitted = np.exp(intercept + slope * x)
    residual = float(np.max(np.abs(p[mask] - fitted)) / p[mask].max())
    return ThermalFit(float(chi_bar_value / -slope), residual, int(mask.sum()), float(slope), float(intercept))


def t_eff_analytic(chi: float, chi_sq: float) -> float:
    """``kT = chi_bar / ln[(chi + chi_bar)/(chi - chi_bar)]`` (hbar = k_B = 1)."""
    if not 0 < chi_sq < chi / 2:
        raise ValueError(f"need 0 < chi_sq < chi/2, got chi_sq={chi_sq}")
    cb = chi_bar(chi, chi_sq)
    return cb / np.log((chi + cb) / (chi - cb))


def thermal_occupation(r: float) -> float:
    return float(np.sinh(r) ** 2)


def quadrature_variance(rho: np.ndarray, dims: HilbertDims, phi: float = 0.0) -> float:
    """Variance of ``X_phi = e^{i phi} a + e^{-i phi} a^dag``."""
    a = annihilation(dims).full()
    x = np.exp(1j * phi) * a
    x = x + x.conj().T
    m1 = np.trace(x @ rho)
    m2 = np.trace(x @ x @ rho)
    return float(np.real(m2 - m1**2))
