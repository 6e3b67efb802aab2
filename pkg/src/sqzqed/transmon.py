"""Cooper-pair box in the charge basis and the transmon dispersive coefficients.

Exact diagonalization of ``4 Ec (n - Ng)^2 - EJ cos(phi)`` replaces the
Mathieu-function closed forms; the large-EJ/Ec asymptotics are provided
separately so they can be checked against the exact numbers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class CpbParams:
    ej: float
    ec: float
    ng: float = 0.25
    n_charge_cutoff: int | None = None

    def __post_init__(self):
        if not (self.ej > 0 and self.ec > 0):
            raise ValueError("ej and ec must be positive")
        need = self.min_cutoff(self.ej, self.ec)
        if self.n_charge_cutoff is None:
            object.__setattr__(self, "n_charge_cutoff", need)
        elif self.n_charge_cutoff < need:
            raise ValueError(f"charge cutoff {self.n_charge_cutoff} below the convergence heuristic {need}")

    @staticmethod
    def min_cutoff(ej: float, ec: float) -> int:
        return int(math.ceil(2 * math.sqrt(ej / ec))) + 5

    @property
    def charges(self) -> np.ndarray:
        return np.arange(-self.n_charge_cutoff, self.n_charge_cutoff + 1)


@dataclass(frozen=True)
class CpbSpectrum:
    levels: np.ndarray
    states: np.ndarray
    params: CpbParams

    @property
    def transition01(self) -> float:
        return float(self.levels[1] - self.levels[0])


def cpb_hamiltonian(p: CpbParams) -> np.ndarray:
    """Tridiagonal charge-basis matrix: ``4Ec(N-Ng)^2`` on the diagonal, ``-EJ/2`` off it."""
    n = p.charges
    off = np.full(n.size - 1, -p.ej / 2)
    return np.diag(4 * p.ec * (n - p.ng) ** 2) + np.diag(off, 1) + np.diag(off, -1)


def diagonalize(p: CpbParams, n_levels: int | None = None) -> CpbSpectrum:
    """Eigenpairs in ascending order; each eigenvector's largest component is real positive."""
    n = p.charges
    off = np.full(n.size - 1, -p.ej / 2)
    select = None if n_levels is None else (0, n_levels - 1)
    w, v = scipy.linalg.eigh_tridiagonal(4 * p.ec * (n - p.ng) ** 2, off, select="a" if select is None else "i",
                                         select_range=select)
    idx = np.argmax(np.abs(v), axis=0)
    phase = v[idx, np.arange(v.shape[1])]
    v = v * (np.abs(phase) / phase)
    return CpbSpectrum(w, v, p)


def charge_matrix_element(spec: CpbSpectrum, m: int, mp: int) -> complex:
    """``<m| n - Ng |m'>`` from the charge-basis eigenvectors."""
    k = spec.levels.size
    if not (0 <= m < k and 0 <= mp < k):
        raise IndexError(f"levels ({m}, {mp}) outside the {k} computed")
    shift = spec.params.charges - spec.params.ng
    return complex(spec.states[:, m].conj() @ (shift * spec.states[:, mp]))


def level_slope(p: CpbParams, m: int, step: float = 1e-5) -> float:
    """Central finite difference ``dE_m/dNg``."""
    def level(ng):
        q = CpbParams(p.ej, p.ec, ng, p.n_charge_cutoff)
        return diagonalize(q, m + 1).levels[m]

    return (level(p.ng + step) - level(p.ng - step)) / (2 * step)


def asymptotic_diag(m: int, p: CpbParams) -> float:
    """Large-EJ/Ec charge-dispersion estimate of ``<m| n - Ng |m>``."""
    ratio = p.ej / p.ec
    if ratio < 20:
        warnings.warn(f"EJ/Ec = {ratio:.3g} is small for the transmon asymptote")
    pref = math.sqrt(2 * math.pi) * 2 ** (4 * m + 2) / math.factorial(m)
    return ((-1) ** (m + 1) * math.sin(2 * math.pi * p.ng) * pref
            * (p.ej / (2 * p.ec)) ** (m / 2 + 0.75) * math.exp(-math.sqrt(8 * ratio)))


def asymptotic_offdiag(m: int, p: CpbParams) -> complex:
    """``<m| n - Ng |m+1> ~ -i sqrt((m+1)/2) (EJ/8Ec)^(1/4)``."""
    return -1j * math.sqrt((m + 1) / 2) * (p.ej / (8 * p.ec)) ** 0.25


@dataclass(frozen=True)
class TransmonDispersive:
    chi: float
    chi01: float
    chi12: float
    omega01_dressed: float
    omega_dressed: float
    delta0: float


def transmon_chi(spec: CpbSpectrum, g01: float, omega1: float, soft_limit: float = 0.1) -> TransmonDispersive:
    """Three-level dispersive shift ``chi = chi01 - chi12/2 = -g01^2 Ec / (Delta0 (Delta0 - Ec))``.

    ``Delta0`` is the exact 0-1 transition minus the resonator frequency; the
    1-2 transition is taken ``Ec`` lower and ``g12 = sqrt(2) g01``.
    """
    ec = spec.params.ec
    omega01 = spec.transition01
    delta0 = omega01 - omega1
    denom = delta0 * (delta0 - ec)
    if abs(denom) < 1e-12 * max(1.0, ec**2):
        raise ZeroDivisionError("resonance: Delta0 (Delta0 - Ec) vanishes")
    if abs(g01 / delta0) > soft_limit or abs(math.sqrt(2) * g01 / (delta0 - ec)) > soft_limit:
        warnings.warn("coupling is not small against the detunings; dispersive formula is unreliable")
    chi01 = g01**2 / delta0
    chi12 = 2 * g01**2 / (delta0 - ec)
    return TransmonDispersive(chi01 - chi12 / 2, chi01, chi12, omega01 + chi01, omega1 - chi12 / 2, delta0)


@dataclass(frozen=True)
class SqueezingCoefficients:
    c_minus: float
    c_plus: float
    g_diag: tuple

    @property
    def dominant(self) -> str:
        return "plus" if abs(self.c_plus) > abs(self.c_minus) else "minus"


def transmon_squeezing_coeffs(spec: CpbSpectrum, g01: float, omega1: float,
                              drive_scale: float = 1.0) -> SqueezingCoefficients:
    """Pair-creation coefficients of the transmon.

    ``c_minus = g01^2 (g00 - g11) / (sqrt2 omega1 Delta0)`` multiplies
    ``-sigma_z``; ``c_plus = g01^2 (g11 - g22) / (sqrt2 omega1 (Delta0 - Ec))``
    multiplies ``(1 + sigma_z)`` and comes from virtual visits to level 2.
    ``g_mm = drive_scale <m|n - Ng|m>`` with ``drive_scale`` standing for the
    opaque ``-2 beta e V_rms`` prefactor.
    """
    if spec.levels.size < 3:
        raise ValueError("need at least three levels")
    if omega1 == 0:
        raise ZeroDivisionError("omega1 must be nonzero")
    ec = spec.params.ec
    delta0 = spec.transition01 - omega1
    if abs(delta0) < 1e-12 or abs(delta0 - ec) < 1e-12:
        raise ZeroDivisionError("resonance in the squeezing denominators")
    g = tuple(drive_scale * charge_matrix_element(spec, m, m).real for m in range(3))
    root2 = math.sqrt(2)
    c_minus = g01**2 * (g[0] - g[1]) / (root2 * omega1 * delta0)
    c_plus = g01**2 * (g[1] - g[2]) / (root2 * omega1 * (delta0 - ec))
    return SqueezingCoefficients(c_minus, c_plus, g)
