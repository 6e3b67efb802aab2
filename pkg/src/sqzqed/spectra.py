"""Homodyne and qubit absorption spectra via resolvent solves.

Both spectra are two-sided Fourier transforms of stationary correlations.
Using ``C(-t) = C(t)^*`` they reduce to one-sided transforms, and
``int_0^inf e^{-i w t} e^{L t} dt = (i w - L)^{-1}``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize_scalar
from scipy.signal import find_peaks, peak_widths

from . import liouville, model
from .system import solve
from .fockspace import Operator
from .liouville import Resolvent, map_frequencies, vec

log = logging.getLogger(__name__)

HOMODYNE_GRID = (-0.2, 1.4, 801)
QUBIT_GRID = (0.0, 5.0, 2001)


def grid(start: float, stop: float, points: int) -> np.ndarray:
    if points < 2 or not stop > start:
        raise ValueError("grid needs points >= 2 and stop > start")
    return np.linspace(start, stop, int(points))


@dataclass(frozen=True)
class Feature:
    location: float
    value: float
    width: float
    prominence: float


@dataclass
class Spectrum:
    detunings: np.ndarray
    values: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)
    features: list = field(default_factory=list)

    def __post_init__(self):
        self.detunings = np.asarray(self.detunings, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.detunings.shape != self.values.shape:
            raise ValueError("detunings and values differ in length")
        if np.any(np.diff(self.detunings) <= 0):
            raise ValueError("detuning grid must be strictly increasing")


def _as_dense(op) -> np.ndarray:
    return op.full() if isinstance(op, Operator) else np.asarray(op, dtype=complex)


class HomodyneCalculator:
    """``S_a(w) = 1 + 2 kappa Re Tr{X (i w - L)^{-1} v}`` with the connected source
    ``v = e^{i phi} a rho + e^{-i phi} rho a^dag - <X> rho``."""

    def __init__(self, lv: liouville.Liouvillian, rho: np.ndarray, a, kappa: float, phi: float = 0.0,
                 method: str = "direct"):
        b = np.exp(1j * phi) * _as_dense(a)
        x = b + b.conj().T
        mean_x = np.trace(x @ rho)
        src = b @ rho + rho @ b.conj().T - mean_x * rho
        c0 = np.trace(x @ src)
        if abs(c0.imag) > 1e-8 * max(1.0, abs(c0)):
            raise ValueError(f"quadrature correlation is not real (Im C(0) = {c0.imag:.2e})")
        self.kappa = kappa
        self.phi = phi
        self.mean_x = float(mean_x.real)
        self.resolvent = Resolvent(lv, vec(src), rho_ss=rho, method=method)
        self._weights = vec(x.T)[self.resolvent.index]

    def __call__(self, omega: float) -> float:
        val = self._weights @ self.resolvent.solve_reduced(omega)
        return float(1.0 + 2.0 * self.kappa * val.real)


class QubitCalculator:
    """``S_sigma(w) = (1/pi) Re Tr{sigma_- (-i w - L)^{-1} sigma_+ rho}``."""

    def __init__(self, lv: liouville.Liouvillian, rho: np.ndarray, sigma_minus, method: str = "direct"):
        sm = _as_dense(sigma_minus)
        self.resolvent = Resolvent(lv, vec(sm.conj().T @ rho), rho_ss=rho, method=method)
        self._weights = vec(sm.T)[self.resolvent.index]
        self.total_weight = float(np.real(np.trace(sm @ sm.conj().T @ rho)))

    def __call__(self, omega: float) -> float:
        val = self._weights @ self.resolvent.solve_reduced(-omega)
        return float(val.real / np.pi)


def homodyne_spectrum(lv, rho, a, kappa: float, phi: float = 0.0, detunings=None, workers: int = 1,
                      method: str = "direct", params: dict | None = None) -> Spectrum:
    detunings = grid(*HOMODYNE_GRID) if detunings is None else np.asarray(detunings, dtype=float)
    calc = HomodyneCalculator(lv, rho, a, kappa, phi, method=method)
    values = map_frequencies(calc, detunings, workers)
    info = dict(params or {})
    info.update(phi=phi, kappa=kappa, reduced_dim=calc.resolvent.size)
    return Spectrum(detunings, values, "homodyne", info)


def qubit_spectrum(lv, rho, sigma_minus, detunings=None, workers: int = 1, method: str = "direct",
                   params: dict | None = None) -> Spectrum:
    detunings = grid(*QUBIT_GRID) if detunings is None else np.asarray(detunings, dtype=float)
    calc = QubitCalculator(lv, rho, sigma_minus, method=method)
    values = map_frequencies(calc, detunings, workers)
    if values.min() < -1e-6:
        log.warning("qubit spectrum dips to %.2e below zero", values.min())
    info = dict(params or {})
    info.update(reduced_dim=calc.resolvent.size, total_weight=calc.total_weight)
    return Spectrum(detunings, values, "qubit", info)


def predicted_qubit_lines(p: model.SystemParams, probs) -> list[tuple[float, float]]:
    """Delta lines at ``(2n+1) chi_bar`` with weights ``P(n)``."""
    probs = np.asarray(probs, dtype=float)
    cb = p.chi_bar
    return [((2 * n + 1) * cb, float(w)) for n, w in enumerate(probs)]


def _vertex(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    if i == 0 or i == len(x) - 1:
        return float(x[i]), float(y[i])
    x0, x1, x2 = x[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    if a == 0:
        return float(x1), float(y1)
    xv = -b / (2 * a)
    if not x0 <= xv <= x2:
        return float(x1), float(y1)
    c = y1 - a * x1**2 - b * x1
    return float(xv), float(a * xv**2 + b * xv + c)


def find_extrema(s: Spectrum, kind: str = "peaks", min_prominence: float = 1e-9,
                 linewidth: float | None = None) -> list[Feature]:
    """Local maxima (``peaks``) or minima (``dips``) with quadratic sub-grid vertices."""
    if kind not in ("peaks", "dips"):
        raise ValueError("kind must be 'peaks' or 'dips'")
    x, y = s.detunings, s.values
    if linewidth is not None:
        step = np.max(np.diff(x))
        if step > linewidth / 5:
            warnings.warn(f"grid step {step:.3g} is coarser than linewidth/5 = {linewidth / 5:.3g}")
    signed = y if kind == "peaks" else -y
    idx, props = find_peaks(signed, prominence=min_prominence)
    if idx.size == 0:
        return []
    widths = peak_widths(signed, idx, rel_height=0.5, prominence_data=(props["prominences"],
                                                                         props["left_bases"],
                                                                         props["right_bases"]))[0]
    step = np.mean(np.diff(x))
    out = []
    for i, w, prom in zip(idx, widths, props["prominences"]):
        loc, val = _vertex(x, y, int(i))
        out.append(Feature(loc, val, float(w * step), float(prom)))
    return out


def refine_minimum(fn, x0: float, half_width: float, xatol: float = 1e-6) -> tuple[float, float]:
    """Bounded scalar minimization of ``fn`` in ``[x0 - half_width, x0 + half_width]``."""
    res = minimize_scalar(fn, bounds=(x0 - half_width, x0 + half_width), method="bounded",
                          options={"xatol": xatol})
    return float(res.x), float(res.fun)


def deepest_dip(calc, s: Spectrum) -> tuple[float, float]:
    """Refined ``(location, S_min)`` of the lowest dip in ``s``."""
    dips = find_extrema(s, "dips")
    step = float(np.max(np.diff(s.detunings)))
    if dips:
        best = min(dips, key=lambda f: f.value)
        x0 = best.location
    else:
        x0 = float(s.detunings[np.argmin(s.values)])
    loc, val = refine_minimum(calc, x0, 1.5 * step)
    grid_min = float(s.values.min())
    if grid_min < val:
        return float(s.detunings[np.argmin(s.values)]), grid_min
    return loc, val


def lorentzian_sum(x: np.ndarray, centers, hwhms, areas) -> np.ndarray:
    out = np.zeros_like(np.asarray(x, dtype=float))
    for c, g, a in zip(centers, hwhms, areas):
        out += a / np.pi * g / ((x - c) ** 2 + g * g)
    return out


def fit_lorentzians(s: Spectrum, centers, hwhm0: float = 0.08) -> np.ndarray:
    """Least-squares fit of a sum of Lorentzians; returns rows ``(center, hwhm, area)``."""
    centers = np.asarray(centers, dtype=float)
    x, y = s.detunings, s.values
    p0 = []
    for c in centers:
        h = float(np.interp(c, x, y))
        p0 += [c, hwhm0, max(h, 1e-12) * np.pi * hwhm0]
    p0 = np.array(p0)

    def resid(p):
        q = p.reshape(-1, 3)
        return lorentzian_sum(x, q[:, 0], np.abs(q[:, 1]), q[:, 2]) - y

    res = least_squares(resid, p0, x_scale="jac")
    out = res.x.reshape(-1, 3)
    out[:, 1] = np.abs(out[:, 1])
    return out


def spectrum_from_params(p: model.SystemParams, kind: str, phi: float = 0.0, detunings=None,
                         workers: int = 1, solved=None) -> Spectrum:
    solved = solved or solve(p)
    snap = {k: getattr(p, k) for k in ("chi", "chi_sq", "e1", "kappa", "gamma1", "gamma_phi", "n_fock")}
    if kind == "homodyne":
        return homodyne_spectrum(solved.liouvillian, solved.rho, solved.a, p.kappa, phi, detunings,
                                 workers, params=snap)
    if kind == "qubit":
        return qubit_spectrum(solved.liouvillian, solved.rho, solved.sigma_minus, detunings, workers,
                              params=snap)
    raise ValueError(f"unknown spectrum kind {kind!r}")


@dataclass(frozen=True)
class SweepRow:
    value: float
    s_min: float
    location: float
    status: str = "ok"


def sweep_smin(base: model.SystemParams, chi_sq_values=None, phi_values=None, detunings=None,
               workers: int = 1) -> list[SweepRow]:
    """Squeezing minimum over a grid of ``chi_sq`` (at fixed phi) or of ``phi``.

    For a ``chi_sq`` sweep each row holds the refined minimum of ``S_a``.  For a
    ``phi`` sweep the spectrum is evaluated at the resonance found for
    ``phi = 0``, which is where the squeezed quadrature has its dip and the
    conjugate quadrature its amplification peak.
    """
    if (chi_sq_values is None) == (phi_values is None):
        raise ValueError("give exactly one of chi_sq_values or phi_values")
    detunings = grid(*HOMODYNE_GRID) if detunings is None else np.asarray(detunings, dtype=float)
    rows = []
    if chi_sq_values is not None:
        for c in chi_sq_values:
            try:
                p = base.with_(chi_sq=float(c))
                sol = solve(p)
                calc = HomodyneCalculator(sol.liouvillian, sol.rho, sol.a, p.kappa, 0.0)
                s = Spectrum(detunings, map_frequencies(calc, detunings, workers), "homodyne")
                loc, smin = deepest_dip(calc, s)
                rows.append(SweepRow(float(c), smin, loc))
            except Exception as exc:  # record and keep sweeping
                log.warning("sweep point chi_sq=%s failed: %s", c, exc)
                rows.append(SweepRow(float(c), float("nan"), float("nan"), f"error: {exc}"))
        return rows

    sol = solve(base)
    calc0 = HomodyneCalculator(sol.liouvillian, sol.rho, sol.a, base.kappa, 0.0)
    s0 = Spectrum(detunings, map_frequencies(calc0, detunings, workers), "homodyne")
    loc0, _ = deepest_dip(calc0, s0)
    for phi in phi_values:
        try:
            calc = HomodyneCalculator(sol.liouvillian, sol.rho, sol.a, base.kappa, float(phi))
            rows.append(SweepRow(float(phi), calc(loc0), loc0))
        except Exception as exc:
            log.warning("sweep point phi=%s failed: %s", phi, exc)
            rows.append(SweepRow(float(phi), float("nan"), float("nan"), f"error: {exc}"))
    return rows
