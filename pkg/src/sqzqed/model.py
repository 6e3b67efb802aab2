"""Parameter sets, coupling geometry and Hamiltonian builders.

Everything is in units of the dispersive shift (chi = 1) with hbar = 1.  The
single-mode Hamiltonian lives in the frame rotating at the qubit splitting and
at the first-harmonic frequency, so only detunings appear.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .fockspace import HilbertDims, Operator, annihilation, identity, qubit_ops


class RegimeError(ValueError):
    """Parameters outside the diagonalizable (chi_sq < chi/2) regime."""


@dataclass(frozen=True)
class SystemParams:
    chi: float = 1.0
    chi_sq: float = 0.0
    e1: float = 0.0
    kappa: float = 0.01
    gamma1: float = 0.01
    gamma_phi: float = 0.067
    n_fock: int = 30
    unstable: bool = False

    def __post_init__(self):
        if not self.chi > 0:
            raise ValueError(f"chi must be > 0, got {self.chi}")
        if self.chi_sq < 0:
            raise ValueError(f"chi_sq must be >= 0, got {self.chi_sq}")
        for name in ("e1", "gamma1", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if int(self.n_fock) != self.n_fock or self.n_fock < 2:
            raise ValueError(f"n_fock must be an integer >= 2, got {self.n_fock}")
        if self.chi_sq >= self.chi / 2 and not self.unstable:
            raise RegimeError(
                f"chi_sq={self.chi_sq} >= chi/2={self.chi / 2}: outside the diagonalizable regime "
                "(set unstable=True to build anyway)"
            )

    @property
    def dims(self) -> HilbertDims:
        return HilbertDims(int(self.n_fock), has_qubit=True)

    @property
    def chi_bar(self) -> float:
        return chi_bar(self.chi, self.chi_sq)

    @property
    def r(self) -> float:
        return squeeze_parameter(self.chi, self.chi_sq)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def chi_bar(chi: float, chi_sq: float) -> float:
    """Effective dispersive shift ``sqrt(chi^2 - (2 chi_sq)^2)``."""
    if 2 * chi_sq >= chi:
        raise RegimeError(f"chi_sq={chi_sq} must be < chi/2={chi / 2}")
    return float(np.sqrt(chi**2 - (2 * chi_sq) ** 2))


def squeeze_parameter(chi: float, chi_sq: float) -> float:
    """``r`` with ``tanh 2r = 2 chi_sq / chi``."""
    if 2 * chi_sq >= chi:
        raise RegimeError(f"chi_sq={chi_sq} must be < chi/2={chi / 2}")
    return 0.5 * float(np.arctanh(2 * chi_sq / chi))


@dataclass(frozen=True)
class CouplingGeometry:
    x: float
    L: float = 1.0
    g0: float = 1.0
    theta: float = np.pi / 4
    delta: float = 10.0
    omega1: float = 100.0

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("resonator length must be > 0")
        if not -self.L / 2 <= self.x <= self.L / 2:
            raise ValueError(f"qubit position x={self.x} outside [-L/2, L/2]")
        if not self.g0 > 0:
            raise ValueError("g0 must be > 0")


def coupling_g(n: int, geom: CouplingGeometry) -> float:
    """Qubit coupling to harmonic ``n``: sin profile for odd n, cos for even n."""
    if n < 1:
        raise ValueError(f"harmonic index must be >= 1, got {n}")
    phase = n * np.pi * geom.x / geom.L
    shape = np.sin(phase) if n % 2 else np.cos(phase)
    g = geom.g0 * np.sqrt(n) * shape
    # sin(k*pi) at a node is ~1e-16, not zero
    return 0.0 if abs(g) < 1e-14 * geom.g0 * np.sqrt(n) else float(g)


def check_dispersive(geom: CouplingGeometry, threshold: float = 0.3) -> float:
    ratio = abs(coupling_g(1, geom) * np.sin(geom.theta) / geom.delta)
    if ratio >= threshold:
        warnings.warn(f"|g1 sin(theta)/Delta| = {ratio:.3g} is not small; dispersive expansion is unreliable")
    return ratio


def chi_from_geometry(geom: CouplingGeometry) -> float:
    return (coupling_g(1, geom) * np.sin(geom.theta)) ** 2 / geom.delta


def chi_sq_from_pump(e2: float, kappa2: float, geom: CouplingGeometry) -> float:
    """Squeezing strength induced by a classical second-harmonic pump."""
    if kappa2 == 0:
        raise ZeroDivisionError("kappa2 must be nonzero")
    if geom.delta == 0 or geom.omega1 == 0:
        raise ZeroDivisionError("Delta and omega1 must be nonzero")
    g1 = coupling_g(1, geom)
    g2 = coupling_g(2, geom)
    return (e2 / kappa2) * (g1**2 * g2 / (geom.delta * geom.omega1)) * np.sin(geom.theta) * np.sin(2 * geom.theta)


def _require_match(p: SystemParams, dims: HilbertDims | None) -> HilbertDims:
    if dims is None:
        return p.dims
    if not dims.has_qubit:
        raise ValueError("Hamiltonian needs a qubit factor")
    if dims.n_fock != p.n_fock or dims.extra_modes:
        raise ValueError(f"dims {dims} do not match n_fock={p.n_fock}")
    return dims


def h_eff(p: SystemParams, dims: HilbertDims | None = None) -> Operator:
    """``chi (a^dag a + 1/2) sz + chi_sq (a^dag^2 + a^2) sz + E1 (a^dag + a)``."""
    dims = _require_match(p, dims)
    a = annihilation(dims)
    ad = a.dag()
    sz, _, _ = qubit_ops(dims)
    one = identity(dims)
    field_part = p.chi * (ad @ a + 0.5 * one) + p.chi_sq * (ad @ ad + a @ a)
    return field_part @ sz + p.e1 * (ad + a)


def h_diag_form(p: SystemParams, dims: HilbertDims | None = None) -> Operator:
    """Diagonal form written in the two-photon-coherent number basis.

    The ladder matrix here plays the role of ``b``:
    ``chi_bar (b^dag b + 1/2) sz + E1 ((chi-2chi_sq)/(chi+2chi_sq))^(1/4) (b^dag + b)``.
    """
    dims = _require_match(p, dims)
    cb = p.chi_bar
    b = annihilation(dims)
    sz, _, _ = qubit_ops(dims)
    scale = ((p.chi - 2 * p.chi_sq) / (p.chi + 2 * p.chi_sq)) ** 0.25
    return cb * (b.dag() @ b + 0.5 * identity(dims)) @ sz + p.e1 * scale * (b.dag() + b)


def collapse_ops(p: SystemParams, dims: HilbertDims | None = None) -> list[tuple[float, Operator]]:
    """``kappa D[a] + gamma1 D[sigma_-] + (gamma_phi/2) D[sigma_z]``."""
    dims = _require_match(p, dims)
    sz, _, sm = qubit_ops(dims)
    return [(p.kappa, annihilation(dims)), (p.gamma1, sm), (p.gamma_phi / 2, sz)]


@dataclass(frozen=True)
class MultimodeParams:
    """Two quantized modes (harmonics 1 and 2) plus the qubit.

    ``g`` is the exchange coupling ``g1 sin(theta)``; ``g_cross`` the
    assisted coupling ``(g1 g2 / 2 omega1) sin(2 theta)``; ``delta`` the qubit
    detuning from the first harmonic.  Mode 3 sits at a node and is dropped.
    With ``displace_mode2`` the second mode is written as its classical
    amplitude ``-2i conj(e2)/kappa2`` plus quantum fluctuations.
    """

    n1_fock: int = 40
    n2_fock: int = 2
    g: float = 39.3
    g_cross: float = 0.05
    delta: float = 1965.0
    e1: float = 0.0
    e2: complex = 0.0
    kappa: float = 0.01
    kappa2: float = 1.0
    gamma1: float = 0.01
    gamma_phi: float = 0.067
    displace_mode2: bool = True

    def __post_init__(self):
        if self.n1_fock < 2 or self.n2_fock < 2:
            raise ValueError("per-mode truncations must be >= 2")
        if not self.kappa2 > 0:
            raise ValueError("kappa2 must be > 0")
        if self.delta == 0:
            raise ValueError("delta must be nonzero")

    @property
    def dims(self) -> HilbertDims:
        return HilbertDims(self.n1_fock, has_qubit=True, extra_modes=(self.n2_fock,))

    @property
    def alpha2(self) -> complex:
        return -2j * np.conj(self.e2) / self.kappa2


def h1_multimode(mp: MultimodeParams, dims: HilbertDims | None = None) -> Operator:
    """Two-mode exchange Hamiltonian in the frame of the drives.

    Mode 1 rotates at omega1, mode 2 at 2 omega1 and the qubit at omega1, which
    leaves ``(Delta/2) sigma_z`` plus time-independent couplings.
    """
    dims = dims or mp.dims
    if dims.modes != (mp.n1_fock, mp.n2_fock) or not dims.has_qubit:
        raise ValueError(f"dims {dims} do not match the two-mode parameters")
    a1 = annihilation(dims, 0)
    a2 = annihilation(dims, 1)
    sz, splus, sminus = qubit_ops(dims)
    one = identity(dims)
    h = (mp.delta / 2) * sz - mp.g * (a1 @ splus + a1.dag() @ sminus)
    h = h + mp.e1 * (a1 + a1.dag())
    if mp.displace_mode2:
        # drive on the fluctuation cancels against the displaced kappa2 dissipator
        a2 = a2 + mp.alpha2 * one
    else:
        h = h + mp.e2 * a2 + np.conj(mp.e2) * a2.dag()
    h = h - mp.g_cross * (a1.dag() @ a2 @ splus + a1 @ a2.dag() @ sminus)
    return h


def multimode_collapse_ops(mp: MultimodeParams, dims: HilbertDims | None = None) -> list[tuple[float, Operator]]:
    dims = dims or mp.dims
    sz, _, sm = qubit_ops(dims)
    return [
        (mp.kappa, annihilation(dims, 0)),
        (mp.kappa2, annihilation(dims, 1)),
        (mp.gamma1, sm),
        (mp.gamma_phi / 2, sz),
    ]


def multimode_effective(mp: MultimodeParams) -> tuple[float, float]:
    """Second-order ``(chi, chi_sq)`` of the two-mode model.

    Eliminating the qubit exchange ``sigma_+ (g a1 + G a1^dag) + h.c.`` with
    ``G = g_cross alpha2`` gives ``chi = (g^2 + |G|^2)/Delta`` and
    ``chi_sq = g |G| / Delta``.
    """
    big_g = abs(mp.g_cross * mp.alpha2)
    return (mp.g**2 + big_g**2) / mp.delta, mp.g * big_g / mp.delta


def tune_multimode(
    chi_sq: float = 0.41,
    chi: float = 1.0,
    coupling_ratio: float = 0.02,
    g_cross: float = 0.05,
    kappa2: float = 1.0,
    **kwargs,
) -> MultimodeParams:
    """Pick ``delta``, ``g`` and a real-amplitude pump ``e2`` hitting ``(chi, chi_sq)``.

    ``coupling_ratio`` is ``g/Delta``; it is not fixed by the dispersive
    limit alone and the residual qubit dressing grows with it.
    """
    if not 0 < chi_sq < chi / 2:
        raise RegimeError("need 0 < chi_sq < chi/2")
    s = chi_sq / chi
    # G/g solves x/(1+x^2) = s on the branch x < 1
    x = (1 - np.sqrt(1 - 4 * s * s)) / (2 * s)
    delta = chi / (coupling_ratio**2 * (1 + x * x))
    g = coupling_ratio * delta
    alpha2 = x * g / g_cross
    e2 = -0.5j * kappa2 * alpha2
    return MultimodeParams(g=g, g_cross=g_cross, delta=delta, e2=e2, kappa2=kappa2, **kwargs)
