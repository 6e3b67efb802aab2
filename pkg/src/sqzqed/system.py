"""Assemble and solve the driven-dissipative models in one call."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liouville, model
from .fockspace import HilbertDims, Operator, annihilation, qubit_ops


@dataclass(frozen=True)
class SolvedSystem:
    params: object
    dims: HilbertDims
    hamiltonian: Operator
    liouvillian: liouville.Liouvillian
    rho: np.ndarray
    kappa: float

    @property
    def a(self) -> Operator:
        return annihilation(self.dims, 0)

    @property
    def sigma_minus(self) -> Operator:
        return qubit_ops(self.dims)[2]

    @property
    def residual(self) -> float:
        return float(np.abs(self.liouvillian.matrix @ liouville.vec(self.rho)).max())

    def excited_population(self) -> float:
        _, sp_, sm = qubit_ops(self.dims)
        return float(np.real(np.trace((sp_ @ sm).full() @ self.rho)))


def solve(p: model.SystemParams, method: str = "sparse", tol: float = liouville.STRUCTURAL_TOL) -> SolvedSystem:
    dims = p.dims
    h = model.h_eff(p, dims)
    lv = liouville.build_liouvillian(h, model.collapse_ops(p, dims))
    rho = liouville.steady_state(lv, method=method, tol=tol)
    return SolvedSystem(p, dims, h, lv, rho, p.kappa)


def solve_multimode(mp: model.MultimodeParams, method: str = "sparse") -> SolvedSystem:
    dims = mp.dims
    h = model.h1_multimode(mp, dims)
    lv = liouville.build_liouvillian(h, model.multimode_collapse_ops(mp, dims))
    # large generators: loosen the absolute residual floor with the matrix scale
    tol = max(liouville.STRUCTURAL_TOL, 1e-14 * abs(mp.delta) * dims.total)
    rho = liouville.steady_state(lv, method=method, tol=tol)
    return SolvedSystem(mp, dims, h, lv, rho, mp.kappa)
