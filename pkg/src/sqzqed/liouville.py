"""Lindblad superoperators, steady states and resolvent solves.

Vectorization is column stacking throughout: ``vec(rho)[i + d*j] = rho[i, j]``,
so ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fockspace import HilbertDims, Operator

log = logging.getLogger(__name__)

STRUCTURAL_TOL = 1e-10
SOLVE_TOL = 1e-9


class SolverError(RuntimeError):
    """A linear solve or steady-state search failed."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    d = d or int(round(np.sqrt(v.size)))
    return v.reshape(d, d, order="F")


def _mat(op) -> sp.csr_matrix:
    if isinstance(op, Operator):
        return op.data
    return sp.csr_matrix(op, dtype=complex)


def spre(a) -> sp.csr_matrix:
    """Superoperator of ``rho -> a rho``."""
    a = _mat(a)
    return sp.kron(sp.identity(a.shape[0], format="csr"), a, format="csr")


def spost(a) -> sp.csr_matrix:
    """Superoperator of ``rho -> rho a``."""
    a = _mat(a)
    return sp.kron(a.T, sp.identity(a.shape[0], format="csr"), format="csr")


def dissipator(op) -> sp.csr_matrix:
    """Superoperator of ``D[L] rho = L rho L^dag - (L^dag L rho + rho L^dag L)/2``."""
    lm = _mat(op)
    if lm.shape[0] != lm.shape[1]:
        raise ValueError("collapse operator must be square")
    ldl = lm.conj().T @ lm
    eye = sp.identity(lm.shape[0], format="csr")
    return (sp.kron(lm.conj(), lm) - 0.5 * sp.kron(eye, ldl) - 0.5 * sp.kron(ldl.T, eye)).tocsr()


def apply_dissipator(op, rho: np.ndarray) -> np.ndarray:
    """Direct matrix form of ``D[L] rho`` (used as a cross-check)."""
    lm = op.full() if isinstance(op, Operator) else np.asarray(op)
    if lm.shape != rho.shape:
        raise ValueError("dimension mismatch between collapse operator and rho")
    ldl = lm.conj().T @ lm
    return lm @ rho @ lm.conj().T - 0.5 * (ldl @ rho + rho @ ldl)


@dataclass(frozen=True)
class Liouvillian:
    dim: int
    matrix: sp.csc_matrix
    dims: HilbertDims | None = None
    hamiltonian: Operator | None = field(default=None, repr=False, compare=False)
    collapse: tuple = field(default=(), repr=False, compare=False)

    def __matmul__(self, v):
        return self.matrix @ v

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.dim)


def build_liouvillian(h, collapse=()) -> Liouvillian:
    """``-i[H, .] + sum_k rate_k D[L_k]`` as a sparse ``d^2 x d^2`` matrix."""
    hm = _mat(h)
    d = hm.shape[0]
    eye = sp.identity(d, format="csr")
    lv = -1j * (sp.kron(eye, hm) - sp.kron(hm.T, eye))
    for rate, op in collapse:
        if rate < 0:
            raise ValueError(f"negative collapse rate {rate}")
        if rate == 0:
            continue
        if _mat(op).shape != (d, d):
            raise ValueError("collapse operator dimension does not match the Hamiltonian")
        lv = lv + rate * dissipator(op)
    lv = sp.csc_matrix(lv)
    lv.eliminate_zeros()
    dims = h.dims if isinstance(h, Operator) else None
    return Liouvillian(d, lv, dims, h if isinstance(h, Operator) else None, tuple(collapse))


def trace_row(d: int) -> np.ndarray:
    row = np.zeros(d * d, dtype=complex)
    row[:: d + 1] = 1.0
    return row


def check_density(rho: np.ndarray, tol: float = STRUCTURAL_TOL, pos_tol: float = 1e-8) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit trace and PSD."""
    herm = np.abs(rho - rho.conj().T).max()
    if herm > tol:
        raise ValueError(f"density matrix not Hermitian (max deviation {herm:.2e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix trace {tr} != 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lam < -pos_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam:.2e}")


def _finish(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _bordered(lv: Liouvillian) -> sp.csc_matrix:
    m = lv.matrix.tolil(copy=True)
    m[0, :] = trace_row(lv.dim)
    return m.tocsc()


def steady_state(lv: Liouvillian, method: str = "sparse", tol: float = STRUCTURAL_TOL,
                 gap_tol: float = 1e-8, refine: int = 2) -> np.ndarray:
    """Unique stationary density matrix of ``lv``.

    ``sparse`` solves the bordered system (first row replaced by the trace
    constraint) by sparse LU with iterative refinement; ``dense`` takes the
    null vector from an SVD and doubles as the oracle for small instances.
    """
    d = lv.dim
    if method == "dense":
        _, s, vh = scipy.linalg.svd(lv.matrix.toarray())
        if s[-2] < gap_tol:
            raise SolverError(f"null space is not simple: two smallest singular values {s[-1]:.2e}, {s[-2]:.2e}")
        x = vh[-1].conj()
        x = x / (trace_row(d) @ x)
    elif method == "sparse":
        m = _bordered(lv)
        b = np.zeros(d * d, dtype=complex)
        b[0] = 1.0
        try:
            lu = spla.splu(m)
        except RuntimeError as exc:
            raise SolverError(f"bordered Liouvillian is singular ({exc}); null space is degenerate") from exc
        x = lu.solve(b)
        for _ in range(refine):
            x = x + lu.solve(b - m @ x)
        if not np.all(np.isfinite(x)):
            raise SolverError("steady-state solve produced non-finite entries")
    else:
        raise ValueError(f"unknown steady-state method {method!r}")

    resid = np.abs(lv.matrix @ x).max()
    if resid > tol:
        raise SolverError(f"steady-state residual {resid:.2e} exceeds {tol:.0e}")
    return _finish(unvec(x, d))


def spectral_gap(lv: Liouvillian) -> tuple[float, float]:
    """Two smallest singular values of the dense generator (small instances)."""
    s = scipy.linalg.svdvals(lv.matrix.toarray())
    return float(s[-1]), float(s[-2])


def evolve(lv: Liouvillian, rho0: np.ndarray, t: float) -> np.ndarray:
    """``exp(L t) rho0`` via ``expm_multiply`` on the sparse generator."""
    if t < 0:
        raise ValueError("evolution time must be >= 0")
    if t == 0:
        return np.array(rho0, dtype=complex, copy=True)
    x = spla.expm_multiply(lv.matrix * t, vec(rho0).astype(complex))
    if not np.all(np.isfinite(x)):
        raise SolverError("propagation diverged")
    return unvec(x, lv.dim)


def reachable_subspace(matrix: sp.spmatrix, v: np.ndarray) -> np.ndarray:
    """Indices reachable from the support of ``v`` under repeated application of ``matrix``.

    The Krylov space of ``v`` lives on these indices, so resolvent solves can
    be restricted to them without approximation.
    """
    pattern = sp.csr_matrix((np.abs(matrix) > 0).astype(np.int8))
    reach = np.abs(v) > 0
    count = reach.sum()
    while True:
        reach = reach | (pattern @ reach.astype(np.int8) > 0)
        new = reach.sum()
        if new == count:
            return np.flatnonzero(reach)
        count = new


class Resolvent:
    """Solves ``(i omega - L) x = v`` for a fixed right-hand side at many ``omega``.

    The generator is restricted to the subspace reachable from ``v``.  Near
    ``omega = 0`` the stationary component of ``v`` is removed first.  With
    ``method='krylov'`` each solve runs GMRES preconditioned by the LU of the
    nearest anchor frequency instead of a fresh factorization.
    """

    def __init__(self, lv: Liouvillian, v: np.ndarray, rho_ss: np.ndarray | None = None,
                 method: str = "direct", reduce: bool = True, tol: float = SOLVE_TOL,
                 anchor_spacing: float = 0.05):
        if method not in ("direct", "krylov"):
            raise ValueError(f"unknown resolvent method {method!r}")
        self.lv = lv
        self.method = method
        self.tol = tol
        self.anchor_spacing = anchor_spacing
        self._rho_ss = rho_ss
        v = np.asarray(v, dtype=complex)
        self.v = v
        n = v.size
        self.index = reachable_subspace(lv.matrix, v) if reduce else np.arange(n)
        self.sub = lv.matrix[self.index][:, self.index].tocsc()
        self._eye = sp.identity(self.index.size, dtype=complex, format="csc")
        self._anchors: dict[float, object] = {}
        self._deflated = None

    @property
    def size(self) -> int:
        return int(self.index.size)

    def _rhs(self, omega: float) -> np.ndarray:
        if abs(omega) >= 1e-6:
            return self.v[self.index]
        if self._deflated is None:
            rho = self._rho_ss if self._rho_ss is not None else steady_state(self.lv)
            full = self.v - (trace_row(self.lv.dim) @ self.v) * vec(rho)
            self._deflated = full[self.index]
        return self._deflated

    def _solve_singular(self, b: np.ndarray) -> np.ndarray:
        # omega ~ 0: (-L) x = b on the trace-free complement; replace one diagonal equation by Tr x = 0
        d = self.lv.dim
        tr = trace_row(d)[self.index]
        m = (-self.sub).tolil()
        rows = np.flatnonzero(tr)
        if rows.size == 0:
            return spla.splu((-self.sub).tocsc()).solve(b)
        m[rows[0], :] = tr
        rhs = b.copy()
        rhs[rows[0]] = 0.0
        return spla.splu(m.tocsc()).solve(rhs)

    def _anchor(self, omega: float):
        key = round(omega / self.anchor_spacing) * self.anchor_spacing
        lu = self._anchors.get(key)
        if lu is None:
            lu = spla.splu((1j * key * self._eye - self.sub).tocsc())
            self._anchors[key] = lu
        return lu

    def solve_reduced(self, omega: float) -> np.ndarray:
        b = self._rhs(omega)
        a = (1j * omega * self._eye - self.sub).tocsc()
        if abs(omega) < 1e-6:
            x = self._solve_singular(b)
        elif self.method == "direct":
            try:
                x = spla.splu(a).solve(b)
            except RuntimeError as exc:
                raise SolverError(f"resolvent factorization failed at omega={omega}: {exc}") from exc
        else:
            lu = self._anchor(omega)
            pre = spla.LinearOperator(a.shape, matvec=lu.solve, dtype=complex)
            x, info = spla.gmres(a, b, M=pre, rtol=self.tol * 1e-2, atol=0.0, restart=50, maxiter=200)
            if info != 0:
                raise SolverError(f"GMRES did not converge at omega={omega} (info={info})")
        bnorm = np.linalg.norm(b)
        resid = np.linalg.norm(a @ x - b) if abs(omega) >= 1e-6 else 0.0
        if bnorm > 0 and resid > self.tol * bnorm:
            raise SolverError(f"resolvent residual {resid:.2e} exceeds {self.tol:.0e}*|v| at omega={omega}")
        return x

    def solve(self, omega: float) -> np.ndarray:
        out = np.zeros(self.v.size, dtype=complex)
        out[self.index] = self.solve_reduced(omega)
        return out

    def trace_with(self, op, omega: float) -> complex:
        """``Tr[op x(omega)]``."""
        weights = vec(_mat(op).toarray().T)[self.index]
        return complex(weights @ self.solve_reduced(omega))


def resolvent_apply(lv: Liouvillian, omega: float, v: np.ndarray, rho_ss: np.ndarray | None = None,
                    method: str = "direct") -> np.ndarray:
    return Resolvent(lv, v, rho_ss=rho_ss, method=method).solve(omega)


def map_frequencies(fn, omegas, workers: int = 1) -> np.ndarray:
    """Evaluate ``fn`` on each frequency; results are in input order."""
    omegas = list(omegas)
    if workers <= 1:
        return np.array([fn(w) for w in omegas])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(fn, omegas)))
