"""Truncated Fock-space and qubit operator algebra.

Ordering convention is fixed: qubit (if present) first, then field modes in
order.  The qubit basis is ``(|e>, |g>)`` so that ``sigma_z = diag(+1, -1)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg
import scipy.sparse as sp


class TruncationWarning(UserWarning):
    """Squeezing or displacement large enough to feel the Fock cutoff."""


@dataclass(frozen=True)
class HilbertDims:
    """Shape of a ``qubit (x) field [(x) field2 ...]`` space.

    ``n_fock`` keeps levels ``|0>..|n_fock-1>`` of the primary mode.  Extra
    modes (used only by the two-mode model) go into ``extra_modes``.
    """

    n_fock: int
    has_qubit: bool = True
    extra_modes: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if int(self.n_fock) != self.n_fock or self.n_fock < 2:
            raise ValueError(f"n_fock must be an integer >= 2, got {self.n_fock}")
        for n in self.extra_modes:
            if n < 2:
                raise ValueError(f"mode truncations must be >= 2, got {n}")
        object.__setattr__(self, "extra_modes", tuple(int(n) for n in self.extra_modes))

    @property
    def modes(self) -> tuple[int, ...]:
        return (int(self.n_fock),) + self.extra_modes

    @property
    def factors(self) -> tuple[int, ...]:
        return ((2,) if self.has_qubit else ()) + self.modes

    @property
    def total(self) -> int:
        return int(np.prod(self.factors))


class Operator:
    """Square matrix on a :class:`HilbertDims` space.

    Storage is a CSR matrix; ``full()`` gives the dense array.  Instances are
    treated as immutable, arithmetic returns new objects.
    """

    __slots__ = ("dims", "_data")

    def __init__(self, dims: HilbertDims, data):
        mat = sp.csr_matrix(data, dtype=complex)
        if mat.shape != (dims.total, dims.total):
            raise ValueError(f"matrix shape {mat.shape} does not match dims total {dims.total}")
        mat.sum_duplicates()
        self.dims = dims
        self._data = mat

    @property
    def data(self) -> sp.csr_matrix:
        return self._data

    @property
    def shape(self):
        return self._data.shape

    def full(self) -> np.ndarray:
        return self._data.toarray()

    def dag(self) -> "Operator":
        return Operator(self.dims, self._data.conj().T)

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            return NotImplemented
        if other.dims != self.dims:
            raise ValueError(f"dimension mismatch: {self.dims} vs {other.dims}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.dims, self._data + other._data)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.dims, self._data - other._data)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.dims, self._data @ other._data)
        return self._data @ np.asarray(other)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.dims, self._data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.dims, self._data / scalar)

    def __neg__(self):
        return Operator(self.dims, -self._data)

    def __repr__(self):
        return f"Operator(dims={self.dims}, nnz={self._data.nnz})"


def identity(dims: HilbertDims) -> Operator:
    return Operator(dims, sp.identity(dims.total, dtype=complex, format="csr"))


def ladder(n: int) -> sp.csr_matrix:
    """Bare annihilation matrix on ``n`` levels (no top-level renormalization)."""
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, shape=(n, n), format="csr", dtype=complex)


def _embed(dims: HilbertDims, qubit_factor=None, mode_factor=None, mode: int = 0) -> sp.csr_matrix:
    parts = []
    if dims.has_qubit:
        parts.append(sp.identity(2, format="csr") if qubit_factor is None else sp.csr_matrix(qubit_factor))
    for k, n in enumerate(dims.modes):
        parts.append(mode_factor if (mode_factor is not None and k == mode) else sp.identity(n, format="csr"))
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), parts).astype(complex)


def annihilation(dims: HilbertDims, mode: int = 0) -> Operator:
    if not 0 <= mode < len(dims.modes):
        raise ValueError(f"mode index {mode} out of range for {dims}")
    return Operator(dims, _embed(dims, mode_factor=ladder(dims.modes[mode]), mode=mode))


def number(dims: HilbertDims, mode: int = 0) -> Operator:
    a = annihilation(dims, mode)
    return a.dag() @ a


_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_SP = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def qubit_ops(dims: HilbertDims) -> tuple[Operator, Operator, Operator]:
    """Return ``(sigma_z, sigma_plus, sigma_minus)`` embedded in ``dims``."""
    if not dims.has_qubit:
        raise ValueError("qubit operators requested on a space without a qubit")
    sz = Operator(dims, _embed(dims, qubit_factor=_SZ))
    splus = Operator(dims, _embed(dims, qubit_factor=_SP))
    return sz, splus, splus.dag()


def basis(dims: HilbertDims, n: int, qubit: str | None = None) -> np.ndarray:
    """Product ket ``|qubit> (x) |n>`` (other modes in vacuum); qubit is 'e' or 'g'."""
    field_vec = np.zeros(int(np.prod(dims.modes)), dtype=complex)
    field_vec[n * int(np.prod(dims.extra_modes, dtype=int))] = 1.0
    if not dims.has_qubit:
        return field_vec
    q = {"e": np.array([1.0, 0.0]), "g": np.array([0.0, 1.0])}[qubit or "g"]
    return np.kron(q, field_vec)


def _squeeze_field(n: int, r: float) -> np.ndarray:
    a = ladder(n).toarray()
    return scipy.linalg.expm(0.5 * r * (a @ a - a.T @ a.T))


def _check_squeeze(n: int, r: float):
    if np.sinh(r) ** 2 > n / 4:
        warnings.warn(
            f"squeeze parameter r={r:.4g} gives sinh^2 r={np.sinh(r) ** 2:.3g} > n_fock/4={n / 4:.3g}",
            TruncationWarning,
            stacklevel=3,
        )


def squeeze_unitary(dims: HilbertDims, r: float) -> Operator:
    """``S(r) = exp[(r/2)(a a - a^dag a^dag)]`` on the primary mode.

    With this sign ``S(r)|0>`` is squeezed in ``X1 = a + a^dag``
    (variance ``exp(-2r)``), and ``S(-r) = exp[r(a^dag a^dag - a a)/2]``.
    """
    _check_squeeze(dims.n_fock, r)
    s = sp.csr_matrix(_squeeze_field(dims.n_fock, r))
    return Operator(dims, _embed(dims, mode_factor=s, mode=0))


def bogoliubov_b(dims: HilbertDims, r: float) -> Operator:
    """Two-photon coherent annihilator ``b = a cosh r + a^dag sinh r``."""
    _check_squeeze(dims.n_fock, r)
    a = annihilation(dims)
    return np.cosh(r) * a + np.sinh(r) * a.dag()


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of raw matrices in the given order."""
    return reduce(np.kron, [np.asarray(o) for o in ops])


def adjoint(op: Operator) -> Operator:
    return op.dag()


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def expect(op: Operator, state: np.ndarray) -> complex:
    """``Tr[op rho]`` for a density matrix, or ``<psi|op|psi>`` for a ket."""
    state = np.asarray(state)
    if state.ndim == 1:
        if state.shape[0] != op.shape[0]:
            raise ValueError("ket dimension mismatch")
        return complex(np.vdot(state, op.data @ state))
    if state.shape != op.shape:
        raise ValueError("density matrix dimension mismatch")
    return complex((op.data.multiply(state.T)).sum())


def apply(op: Operator, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.shape[0] != op.shape[0]:
        raise ValueError("ket dimension mismatch")
    return op.data @ psi


def lower_half(n_fock: int) -> int:
    """Number of Fock levels trusted after truncation."""
    return n_fock // 2
