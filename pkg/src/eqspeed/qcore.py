"""Dense linear-algebra primitives for bipartite quantum systems.

States and operators are plain complex numpy arrays. The ``as_*`` helpers
validate the physical invariants once, at construction; every other function
here assumes its inputs are already valid.

Index convention is subsystem-major: global index = i_S * d_B + i_B, so a
vector of length D reshapes to a (d_S, d_B) matrix with ``reshape``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL_HERM = 1e-10
TOL_NORM = 1e-10
TOL_PSD = 1e-9
TOL_ORTH = 1e-10
TOL_RANK = 1e-9  # relative to operator_norm

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class InvariantError(ValueError):
    """An input violates a physical or structural invariant."""


class DimensionError(InvariantError):
    """Array shapes do not match the declared dimensions."""


@dataclass(frozen=True)
class BipartiteDims:
    d_S: int
    d_B: int

    def __post_init__(self):
        if int(self.d_S) != self.d_S or int(self.d_B) != self.d_B:
            raise InvariantError(f"dimensions must be integers, got {self.d_S}, {self.d_B}")
        if self.d_S < 2 or self.d_B < 1:
            raise InvariantError(f"need d_S >= 2 and d_B >= 1, got d_S={self.d_S}, d_B={self.d_B}")

    @property
    def D(self) -> int:
        return self.d_S * self.d_B


def _square(x, dim=None) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {x.shape[0]}")
    return x


def as_hermitian(x, dim=None, tol=TOL_HERM) -> np.ndarray:
    """Validate ``x`` as a Hermitian matrix and return it as a complex array."""
    x = _square(x, dim)
    err = np.abs(x - x.conj().T).max(initial=0.0)
    if err > tol * max(1.0, np.abs(x).max(initial=0.0)):
        raise InvariantError(f"matrix is not Hermitian (max asymmetry {err:.3g})")
    return x


def as_density(x, dim=None) -> np.ndarray:
    """Validate ``x`` as a density matrix: Hermitian, unit trace, PSD."""
    x = as_hermitian(x, dim)
    tr = np.trace(x)
    if abs(tr - 1) > TOL_NORM:
        raise InvariantError(f"density matrix trace is {tr.real:.12g}, expected 1")
    lo = np.linalg.eigvalsh(x)[0]
    if lo < -TOL_PSD:
        raise InvariantError(f"density matrix has negative eigenvalue {lo:.3g}")
    return x


def as_pure(psi, dim=None) -> np.ndarray:
    """Validate ``psi`` as a normalized state vector."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionError(f"state vector must be 1-d, got shape {psi.shape}")
    if dim is not None and psi.shape[0] != dim:
        raise DimensionError(f"expected state of dimension {dim}, got {psi.shape[0]}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > TOL_NORM:
        raise InvariantError(f"state norm is {nrm:.12g}, expected 1")
    return psi


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def kron(a, b) -> np.ndarray:
    """Tensor product a (x) b in the subsystem-major convention."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _check_global(rho, dims: BipartiteDims) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape[-2:] != (dims.D, dims.D):
        raise DimensionError(
            f"operator has shape {rho.shape[-2:]}, expected ({dims.D}, {dims.D}) for {dims}"
        )
    return rho


def partial_trace_bath(rho, dims: BipartiteDims) -> np.ndarray:
    """Trace out the bath. Works on stacks of operators (leading axes)."""
    rho = _check_global(rho, dims)
    r = rho.reshape(rho.shape[:-2] + (dims.d_S, dims.d_B, dims.d_S, dims.d_B))
    return np.einsum("...ibjb->...ij", r)


def partial_trace_sys(rho, dims: BipartiteDims) -> np.ndarray:
    """Trace out the subsystem. Works on stacks of operators (leading axes)."""
    rho = _check_global(rho, dims)
    r = rho.reshape(rho.shape[:-2] + (dims.d_S, dims.d_B, dims.d_S, dims.d_B))
    return np.einsum("...sasb->...ab", r)


def reduced_from_vectors(psi, phi, dims: BipartiteDims) -> np.ndarray:
    """tr_B |psi><phi| without forming the D x D outer product.

    ``psi`` and ``phi`` may be (D,) vectors or (n, D) stacks.
    """
    a = np.asarray(psi).reshape(np.shape(psi)[:-1] + (dims.d_S, dims.d_B))
    b = np.asarray(phi).reshape(np.shape(phi)[:-1] + (dims.d_S, dims.d_B))
    return a @ np.swapaxes(b.conj(), -1, -2)


def hermitian_eigvals(x) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix or a stack of them."""
    x = np.asarray(x)
    return np.linalg.eigvalsh(0.5 * (x + np.swapaxes(x.conj(), -1, -2)))


def trace_norm(x) -> float | np.ndarray:
    return np.abs(hermitian_eigvals(x)).sum(axis=-1)


def hs_norm(x) -> float | np.ndarray:
    x = np.asarray(x)
    return np.sqrt(np.sum(np.abs(x) ** 2, axis=(-2, -1)))


def operator_norm(x) -> float | np.ndarray:
    return np.abs(hermitian_eigvals(x)).max(axis=-1)


def trace_distance(r1, r2) -> float | np.ndarray:
    r1, r2 = np.asarray(r1), np.asarray(r2)
    if r1.shape[-2:] != r2.shape[-2:]:
        raise DimensionError(f"cannot compare states of shape {r1.shape[-2:]} and {r2.shape[-2:]}")
    return 0.5 * trace_norm(r1 - r2)


def numerical_rank(x, rel_tol=TOL_RANK) -> int:
    ev = np.abs(hermitian_eigvals(x))
    if ev.size == 0 or ev.max() == 0:
        return 0
    return int(np.count_nonzero(ev > rel_tol * ev.max()))


@dataclass(frozen=True)
class OperatorBasis:
    """Hermitian operators on C^d, orthonormal under tr(e_k e_l).

    ``elements`` has shape (d*d, d, d); element 0 is I/sqrt(d).
    """

    d: int
    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.elements.shape != (self.d * self.d, self.d, self.d):
            raise DimensionError(f"basis for d={self.d} has shape {self.elements.shape}")

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def gram(self) -> np.ndarray:
        return np.einsum("kij,lji->kl", self.elements, self.elements)

    def expand(self, m) -> np.ndarray:
        """Coefficients tr(m e_k). Real whenever m is Hermitian."""
        return np.einsum("ij,kji->k", np.asarray(m), self.elements)

    def resum(self, coeffs) -> np.ndarray:
        return np.einsum("k,kij->ij", np.asarray(coeffs), self.elements)


def hermitian_basis(d: int) -> OperatorBasis:
    """Identity plus normalized generalized Gell-Mann matrices.

    Order: I/sqrt(d); then for each pair j < k the symmetric and the
    antisymmetric element; then the d - 1 diagonal elements.
    """
    if int(d) != d or d < 1:
        raise InvariantError(f"basis dimension must be a positive integer, got {d}")
    d = int(d)
    out = [np.eye(d, dtype=complex) / np.sqrt(d)]
    s = 1 / np.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = s
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k], anti[k, j] = -1j * s, 1j * s
            out += [sym, anti]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        out.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return OperatorBasis(d, np.array(out))


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Ginibre d x rank matrix (full rank by default)."""
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def haar_state(d: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return psi / np.linalg.norm(psi)
