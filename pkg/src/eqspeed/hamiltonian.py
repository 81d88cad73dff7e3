"""Hamiltonians on S (x) B: the unique four-part split, spectra, and the gap test."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    TOL_HERM,
    TOL_NORM,
    BipartiteDims,
    DimensionError,
    InvariantError,
    as_hermitian,
    kron,
    operator_norm,
    partial_trace_bath,
    partial_trace_sys,
)

TOL_DEG = 1e-9  # x spectral range
TOL_GAP = 1e-9  # x spectral range
TOL_EIG = 1e-10  # x operator norm
MAX_REPORTED_COLLISIONS = 1000


class SpectralError(RuntimeError):
    """Eigendecomposition failed or produced an inconsistent result."""


@dataclass(frozen=True)
class HamiltonianDecomposition:
    """H = h0 I + h_S (x) I + I (x) h_B + h_int with every part traceless."""

    dims: BipartiteDims
    total: np.ndarray = field(repr=False)
    h0_coeff: float
    h_S: np.ndarray = field(repr=False)
    h_B: np.ndarray = field(repr=False)
    h_int: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = self.dims
        as_hermitian(self.total, d.D)
        as_hermitian(self.h_S, d.d_S)
        as_hermitian(self.h_B, d.d_B)
        as_hermitian(self.h_int, d.D)
        scale = max(1.0, float(np.abs(self.total).max(initial=0.0)))
        resid = self.total - self.reassemble()
        if np.abs(resid).max() > TOL_HERM * d.D * scale:
            raise InvariantError("parts do not add up to the total Hamiltonian")
        tol = TOL_NORM * scale * d.D
        if abs(np.trace(self.h_S)) > tol or abs(np.trace(self.h_B)) > tol:
            raise InvariantError("local Hamiltonians must be traceless")
        if (np.abs(partial_trace_bath(self.h_int, d)).max() > tol
                or np.abs(partial_trace_sys(self.h_int, d)).max() > tol):
            raise InvariantError("interaction must be traceless on both factors")

    def reassemble(self) -> np.ndarray:
        d = self.dims
        return (self.h0_coeff * np.eye(d.D)
                + kron(self.h_S, np.eye(d.d_B))
                + kron(np.eye(d.d_S), self.h_B)
                + self.h_int)

    def parts(self) -> dict[str, np.ndarray]:
        """The four parts, each embedded as a D x D operator."""
        d = self.dims
        return {
            "h0": self.h0_coeff * np.eye(d.D, dtype=complex),
            "h_S": kron(self.h_S, np.eye(d.d_B)),
            "h_B": kron(np.eye(d.d_S), self.h_B),
            "h_int": self.h_int,
        }

    def coupling_operator(self) -> np.ndarray:
        """h_S (x) I + h_int, the only part that moves the subsystem."""
        return kron(self.h_S, np.eye(self.dims.d_B)) + self.h_int

    def scaled(self, lam: float) -> "HamiltonianDecomposition":
        return HamiltonianDecomposition(self.dims, lam * self.total, lam * self.h0_coeff,
                                        lam * self.h_S, lam * self.h_B, lam * self.h_int)

    def shifted(self, c: float) -> "HamiltonianDecomposition":
        """Add c * I to the total."""
        return HamiltonianDecomposition(self.dims, self.total + c * np.eye(self.dims.D),
                                        self.h0_coeff + c, self.h_S, self.h_B, self.h_int)


def decompose(total, dims: BipartiteDims) -> HamiltonianDecomposition:
    total = as_hermitian(total, dims.D)
    h0 = float(np.trace(total).real / dims.D)
    h_S = partial_trace_bath(total, dims) / dims.d_B - h0 * np.eye(dims.d_S)
    h_B = partial_trace_sys(total, dims) / dims.d_S - h0 * np.eye(dims.d_B)
    h_int = (total - h0 * np.eye(dims.D)
             - kron(h_S, np.eye(dims.d_B)) - kron(np.eye(dims.d_S), h_B))
    # kill rounding asymmetry so downstream Hermitian checks are clean
    h_int = 0.5 * (h_int + h_int.conj().T)
    return HamiltonianDecomposition(dims, total, h0, h_S, h_B, h_int)


def project_interaction(h_int, dims: BipartiteDims) -> np.ndarray:
    """Remove identity and local parts, leaving an operator traceless on both factors."""
    return decompose(h_int, dims).h_int


def compose(h_S, h_B, h_int, lam: float, dims: BipartiteDims) -> HamiltonianDecomposition:
    """H = h_S (x) I + I (x) h_B + lam * h_int after projecting each part to its traceless form."""
    h_S = as_hermitian(h_S, dims.d_S)
    h_B = as_hermitian(h_B, dims.d_B)
    h_int = as_hermitian(h_int, dims.D)
    h_S = h_S - np.trace(h_S) / dims.d_S * np.eye(dims.d_S)
    h_B = h_B - np.trace(h_B) / dims.d_B * np.eye(dims.d_B)
    h_int = lam * project_interaction(h_int, dims)
    total = kron(h_S, np.eye(dims.d_B)) + kron(np.eye(dims.d_S), h_B) + h_int
    return HamiltonianDecomposition(dims, total, 0.0, h_S, h_B, h_int)


def coupling_norm(h: HamiltonianDecomposition) -> float:
    return float(operator_norm(h.coupling_operator()))


def random_gue(d: int, seed) -> np.ndarray:
    """GUE matrix rescaled to unit operator norm.

    ``seed`` is an integer or a ``numpy.random.Generator``; a Generator is
    advanced in place, which lets one trial stream feed several draws.
    """
    rng = np.random.default_rng(seed)
    diag = rng.standard_normal(d)
    off = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    h = np.triu(off, 1)
    h = h + h.conj().T + np.diag(diag)
    return h / operator_norm(h)


@dataclass(frozen=True)
class SpectralData:
    """Eigendecomposition of H grouped into (possibly degenerate) levels.

    ``labels[j]`` is the level of eigenvector j; ``energies`` are the
    eigenvalues snapped to their level mean, which is what time evolution
    uses so that dynamics and the dephased average agree exactly.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    level_energies: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def energies(self) -> np.ndarray:
        return self.level_energies[self.labels]

    @property
    def levels(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == k) for k in range(len(self.level_energies))]

    def projector(self, level: int) -> np.ndarray:
        v = self.eigenvectors[:, self.labels == level]
        return v @ v.conj().T

    def projectors(self):
        """Level projectors, generated lazily (D of them is D^3 memory)."""
        for k in range(len(self.level_energies)):
            yield self.projector(k)


def spectral_decomposition(h) -> SpectralData:
    """Full eigendecomposition of a decomposition's total (or of a raw matrix)."""
    mat = h.total if isinstance(h, HamiltonianDecomposition) else as_hermitian(h)
    try:
        evals, evecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver failed on {mat.shape} matrix: {exc}") from exc
    scale = max(1.0, float(np.abs(evals).max(initial=0.0)))
    resid = np.abs(mat @ evecs - evecs * evals).max(initial=0.0)
    if not np.isfinite(resid) or resid > TOL_EIG * scale * max(1, len(evals)):
        raise SpectralError(f"eigen-residual {resid:.3g} exceeds tolerance")
    labels, level_energies = _cluster(evals)
    return SpectralData(evals, evecs, labels, level_energies)


def _cluster(evals):
    """Group ascending eigenvalues whose neighbours are within TOL_DEG * range."""
    span = evals[-1] - evals[0]
    breaks = np.diff(evals) > TOL_DEG * span
    labels = np.concatenate([[0], np.cumsum(breaks)]).astype(int)
    levels = np.bincount(labels, weights=evals) / np.bincount(labels)
    return labels, levels


@dataclass(frozen=True)
class GapReport:
    passed: bool
    num_distinct_levels: int
    min_gap_separation: float
    colliding_pairs: list[tuple[int, int, int, int]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "num_distinct_levels": self.num_distinct_levels,
            "min_gap_separation": self.min_gap_separation,
            "num_collisions": len(self.colliding_pairs),
        }


def check_levels(levels, tol=None) -> GapReport:
    """Gap test on distinct level energies (ascending).

    Collects the positive gaps E_a - E_b, sorts them, and flags neighbours
    closer than ``tol``. ``min_gap_separation`` also counts the zero gap, so it
    is the slowest frequency present in any time-averaged quantity.
    """
    levels = np.asarray(levels, dtype=float)
    L = len(levels)
    if tol is None:
        tol = TOL_GAP * (levels[-1] - levels[0]) if L else 0.0
    if L < 2:
        return GapReport(True, L, float("inf"))
    lo, hi = np.triu_indices(L, 1)
    gaps = levels[hi] - levels[lo]
    order = np.argsort(gaps, kind="stable")
    g = gaps[order]
    sep = np.diff(g)
    min_sep = float(min(g[0], sep.min())) if len(sep) else float(g[0])
    bad = np.flatnonzero(sep <= tol)
    pairs = []
    for i in bad[:MAX_REPORTED_COLLISIONS]:
        a, b = order[i], order[i + 1]
        pairs.append((int(hi[a]), int(lo[a]), int(hi[b]), int(lo[b])))
    return GapReport(len(bad) == 0, L, min_sep, pairs)


def check_nondegenerate_gaps(spec: SpectralData) -> GapReport:
    span = spec.eigenvalues[-1] - spec.eigenvalues[0]
    return check_levels(spec.level_energies, TOL_GAP * span)


def check_spectrum(eigenvalues) -> GapReport:
    """Cluster raw eigenvalues (with multiplicity) and run the gap test."""
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    _, levels = _cluster(ev)
    return check_levels(levels, TOL_GAP * (ev[-1] - ev[0]))
