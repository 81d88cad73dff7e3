"""Structural invariant checks, runnable without pytest (``eqspeed selftest``).

Each check draws its own random inputs from a seeded generator and raises
AssertionError with a short diagnostic on failure.
"""
from __future__ import annotations

import numpy as np

from .dynamics import (
    basis_coefficients,
    commutator_observables,
    evolution_context,
    evolve,
    nth_derivative,
    subsystem_derivative,
    subsystem_state,
)
from .equilibrium import dephased_average, effective_dimension
from .hamiltonian import (
    check_nondegenerate_gaps,
    check_spectrum,
    compose,
    coupling_norm,
    decompose,
    random_gue,
    spectral_decomposition,
)
from .qcore import (
    BipartiteDims,
    haar_state,
    hermitian_basis,
    hs_norm,
    kron,
    numerical_rank,
    operator_norm,
    partial_trace_bath,
    partial_trace_sys,
    projector,
    random_density,
    trace_distance,
    trace_norm,
)

CHECKS = []


def check(fn):
    CHECKS.append(fn)
    return fn


def _close(a, b, tol, what):
    err = float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))
    assert err <= tol, f"{what}: deviation {err:.3g} > {tol:.3g}"


def _random_decomposition(rng, d_S=2, d_B=3, lam=1.0):
    dims = BipartiteDims(d_S, d_B)
    return compose(random_gue(d_S, rng), random_gue(d_B, rng), random_gue(dims.D, rng), lam, dims)


@check
def partial_trace_preserves_trace(rng):
    for d_S, d_B in [(2, 3), (3, 4), (4, 2)]:
        dims = BipartiteDims(d_S, d_B)
        rho = random_density(dims.D, rng)
        _close(np.trace(partial_trace_bath(rho, dims)), 1, 1e-12, "tr(tr_B rho)")
        _close(np.trace(partial_trace_sys(rho, dims)), 1, 1e-12, "tr(tr_S rho)")


@check
def trace_distance_is_a_metric(rng):
    for _ in range(20):
        a, b, c = (random_density(4, rng, rank=rng.integers(1, 5)) for _ in range(3))
        dab, dba = trace_distance(a, b), trace_distance(b, a)
        _close(dab, dba, 1e-12, "symmetry")
        assert -1e-12 <= dab <= 1 + 1e-12, f"D out of [0,1]: {dab}"
        assert dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12, "triangle inequality"


@check
def norm_chain(rng):
    for d in (2, 5, 9):
        x = random_gue(d, rng) * rng.uniform(0.1, 10)
        op, hs, tr = operator_norm(x), hs_norm(x), trace_norm(x)
        assert op <= hs + 1e-12 and hs <= tr + 1e-12, f"norm chain broken: {op}, {hs}, {tr}"


@check
def rank_inequality(rng):
    for d, r in [(6, 1), (6, 2), (8, 3), (8, 8)]:
        g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
        signs = np.diag(rng.choice([-1.0, 1.0], r))
        x = g @ signs @ g.conj().T
        rank = numerical_rank(x)
        assert rank == r, f"numerical rank {rank}, built rank {r}"
        assert trace_norm(x) ** 2 <= rank * hs_norm(x) ** 2 * (1 + 1e-12), "||x||_1^2 <= rank ||x||_2^2"
    # the subsystem-capped variant used for d rho_S/dt
    ctx = _random_context(rng, 2, 5)
    xd = subsystem_derivative(ctx, 0.7)
    assert trace_norm(xd) ** 2 <= ctx.dims.d_S * hs_norm(xd) ** 2 * (1 + 1e-12), "d_S-capped rank bound"


@check
def basis_orthonormal_and_complete(rng):
    for d in (1, 2, 3, 4, 5):
        basis = hermitian_basis(d)
        assert len(basis) == d * d
        _close(basis.gram(), np.eye(d * d), 1e-10, f"Gram matrix d={d}")
        for e in basis:
            _close(e, e.conj().T, 0, "basis element Hermitian")
        m = random_gue(d, rng)
        _close(basis.resum(basis.expand(m)), m, 1e-10 * d * d, f"reconstruction d={d}")


@check
def decomposition_round_trip(rng):
    for d_S, d_B in [(2, 2), (2, 5), (3, 4)]:
        h = _random_decomposition(rng, d_S, d_B, lam=rng.uniform(0.2, 2))
        again = decompose(h.total, h.dims)
        _close(again.h0_coeff, h.h0_coeff, 1e-12, "h0")
        _close(again.h_S, h.h_S, 1e-12, "h_S")
        _close(again.h_B, h.h_B, 1e-12, "h_B")
        _close(again.h_int, h.h_int, 1e-12, "h_int")


@check
def decomposition_parts_orthogonal(rng):
    dims = BipartiteDims(3, 4)
    h = decompose(random_gue(dims.D, rng) + 0.3 * np.eye(dims.D), dims)
    parts = list(h.parts().values())
    for i in range(4):
        for j in range(i + 1, 4):
            _close(np.trace(parts[i] @ parts[j]), 0, 1e-12, f"tr(part_{i} part_{j})")


@check
def decomposition_traceless(rng):
    dims = BipartiteDims(2, 6)
    h = decompose(random_gue(dims.D, rng), dims)
    _close(np.trace(h.h_S), 0, 1e-12, "tr h_S")
    _close(np.trace(h.h_B), 0, 1e-12, "tr h_B")
    _close(partial_trace_bath(h.h_int, dims), 0, 1e-12, "tr_B h_int")
    _close(partial_trace_sys(h.h_int, dims), 0, 1e-12, "tr_S h_int")


@check
def decomposition_scales_linearly(rng):
    dims = BipartiteDims(2, 3)
    H = random_gue(dims.D, rng)
    a, b = decompose(H, dims), decompose(2.5 * H, dims)
    for x, y in [(a.h_S, b.h_S), (a.h_B, b.h_B), (a.h_int, b.h_int)]:
        _close(2.5 * x, y, 1e-12, "scaled part")


@check
def gap_checker_canonical_spectra(rng):
    assert check_spectrum([0, 1, 3, 7]).passed, "{0,1,3,7} must pass"
    assert not check_spectrum([0, 1, 2]).passed, "{0,1,2} must fail"
    assert not check_spectrum([-2, 0, 0, 2]).passed, "{-2,0,0,2} must fail"
    spec = spectral_decomposition(kron(np.diag([1, -1]), np.eye(2)) + kron(np.eye(2), np.diag([1, -1])))
    assert len(spec.level_energies) == 3 and not check_nondegenerate_gaps(spec).passed


@check
def gue_spectra_pass_gap_test(rng):
    passed = sum(check_nondegenerate_gaps(spectral_decomposition(random_gue(64, rng))).passed
                 for _ in range(100))
    assert passed >= 99, f"only {passed}/100 GUE spectra passed"


def _random_context(rng, d_S, d_B, lam=1.0):
    h = _random_decomposition(rng, d_S, d_B, lam)
    return evolution_context(h, haar_state(h.dims.D, rng))


@check
def bath_hamiltonian_drops_out(rng):
    dims = BipartiteDims(3, 4)
    rho = random_density(dims.D, rng)
    hb = kron(np.eye(dims.d_S), random_gue(dims.d_B, rng))
    _close(partial_trace_bath(1j * (rho @ hb - hb @ rho), dims), 0, 1e-12, "tr_B(i[rho, I x H_B])")


@check
def constant_energy_drops_out(rng):
    ctx = _random_context(rng, 2, 4)
    shifted = evolution_context(ctx.h.shifted(3.7), ctx.psi0)
    for t in (0.3, 4.1, 250.0):
        _close(projector(evolve(ctx, t)), projector(evolve(shifted, t)), 1e-9, "rho(t) under H + cI")
        _close(subsystem_derivative(ctx, t), subsystem_derivative(shifted, t), 1e-9, "d rho_S/dt under H + cI")
        _close(nth_derivative(ctx, t, 2), nth_derivative(shifted, t, 2), 1e-9, "second derivative under H + cI")


@check
def norm_preserved(rng):
    ctx = _random_context(rng, 2, 5)
    for t in (0.0, 1.3, 1e4, 1e9):
        _close(np.linalg.norm(evolve(ctx, t)), 1, 1e-12, f"|psi({t})|")


@check
def commutator_norm_bound(rng):
    h = _random_decomposition(rng, 3, 3)
    cn = coupling_norm(h)
    for a in commutator_observables(h, hermitian_basis(3)):
        assert operator_norm(a) <= 2 * cn * (1 + 1e-12), "||i[H_S+H_int, e_k x I]|| <= 2||H_S+H_int||"


@check
def coefficients_square_sum(rng):
    ctx = _random_context(rng, 3, 3)
    basis = hermitian_basis(3)
    for t in (0.2, 5.0):
        c = basis_coefficients(ctx, t, basis)
        _close(np.sum(c ** 2), hs_norm(subsystem_derivative(ctx, t)) ** 2, 1e-12, "sum c_k^2 = ||d rho_S/dt||_2^2")
        _close(c, basis_coefficients(ctx, t, basis, route="global"), 1e-12, "two routes to c_k")


@check
def equilibrium_structure(rng):
    ctx = _random_context(rng, 2, 4)
    eq = dephased_average(ctx)
    rho0 = projector(ctx.psi0)
    _close(np.trace(eq.omega), 1, 1e-12, "tr omega")
    assert np.linalg.eigvalsh(eq.omega)[0] >= -1e-12, "omega PSD"
    for P in ctx.spec.projectors():
        _close(P @ eq.omega @ P, P @ rho0 @ P, 1e-12, "diagonal blocks match rho(0)")
        _close(P @ eq.omega - eq.omega @ P, 0, 1e-12, "omega commutes with level projectors")
    H = ctx.h.total
    for ek in hermitian_basis(2):
        A = kron(ek, np.eye(4))
        _close(np.trace(1j * (eq.omega @ H - H @ eq.omega) @ A), 0, 1e-12, "tr(i[omega,H] e_k x I)")
    assert 1 - 1e-12 <= eq.d_eff_omega <= ctx.dims.D + 1e-9
    assert 1 - 1e-12 <= eq.d_eff_omega_B <= ctx.dims.d_B + 1e-9


@check
def mixing_raises_effective_dimension(rng):
    for _ in range(10):
        rho = random_density(6, rng, rank=2)
        mixed = 0.95 * rho + 0.05 * np.eye(6) / 6
        assert effective_dimension(mixed) >= effective_dimension(rho) - 1e-12


def run_selftest(seed: int = 0, verbose: bool = True) -> list[tuple[str, bool, str]]:
    results = []
    for i, fn in enumerate(CHECKS):
        rng = np.random.default_rng(seed + i)
        try:
            fn(rng)
            results.append((fn.__name__, True, ""))
        except AssertionError as exc:
            results.append((fn.__name__, False, str(exc)))
        if verbose:
            name, ok, msg = results[-1]
            print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({msg})" if msg else ""))
    return results
