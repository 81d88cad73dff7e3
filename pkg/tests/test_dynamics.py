import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqspeed.dynamics import (
    basis_coefficients,
    commutator_observables,
    difference_quotient_speed,
    evolution_context,
    evolve,
    fd_speeds,
    nth_derivative,
    sample_trajectory,
    subsystem_derivative,
    subsystem_speed,
    subsystem_state,
)
from eqspeed.equilibrium import dephased_average
from eqspeed.hamiltonian import compose, coupling_norm, decompose, random_gue
from eqspeed.qcore import (
    PAULI_X,
    PAULI_Z,
    BipartiteDims,
    DimensionError,
    InvariantError,
    haar_state,
    hermitian_basis,
    hs_norm,
    kron,
    operator_norm,
    partial_trace_bath,
    projector,
    random_density,
    trace_distance,
)
from helpers import make_context
from oracles import nested_commutator_derivative, ptrace_bath_loops, rk4_evolve

seeds = st.integers(0, 2**32 - 1)
times = st.floats(0, 50)


def _eigenstate_context(seed=3, index=2):
    ctx = make_context(seed, 2, 3)
    return evolution_context(ctx.h, ctx.spec.eigenvectors[:, index])


class TestEvolve:
    def test_time_zero(self, small_ctx):
        np.testing.assert_allclose(evolve(small_ctx, 0.0), small_ctx.psi0, atol=1e-14)

    def test_eigenstate_phase(self):
        ctx = _eigenstate_context()
        E = ctx.spec.energies[2]
        for t in (0.5, 13.0):
            np.testing.assert_allclose(evolve(ctx, t), np.exp(-1j * E * t) * ctx.psi0, atol=1e-12)

    def test_matches_rk4(self, small_ctx):
        psi = evolve(small_ctx, 0.37)
        ref = rk4_evolve(small_ctx.h.total, small_ctx.psi0, 0.37, dt=1e-4)
        np.testing.assert_allclose(psi, ref, atol=1e-10)
        np.testing.assert_allclose(subsystem_state(small_ctx, 0.37),
                                   ptrace_bath_loops(projector(ref), 2, 4), atol=1e-10)

    @given(seeds, st.floats(0, 1e9))
    def test_norm_preserved(self, seed, t):
        ctx = make_context(seed % 100, 2, 3)
        assert np.linalg.norm(evolve(ctx, t)) == pytest.approx(1, abs=1e-12)

    def test_rejects_unnormalized(self, small_ctx):
        with pytest.raises(InvariantError):
            evolution_context(small_ctx.h, 2 * small_ctx.psi0)


class TestSubsystemState:
    def test_product_eigenstate_constant(self):
        dims = BipartiteDims(2, 2)
        h = compose(PAULI_Z, PAULI_Z * 0.37, kron(PAULI_Z, PAULI_Z), 0.2, dims)
        ctx = evolution_context(h, np.array([0, 1, 0, 0], dtype=complex))
        r0 = subsystem_state(ctx, 0)
        for t in (1.0, 7.5):
            np.testing.assert_allclose(subsystem_state(ctx, t), r0, atol=1e-14)

    def test_at_zero(self, small_ctx):
        np.testing.assert_allclose(subsystem_state(small_ctx, 0),
                                   ptrace_bath_loops(projector(small_ctx.psi0), 2, 4), atol=1e-14)


class TestDerivative:
    def test_eigenstate_zero(self):
        ctx = _eigenstate_context()
        np.testing.assert_allclose(subsystem_derivative(ctx, 3.0), 0, atol=1e-14)
        for n in (1, 2, 3):
            np.testing.assert_allclose(nth_derivative(ctx, 3.0, n), 0, atol=1e-13)

    def test_bath_only_hamiltonian(self, rng):
        dims = BipartiteDims(2, 3)
        h = compose(np.zeros((2, 2)), random_gue(3, rng), random_gue(6, rng), 0.0, dims)
        ctx = evolution_context(h, haar_state(6, rng))
        for t in (0.0, 2.0, 40.0):
            np.testing.assert_allclose(subsystem_derivative(ctx, t), 0, atol=1e-14)

    @given(seeds, times)
    def test_matches_nested_commutator(self, seed, t):
        ctx = make_context(seed % 1000, 2, 3, kind="composed", lam=0.7)
        rho = projector(evolve(ctx, t))
        H = ctx.h.total
        for n in (1, 2, 3):
            np.testing.assert_allclose(nth_derivative(ctx, t, n),
                                       nested_commutator_derivative(rho, H, n, 2, 3), atol=1e-12)

    def test_drops_bath_and_constant_parts(self, small_ctx):
        t = 1.7
        rho = projector(evolve(small_ctx, t))
        d = small_ctx.dims
        C = kron(small_ctx.h.h_S, np.eye(d.d_B)) + small_ctx.h.h_int
        via_coupling = partial_trace_bath(1j * (rho @ C - C @ rho), d)
        np.testing.assert_allclose(subsystem_derivative(small_ctx, t), via_coupling, atol=1e-13)

    @given(seeds)
    def test_bath_commutator_vanishes_for_any_state(self, seed):
        r = np.random.default_rng(seed)
        dims = BipartiteDims(2, 4)
        rho = random_density(8, r)
        hb = kron(np.eye(2), random_gue(4, r))
        np.testing.assert_allclose(partial_trace_bath(1j * (rho @ hb - hb @ rho), dims), 0, atol=1e-14)

    def test_central_difference(self, small_ctx):
        t, delta = 2.3, 1e-6
        fd = (subsystem_state(small_ctx, t + delta) - subsystem_state(small_ctx, t - delta)) / (2 * delta)
        err = np.abs(subsystem_derivative(small_ctx, t) - fd).max()
        assert err < 1e-6 * operator_norm(small_ctx.h.total)

    def test_second_derivative_difference(self, small_ctx):
        t, delta = 0.9, 1e-4
        fd2 = (subsystem_state(small_ctx, t + delta) - 2 * subsystem_state(small_ctx, t)
               + subsystem_state(small_ctx, t - delta)) / delta ** 2
        np.testing.assert_allclose(nth_derivative(small_ctx, t, 2), fd2, atol=1e-6)

    def test_traceless_hermitian(self, small_ctx):
        x = subsystem_derivative(small_ctx, 4.0)
        assert abs(np.trace(x)) < 1e-14
        np.testing.assert_allclose(x, x.conj().T, atol=0)

    def test_order_validation(self, small_ctx):
        with pytest.raises(ValueError):
            nth_derivative(small_ctx, 0.0, 0)

    def test_constant_shift_invariance(self, small_ctx):
        shifted = evolution_context(small_ctx.h.shifted(-4.2), small_ctx.psi0)
        for t in (0.1, 30.0):
            np.testing.assert_allclose(projector(evolve(shifted, t)), projector(evolve(small_ctx, t)), atol=1e-10)
            np.testing.assert_allclose(subsystem_derivative(shifted, t), subsystem_derivative(small_ctx, t), atol=1e-10)


class TestCoefficients:
    def test_eigenstate_zero(self):
        ctx = _eigenstate_context()
        np.testing.assert_allclose(basis_coefficients(ctx, 1.0, hermitian_basis(2)), 0, atol=1e-14)

    @given(seeds, times)
    def test_two_routes_and_resum(self, seed, t):
        ctx = make_context(seed % 1000, 3, 2)
        basis = hermitian_basis(3)
        c = basis_coefficients(ctx, t, basis)
        np.testing.assert_allclose(basis.resum(c), subsystem_derivative(ctx, t), atol=1e-13)
        np.testing.assert_allclose(basis_coefficients(ctx, t, basis, route="global"), c, atol=1e-13)
        assert np.sum(c ** 2) == pytest.approx(hs_norm(subsystem_derivative(ctx, t)) ** 2, rel=1e-10, abs=1e-15)

    def test_identity_coefficient_vanishes(self, small_ctx):
        c = basis_coefficients(small_ctx, 0.4, hermitian_basis(2))
        assert abs(c[0]) < 1e-14

    def test_dimension_mismatch(self, small_ctx):
        with pytest.raises(DimensionError):
            basis_coefficients(small_ctx, 0.0, hermitian_basis(3))

    def test_unknown_route(self, small_ctx):
        with pytest.raises(ValueError):
            basis_coefficients(small_ctx, 0.0, hermitian_basis(2), route="sideways")

    @given(seeds)
    def test_commutator_norm_bound(self, seed):
        ctx = make_context(seed % 1000, 2, 3, kind="composed")
        cn = coupling_norm(ctx.h)
        for a in commutator_observables(ctx.h, hermitian_basis(2)):
            assert operator_norm(a) <= 2 * cn * (1 + 1e-12)


class TestSpeed:
    def test_eigenstate(self):
        assert subsystem_speed(_eigenstate_context(), 2.0) == pytest.approx(0, abs=1e-14)

    def test_qubit_sigma_z_rate(self):
        # rho = (I + sigma_y)/2 under H = alpha sigma_x gives d rho/dt = alpha sigma_z
        dims = BipartiteDims(2, 1)
        alpha = 0.3
        h = compose(alpha * PAULI_X, np.zeros((1, 1)), np.zeros((2, 2)), 0.0, dims)
        ctx = evolution_context(h, np.array([1, 1j]) / np.sqrt(2))
        np.testing.assert_allclose(subsystem_derivative(ctx, 0.0), alpha * PAULI_Z, atol=1e-15)
        assert subsystem_speed(ctx, 0.0) == pytest.approx(alpha, rel=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_difference_quotient(self, seed):
        ctx = make_context(seed, 2, 5)
        for t in (0.3, 12.0):
            v = subsystem_speed(ctx, t)
            assert difference_quotient_speed(ctx, t, 1e-5) == pytest.approx(v, rel=1e-3)

    def test_fd_at_huge_times(self, small_ctx):
        ts = np.array([1e9, 3.3e10])
        np.testing.assert_allclose(fd_speeds(small_ctx, ts), [subsystem_speed(small_ctx, t) for t in ts], rtol=1e-6)


class TestTrajectory:
    def test_single_point(self, small_ctx):
        eq = dephased_average(small_ctx)
        tr = sample_trajectory(small_ctx, [0.0], eq.omega_S)
        assert len(tr) == 1
        np.testing.assert_allclose(tr.rho_S[0], subsystem_state(small_ctx, 0.0), atol=1e-15)

    def test_eigenstate(self):
        ctx = _eigenstate_context()
        eq = dephased_average(ctx)
        tr = sample_trajectory(ctx, np.linspace(0, 10, 7), eq.omega_S)
        np.testing.assert_allclose(tr.speeds_analytic, 0, atol=1e-14)
        np.testing.assert_allclose(tr.distances, 0, atol=1e-13)

    def test_fd_agrees_with_analytic(self):
        ctx = make_context(11, 2, 40)
        eq = dephased_average(ctx)
        grid = np.sort(np.random.default_rng(0).uniform(0, 1e4, 300))
        tr = sample_trajectory(ctx, grid, eq.omega_S)
        np.testing.assert_allclose(tr.speeds_fd, tr.speeds_analytic, rtol=1e-3)
        assert np.all(tr.distances >= 0) and np.all(tr.speeds_analytic >= 0)
        np.testing.assert_allclose(tr.distances[5], trace_distance(tr.rho_S[5], eq.omega_S))

    def test_rejects_unsorted_grid(self, small_ctx):
        with pytest.raises(ValueError):
            sample_trajectory(small_ctx, [1.0, 0.5], np.eye(2) / 2)

    def test_empty_grid(self, small_ctx):
        tr = sample_trajectory(small_ctx, np.empty(0), np.eye(2) / 2)
        assert len(tr) == 0
