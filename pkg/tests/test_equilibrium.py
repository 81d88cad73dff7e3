import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqspeed.dynamics import basis_coefficients, evolution_context, evolve
from eqspeed.equilibrium import (
    dephased_average,
    effective_dimension,
    empirical_time_average,
    expectations,
    inverse_participation_ratio,
    observable_expectation,
    observable_variance_empirical,
    sample_times,
    squared_deviations,
)
from eqspeed.hamiltonian import check_nondegenerate_gaps, decompose, random_gue
from eqspeed.qcore import (
    PAULI_Z,
    BipartiteDims,
    hermitian_basis,
    kron,
    projector,
    random_density,
    trace_distance,
)
from helpers import make_context

seeds = st.integers(0, 2**32 - 1)
_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class TestEffectiveDimension:
    def test_pure(self, rng):
        psi = rng.standard_normal(5) + 0j
        assert effective_dimension(projector(psi / np.linalg.norm(psi))) == pytest.approx(1)

    @pytest.mark.parametrize("N", [1, 2, 7, 40])
    def test_maximally_mixed(self, N):
        assert effective_dimension(np.eye(N) / N) == pytest.approx(N)

    def test_two_level(self):
        # 1 / (9/16 + 1/16)
        assert effective_dimension(np.diag([0.75, 0.25])) == pytest.approx(1.6)

    @given(seeds, st.floats(1e-3, 0.2))
    def test_mixing_with_identity_increases(self, seed, eps):
        rho = random_density(6, np.random.default_rng(seed), rank=2)
        mixed = (1 - eps) * rho + eps * np.eye(6) / 6
        assert effective_dimension(mixed) >= effective_dimension(rho) - 1e-12


class TestDephasedAverage:
    def test_eigenstate(self):
        ctx = make_context(1, 2, 3)
        ctx = evolution_context(ctx.h, ctx.spec.eigenvectors[:, 4])
        eq = dephased_average(ctx)
        np.testing.assert_allclose(eq.omega, projector(ctx.psi0), atol=1e-14)
        assert eq.d_eff_omega == pytest.approx(1)

    @given(seeds)
    def test_nondegenerate_ipr(self, seed):
        ctx = make_context(seed % 500, 2, 4)
        eq = dephased_average(ctx)
        V, p = ctx.spec.eigenvectors, ctx.populations
        np.testing.assert_allclose(eq.omega, (V * p) @ V.conj().T, atol=1e-14)
        assert eq.d_eff_omega == pytest.approx(1 / np.sum(p ** 2), rel=1e-12)
        assert eq.d_eff_omega == pytest.approx(inverse_participation_ratio(p), rel=1e-12)
        assert eq.d_eff_omega == pytest.approx(effective_dimension(eq.omega), rel=1e-10)

    @pytest.mark.parametrize("N", [1, 3, 8])
    def test_uniform_superposition(self, N):
        ctx = make_context(5, 2, 4)
        psi = ctx.spec.eigenvectors[:, :N].sum(axis=1) / np.sqrt(N)
        eq = dephased_average(evolution_context(ctx.h, psi))
        assert eq.d_eff_omega == pytest.approx(N, rel=1e-12)

    def test_degenerate_levels_keep_coherence(self, rng):
        dims = BipartiteDims(2, 2)
        h = decompose(kron(PAULI_Z, np.eye(2)) + kron(np.eye(2), PAULI_Z), dims)
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        ctx = evolution_context(h, psi / np.linalg.norm(psi))
        eq = dephased_average(ctx)
        rho0 = projector(ctx.psi0)
        expected = sum(P @ rho0 @ P for P in ctx.spec.projectors())
        np.testing.assert_allclose(eq.omega, expected, atol=1e-14)
        # the degenerate middle level keeps the |01>,|10> coherence
        assert abs(eq.omega[1, 2]) > 1e-3

    @given(seeds)
    def test_invariants(self, seed):
        ctx = make_context(seed % 500, 2, 3, kind="composed", lam=0.5)
        eq = dephased_average(ctx)
        assert np.trace(eq.omega) == pytest.approx(1)
        assert np.linalg.eigvalsh(eq.omega)[0] > -1e-12
        H = ctx.h.total
        np.testing.assert_allclose(eq.omega @ H, H @ eq.omega, atol=1e-13)
        assert 1 - 1e-12 <= eq.d_eff_omega <= 6 + 1e-9
        assert 1 - 1e-12 <= eq.d_eff_omega_B <= 3 + 1e-9
        for e in hermitian_basis(2):
            A = kron(e, np.eye(3))
            assert abs(np.trace(1j * (eq.omega @ H - H @ eq.omega) @ A)) < 1e-13


class TestEmpiricalAverage:
    def test_eigenstate(self):
        ctx = make_context(2, 2, 3)
        ctx = evolution_context(ctx.h, ctx.spec.eigenvectors[:, 0])
        avg = empirical_time_average(ctx, 1e3, 50, seed=0)
        np.testing.assert_allclose(avg, projector(ctx.psi0), atol=1e-13)

    def test_tiny_horizon(self, small_ctx):
        avg = empirical_time_average(small_ctx, 1e-12, 20, seed=1)
        np.testing.assert_allclose(avg, projector(small_ctx.psi0), atol=1e-10)

    def test_rejects_bad_horizon(self, small_ctx):
        with pytest.raises(ValueError):
            empirical_time_average(small_ctx, 0.0, 10, seed=0)

    @pytest.mark.parametrize("seed", range(3))
    def test_converges_small_system(self, seed):
        ctx = make_context(seed, 2, 4)
        gap = check_nondegenerate_gaps(ctx.spec)
        n = 2000
        avg = empirical_time_average(ctx, 50 / gap.min_gap_separation, n, seed=seed)
        assert trace_distance(avg, dephased_average(ctx).omega) < 5 / np.sqrt(n)

    def test_distance_shrinks_with_horizon(self):
        ladder = [0.5, 5.0, 500.0]
        means = []
        for T in ladder:
            d = []
            for seed in range(5):
                ctx = make_context(100 + seed, 2, 4)
                omega = dephased_average(ctx).omega
                d.append(trace_distance(empirical_time_average(ctx, T, 4000, seed=seed), omega))
            means.append(np.mean(d))
        assert means[0] > means[1] > means[2]


class TestObservables:
    def test_identity(self, small_ctx):
        for t in (0.0, 3.0, 1e6):
            assert observable_expectation(small_ctx, np.eye(8), t) == pytest.approx(1)

    def test_eigenstate_constant(self, rng):
        ctx = make_context(4, 2, 4)
        ctx = evolution_context(ctx.h, ctx.spec.eigenvectors[:, 3])
        A = random_gue(8, rng)
        vals = expectations(ctx, A, [0.0, 1.0, 77.0])
        np.testing.assert_allclose(vals, vals[0], atol=1e-13)

    def test_sandwich(self, small_ctx, rng):
        A = random_gue(8, rng)
        for t in (0.4, 19.0):
            psi = evolve(small_ctx, t)
            assert observable_expectation(small_ctx, A, t) == pytest.approx((psi.conj() @ A @ psi).real, abs=1e-14)

    def test_variance_trivial_cases(self, small_ctx):
        assert observable_variance_empirical(small_ctx, np.eye(8), 100, 200, seed=0) == pytest.approx(0, abs=1e-25)
        ctx = evolution_context(small_ctx.h, small_ctx.spec.eigenvectors[:, 1])
        A = random_gue(8, 0)
        assert observable_variance_empirical(ctx, A, 100, 200, seed=0) == pytest.approx(0, abs=1e-25)

    def test_variance_within_bound(self):
        ctx = make_context(9, 2, 20)
        eq = dephased_average(ctx)
        A = random_gue(40, 3)
        gap = check_nondegenerate_gaps(ctx.spec)
        times = sample_times(50 / gap.min_gap_separation, 2000, 0)
        sq = squared_deviations(ctx, A, times, eq.omega)
        se = sq.std(ddof=1) / np.sqrt(len(sq))
        assert sq.mean() <= 1 / eq.d_eff_omega + 3 * se


class TestCoefficientAverages:
    def test_time_average_decays_like_one_over_T(self):
        # trapezoid time averages of c_k over [0, T]; the integral of c_k is
        # tr((rho_S(T) - rho_S(0)) e_k), so |<c_k>_T| * T stays bounded
        ctx = make_context(21, 2, 6)
        basis = hermitian_basis(2)
        scaled = []
        for T in (20.0, 80.0, 320.0):
            ts = np.linspace(0, T, int(T * 40) + 1)
            c = np.array([basis_coefficients(ctx, t, basis) for t in ts])
            avg = _trapezoid(c, ts, axis=0) / T
            scaled.append(np.abs(avg) * T)
        C = max(s.max() for s in scaled[:2])
        # bound from the two shortest horizons holds at the longest
        assert np.all(scaled[2] <= max(C, 2.0) + 1e-3)
        assert np.abs(scaled[2] / 320).max() < np.abs(scaled[0] / 20).max()
