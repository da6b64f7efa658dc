"""Linear propagator, split-step solver, conserved quantities and time quadrature."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirichlet_nls.basis import DomainSpec, build_basis
from dirichlet_nls.flow import (
    FlowConfig,
    SplitStepSolver,
    conserved,
    embed,
    evolve,
    linear_evolve,
    nls_step,
    restrict,
    scale_to_energy,
    simpson_weights,
)
from dirichlet_nls.spectral import random_band_field

from conftest import random_field


@pytest.fixture(scope="module")
def small():
    return build_basis(DomainSpec("cube", 6))


class TestLinear:
    def test_unitary(self, cube, rng):
        f = random_field(cube, rng)
        for t in np.linspace(0, 10, 11):
            assert linear_evolve(f, t).norm() == pytest.approx(1.0, abs=1e-12)

    def test_group_law(self, cube, rng):
        f = random_field(cube, rng)
        a = linear_evolve(linear_evolve(f, 0.3), 0.45)
        np.testing.assert_allclose(a.coeffs, linear_evolve(f, 0.75).coeffs, atol=1e-13)

    def test_single_mode_phase(self, cube):
        f = linear_evolve(cube.mode((1, 1, 2)), 0.5)
        assert f.coeffs[cube.mode_position((1, 1, 2))] == pytest.approx(np.exp(-3j))


class TestSplitStep:
    def test_free_step_is_exact(self, small, rng):
        f = random_field(small, rng)
        np.testing.assert_allclose(nls_step(f, 0.01, 0).coeffs, linear_evolve(f, 0.01).coeffs, atol=1e-12)
        solver = SplitStepSolver(small, FlowConfig(eps=0, dt=0.01))
        g = solver.advance(f, 100)
        ref = embed(linear_evolve(f, 1.0), solver.basis)
        np.testing.assert_allclose(g.coeffs, ref.coeffs, atol=1e-12)

    @pytest.mark.parametrize("eps", [1, -1])
    def test_mass_conserved(self, small, rng, eps):
        f = random_band_field(small, 2, rng) * 2.0
        solver = SplitStepSolver(small, FlowConfig(eps=eps, dt=1e-3))
        g = solver.advance(f, 1000)
        assert abs(g.mass() - f.mass()) / f.mass() < 1e-10

    def test_fused_steps_match_single_steps(self, small, rng):
        f = random_band_field(small, 1, rng) * 3.0
        solver = SplitStepSolver(small, FlowConfig(eps=1, dt=1e-2))
        g = solver.prepare(f)
        for _ in range(5):
            g = nls_step(g, 1e-2, 1)
        np.testing.assert_allclose(solver.advance(f, 5).coeffs, g.coeffs, atol=1e-12)

    def test_energy_error_second_order(self, small, rng):
        f = random_band_field(small, 1, rng) * 3.0
        T = 0.2
        errs = []
        for n in (10, 20, 40):
            solver = SplitStepSolver(small, FlowConfig(eps=1, dt=T / n))
            u0 = solver.prepare(f)
            errs.append(abs(conserved(solver.advance(u0, n), 1).energy - conserved(u0, 1).energy))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        np.testing.assert_allclose(orders, 2.0, atol=0.3)

    def test_dealiased_basis_kept(self, small, rng):
        f = random_band_field(small, 1, rng)
        solver = SplitStepSolver(small, FlowConfig(eps=1, dt=1e-3, dealias=True))
        assert solver.advance(f, 3).basis is small


class TestConserved:
    def test_linear_energy_is_dirichlet_form(self, cube):
        cs = conserved(cube.mode((1, 2, 2), 2.0), 0)
        assert cs.energy == pytest.approx(4 * 9) and cs.quartic == 0.0

    def test_quartic_of_constant_product_mode(self):
        # int (8/pi^3)^2 sin^4 sin^4 sin^4 = (8/pi^3)^2 (3 pi / 8)^3
        b = build_basis(DomainSpec("cube", 2))
        cs = conserved(b.mode((1, 1, 1)), 1)
        assert cs.quartic == pytest.approx((8 / np.pi**3) ** 2 * (3 * np.pi / 8) ** 3, rel=1e-12)

    @pytest.mark.parametrize("eps", [1, 0, -1])
    def test_scale_to_energy(self, small, rng, eps):
        f = random_band_field(small, 1, rng)
        g = scale_to_energy(f, eps, 1.0)
        assert conserved(g, eps).energy == pytest.approx(1.0, rel=1e-12)

    def test_unreachable_focusing_energy(self, small):
        f = small.mode((1, 1, 1))
        with pytest.raises(ValueError, match="focusing"):
            scale_to_energy(f, -1, 1e6)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"eps": 2}, {"dt": 0.0}, {"dt": -1e-3}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            FlowConfig(**kw)


class TestQuadrature:
    def test_simpson_exact_on_cubics(self):
        t, w = simpson_weights(2.0, 9)
        assert np.sum(w * (t**3 - t + 1)) == pytest.approx(2.0**4 / 4 - 2.0 + 2.0)

    @pytest.mark.parametrize("M", [2, 4, 1])
    def test_simpson_rejects_even(self, M):
        with pytest.raises(ValueError):
            simpson_weights(1.0, M)


def test_embed_restrict_roundtrip(small, rng):
    f = random_field(small, rng)
    big = small.collocation()
    np.testing.assert_array_equal(restrict(embed(f, big), small).coeffs, f.coeffs)


def test_evolve_records(small, rng):
    f = random_band_field(small, 1, rng)
    traj = evolve(f, FlowConfig(eps=1, dt=1e-3, snapshot_every=50), 0.1, record_every=25)
    assert [r["t"] for r in traj.rows] == pytest.approx([0, 0.025, 0.05, 0.075, 0.1])
    assert len(traj.snapshots) == 3
    mass = [r["mass"] for r in traj.rows]
    assert max(mass) - min(mass) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(-5, 5))
def test_linear_flow_preserves_sobolev_norms(seed, t):
    basis = build_basis(DomainSpec("cube", 4))
    f = random_field(basis, np.random.default_rng(seed))
    a, b = conserved(f, 0), conserved(linear_evolve(f, t), 0)
    assert b.kinetic == pytest.approx(a.kinetic, rel=1e-12)
