"""Log-Sobolev checks, existence-time laws and the global continuation ledger."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirichlet_nls.basis import DomainSpec, build_basis
from dirichlet_nls.driver import (
    LOG_FLOOR,
    ContinuationConfig,
    SolverInstability,
    c8_constant,
    calibrate_log_sobolev,
    cap_step_length,
    global_continuation,
    harmonic_log_sum,
    local_time,
    log_sobolev_check,
    log_sobolev_family,
    log_sobolev_params,
    loglog_factor,
    step_length,
)
from dirichlet_nls.flow import scale_to_energy
from dirichlet_nls.spectral import random_band_field


@pytest.fixture(scope="module")
def b6():
    return build_basis(DomainSpec("cube", 6))


class TestLogFactors:
    def test_clamped_below_floor(self):
        fac, clamped = loglog_factor(1.0)
        assert clamped and fac == pytest.approx(2 * math.log(2))

    def test_unclamped(self):
        x = 1e4
        fac, clamped = loglog_factor(x)
        assert not clamped and fac == pytest.approx(math.log(x) * math.log(math.log(x)))

    def test_step_length(self):
        T, clamped = step_length(2.0, LOG_FLOOR, C7=0.5)
        assert T == pytest.approx(0.5 / (2.0 * 2 * math.log(2))) and not clamped

    def test_cap_law_is_geometric(self):
        T, _ = cap_step_length(4, 1.0, 10.0, 1.5)
        assert T == pytest.approx(step_length(1.0, 10.0 * 3.0**3)[0])

    def test_local_time(self):
        assert local_time(2.0, C2=1.0) == pytest.approx(3 / 16)
        assert local_time(0.1, T_max=1.0) == 1.0
        with pytest.raises(ValueError):
            local_time(0.0)

    def test_harmonic_witness(self):
        # sum 1/(n log n) ~ log log N; growth between 10^3 and 10^6 is log 2
        growth = harmonic_log_sum(10**6) - harmonic_log_sum(10**3)
        assert growth == pytest.approx(math.log(2), abs=2e-3)
        assert growth >= 0.5

    @pytest.mark.parametrize("hs0,C3", [(0.5, 1.0), (10.0, 1.0), (1e4, 2.5)])
    def test_c8_bounds_cap_steps(self, hs0, C3):
        c8 = c8_constant(1.0, hs0, C3)
        for n in range(3, 3000, 7):
            assert cap_step_length(n, 1.0, hs0, C3)[0] >= c8 / (n * math.log(n))


@settings(max_examples=40, deadline=None)
@given(h=st.floats(1.0, 1e12), ratio=st.floats(1.0, 1e3), E=st.floats(1e-3, 1e3))
def test_step_length_monotone(h, ratio, E):
    assert step_length(E, h * ratio)[0] <= step_length(E, h)[0]


class TestLogSobolev:
    def test_params(self, b6):
        f = random_band_field(b6, 2, np.random.default_rng(0))
        p = log_sobolev_params(f, 2.0)
        assert p.J >= 1 and p.eta == 1.0 and p.l2 == pytest.approx(1.0)
        with pytest.raises(ValueError):
            log_sobolev_params(f, 1.0)
        with pytest.raises(ValueError):
            log_sobolev_params(b6.zeros(), 2.0)

    def test_calibrated_constants_cover_sample(self, b6):
        fam = log_sobolev_family(b6, 20, seed=1, max_band=2)
        C5, C6 = calibrate_log_sobolev(fam, margin=0.1)
        assert C5 >= 0 and C6 >= 0
        assert max(log_sobolev_check(f, s, C5, C6).ratio for f, s in fam) <= 1 / 1.1 + 1e-9

    def test_family_reproducible(self, b6):
        a = log_sobolev_family(b6, 3, seed=4, max_band=2)
        b = log_sobolev_family(b6, 3, seed=4, max_band=2)
        for (f, s), (g, t) in zip(a, b):
            np.testing.assert_array_equal(f.coeffs, g.coeffs)
            assert s == t


class TestContinuation:
    @pytest.fixture(scope="class")
    @staticmethod
    def ledger(b6):
        phi = scale_to_energy(random_band_field(b6, 1, np.random.default_rng(2)), 1, 1.0)
        return global_continuation(phi, 2.0, 1, 0.05, ContinuationConfig(C7=0.05, dt=1e-3))

    def test_reaches_target(self, ledger):
        assert ledger.cumulative_time >= 0.05 * (1 - 1e-12)
        cum = np.cumsum([r["T_n"] for r in ledger.rows])
        np.testing.assert_allclose(cum, [r["cum_t"] for r in ledger.rows])

    def test_energy_and_mass(self, ledger):
        assert ledger.energy_drift() < 1e-6
        mass = [r["mass"] for r in ledger.rows]
        assert max(mass) - min(mass) < 1e-10

    def test_growth_audit(self, ledger):
        assert ledger.C3 >= 1.0
        assert all(ledger.growth_audit())

    def test_csv_header(self, ledger):
        head = ledger.to_csv().splitlines()[0].split(",")
        assert head[:5] == ["n", "T_n", "cum_t", "mass", "E"]

    def test_unstable_run_keeps_ledger(self, b6):
        phi = random_band_field(b6, 1, np.random.default_rng(2)) * 5
        with pytest.raises(SolverInstability) as info:
            global_continuation(phi, 2.0, 1, 0.01, ContinuationConfig(dt=1e-3, mass_tol=-1.0))
        assert len(info.value.ledger.rows) == 1

    def test_focusing_gate(self, b6):
        phi = b6.mode((1, 1, 1))  # mass 1 > 0.1 * ||phi||_H1^2 = 0.3
        with pytest.raises(ValueError, match="focusing"):
            global_continuation(phi, 2.0, -1, 0.01)

    def test_rejects_low_regularity(self, b6):
        with pytest.raises(ValueError):
            global_continuation(b6.mode((1, 1, 1)), 1.0, 1, 0.01)
