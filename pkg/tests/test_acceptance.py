"""Acceptance suite at desk scale (cube N = 64, ball N = 256 radial).

Each test prints exactly one ``[n] PASS|FAIL`` line and fails when its
criterion is not met; the lines are repeated in the terminal summary.
"""

import math

import numpy as np
import pytest

from dirichlet_nls.basis import (
    DomainSpec,
    SpectralField,
    analyze,
    build_basis,
    gradient,
    synthesize,
)
from dirichlet_nls.cli import main
from dirichlet_nls.driver import (
    ContinuationConfig,
    calibrate_log_sobolev,
    global_continuation,
    harmonic_log_sum,
    log_sobolev_check,
    log_sobolev_family,
)
from dirichlet_nls.estimates import band_basis, bilinear_scan, scaling_study, trace_lemma_check
from dirichlet_nls.flow import FlowConfig, SplitStepSolver, conserved, embed, linear_evolve, scale_to_energy
from dirichlet_nls.spectral import lp_decompose, random_band_field, sobolev_norm
from dirichlet_nls.virial import (
    DirectionalWeight,
    first_derivative_check,
    interior_packet,
    second_derivative_terms,
    virial_second_derivative_check,
)

from conftest import ACCEPTANCE

SEED = 20240601
SLOPE = 0.3


def verdict(n, title, ok, detail):
    line = f"[{n}] {'PASS' if ok else 'FAIL'} {title}: {detail}"
    print(line)
    ACCEPTANCE.append(line)
    assert ok, line


def test_1_spectral_core():
    rng = np.random.default_rng(SEED)
    worst = {"parseval": 0.0, "dirichlet": 0.0, "lp": 0.0, "roundtrip": 0.0}
    for kind, N in (("cube", 64), ("ball", 256)):
        b = build_basis(DomainSpec(kind, N))
        for _ in range(100):
            c = rng.standard_normal(b.size) + 1j * rng.standard_normal(b.size)
            c *= (1 + b.eigenvalues) ** -1.0
            f = SpectralField(b, c / np.linalg.norm(c))
            P = synthesize(f)
            worst["parseval"] = max(worst["parseval"], abs(P.norm_sq() - f.mass()))
            dir_form = float(np.sum(b.eigenvalues * np.abs(f.coeffs) ** 2))
            grad = sum(g.norm_sq() for g in gradient(f))
            worst["dirichlet"] = max(worst["dirichlet"], abs(grad - dir_form) / dir_form)
            worst["lp"] = max(worst["lp"], np.linalg.norm(sum(p.coeffs for p in lp_decompose(f)) - f.coeffs))
            worst["roundtrip"] = max(worst["roundtrip"], np.linalg.norm(analyze(P, b).coeffs - f.coeffs))
    tol = {"parseval": 1e-12, "dirichlet": 1e-10, "lp": 1e-12, "roundtrip": 1e-10}
    ok = all(worst[k] <= tol[k] for k in tol)
    detail = ", ".join(f"{k} {worst[k]:.1e}<={tol[k]:.0e}" for k in tol)
    verdict(1, "spectral core on 100 fields per domain", ok, detail)


def test_2_flow():
    rng = np.random.default_rng(SEED + 2)
    b = build_basis(DomainSpec("cube", 16))
    f = random_band_field(b, 2, rng)
    unitarity = max(abs(linear_evolve(f, t).norm() - 1.0) for t in np.linspace(0, 10, 101))
    # eps = 0 split step against the exact propagator
    s0 = SplitStepSolver(b, FlowConfig(eps=0, dt=1e-2))
    free = np.linalg.norm(s0.advance(f, 1000).coeffs - embed(linear_evolve(f, 10.0), s0.basis).coeffs)
    # mass over 10^3 nonlinear steps
    u0 = scale_to_energy(f, 1, 20.0)
    s1 = SplitStepSolver(b, FlowConfig(eps=1, dt=1e-3))
    u = s1.advance(u0, 1000)
    mass = abs(u.mass() - u0.mass()) / u0.mass()
    # Strang order of the energy error
    g0 = scale_to_energy(random_band_field(b, 1, rng), 1, 20.0)
    errs = []
    for n in (20, 40, 80, 160):
        s = SplitStepSolver(b, FlowConfig(eps=1, dt=0.2 / n))
        g = s.prepare(g0)
        errs.append(abs(conserved(s.advance(g, n), 1).energy - conserved(g, 1).energy))
    order = float(np.polyfit(np.log2([20, 40, 80, 160]), np.log2(errs), 1)[0]) * -1
    ok = unitarity <= 1e-12 and free <= 1e-12 and mass <= 1e-10 and abs(order - 2.0) <= 0.3
    detail = f"unitarity {unitarity:.1e}, free-flow {free:.1e}, mass drift {mass:.1e}, energy order {order:.2f}"
    verdict(2, "flow accuracy and conservation", ok, detail)


def test_3_virial():
    first, orders, residuals = [], [], []
    for j, k in ((2, 1), (3, 2), (3, 3)):
        basis = band_basis("cube", j)
        r = np.random.default_rng([SEED, j, k])
        u, v = random_band_field(basis, j, r), random_band_field(basis, k, r)
        for om in np.eye(3):
            w = DirectionalWeight(tuple(om), k)
            first.append(first_derivative_check(u, v, w, t=0.05)["residual"])
            rep = virial_second_derivative_check(u, v, w, [0.05])
            orders += [row["order"] for row in rep.rows]
            residuals += [row["residual"] for row in rep.rows]
    b = build_basis(DomainSpec("cube", 24))
    pu = interior_packet(b, (1.4, 1.6, 1.5), 0.25, (3, 0, 1))
    pv = interior_packet(b, (1.7, 1.5, 1.6), 0.3, (-2, 1, 0))
    bdry = 0.0
    for om in np.eye(3):
        t = second_derivative_terms(pu, pv, DirectionalWeight(tuple(om), 2))
        bdry = max(bdry, (abs(t["boundary_u"]) + abs(t["boundary_v"])) / abs(t["hessian"]))
    ok = max(first) <= 1e-3 and min(orders) >= 1.0 and bdry <= 1e-6
    detail = (f"first-derivative residual {max(first):.1e}, second-derivative order >= {min(orders):.2f} "
              f"(residual {max(residuals):.1e}), interior boundary/main {bdry:.1e}")
    verdict(3, "virial identities, 3 directions x 3 pairs", ok, detail)


def test_4_trace_lemma():
    # band matched to the scale: m = log2(lambda) + 1
    worst = {}
    center = np.full(3, np.pi / 2)
    for lam in (2, 4, 8, 16):
        m = int(math.log2(lam)) + 1
        b = band_basis("cube", m)
        for trial in range(20):
            f = random_band_field(b, m, np.random.default_rng([SEED, 4, m, trial]))
            worst[lam] = max(worst.get(lam, 0.0), trace_lemma_check(f, lam, center)[2])
    spread = max(worst.values()) / min(worst.values())
    detail = f"C = {max(worst.values()):.3g}, max/min across lambda {spread:.2f} <= 4"
    verdict(4, "trace lemma constant", np.isfinite(spread) and spread <= 4.0, detail)


def test_5_l4():
    rep = scaling_study("l4", (2, 5), None, 20, seed=SEED)
    s = rep.summary()
    ok = s["slope_j"] <= SLOPE and np.all(np.isfinite(rep.ratios()))
    verdict(5, "L4 estimate over m in [2, 5]", ok, f"max ratio {s['max_ratio']:.3g}, slope {s['slope_j']:.3f} <= 0.3")


def test_6_bilinear():
    reps = bilinear_scan(("global_time", "semiclassical", "grad_bilinear"), (2, 5), None, 20, seed=SEED)
    s6, s5, s3 = (reps[e].summary() for e in ("global_time", "semiclassical", "grad_bilinear"))
    # semiclassical rows against independently computed global-time rows at T = 2^-j / 2
    ident = 0.0
    for j in range(2, 6):
        T = 2.0**-j / 2
        g = bilinear_scan(("global_time",), (j, j), None, 3, seed=SEED, T=T)["global_time"]
        semi = {(r["j"], r["k"], r["trial"]): r for r in reps["semiclassical"].rows}
        for r in g.rows:
            r5 = semi[(r["j"], r["k"], r["trial"])]["ratio"]
            ident = max(ident, abs(r5 - r["ratio"] * 2.0**j * T) / r5)
    parts = {
        "global_time slope": s6["slope_j"] <= SLOPE,
        "semiclassical/global_time identity": ident <= 1e-12,
        "semiclassical slope": s5["slope_j"] <= SLOPE,
        "grad_bilinear slope": s3["slope_j"] <= SLOPE,
    }
    failed = [k for k, v in parts.items() if not v]
    detail = (f"global_time max {s6['max_ratio']:.3g} slope {s6['slope_j']:.3f}; identity err {ident:.1e}; "
              f"semiclassical max {s5['max_ratio']:.3g} slope {s5['slope_j']:.3f}; "
              f"grad_bilinear max {s3['max_ratio']:.3g} slope {s3['slope_j']:.3f}")
    if failed:
        detail += f"; failing: {', '.join(failed)}"
    verdict(6, "bilinear estimates over j in [2, 5]", not failed, detail)


def test_7_log_sobolev():
    b = band_basis("cube", 4)
    cal = log_sobolev_family(b, 50, SEED)
    hold = log_sobolev_family(b, 100, SEED + 1)
    C5, C6 = calibrate_log_sobolev(cal)
    ratios = [log_sobolev_check(f, s, C5, C6).ratio for f, s in hold]
    hs = [sobolev_norm(f, s) for f, s in hold]
    decades = math.log10(max(hs) / min(hs))
    s_seen = sorted({s for _, s in hold})
    ok = max(ratios) <= 1.0 and decades >= 3.0 and s_seen == [1.5, 2.0, 3.0]
    detail = f"C5 {C5:.3g}, C6 {C6:.3g}, holdout max ratio {max(ratios):.3f}, H^s span {decades:.1f} decades"
    verdict(7, "log-Sobolev inequality on holdout fields", ok, detail)


def test_8_global_continuation():
    b = build_basis(DomainSpec("cube", 9))
    phi = scale_to_energy(random_band_field(b, 2, np.random.default_rng(2)), 1, 1.0)
    led = global_continuation(phi, 3.0, 1, 1.0, ContinuationConfig(C7=0.15, dt=1e-3))
    n = len(led.rows)
    audit = all(led.growth_audit())
    c8 = led.c8()
    series = all(r["T_cap"] >= c8 / (r["n"] * math.log(r["n"])) for r in led.rows if r["n"] >= 3)
    growth = harmonic_log_sum(10**6) - harmonic_log_sum(10**3)
    drift = led.energy_drift()
    ok = led.cumulative_time >= 1.0 and n >= 20 and drift <= 1e-6 and audit and series and growth >= 0.5
    detail = (f"{n} intervals, cumulative time {led.cumulative_time:.3f}, E drift {drift:.1e}, "
              f"C3 {led.C3:.3f}, audit {'ok' if audit else 'violated'}, "
              f"T_cap >= C8/(n log n) {'ok' if series else 'violated'}, witness growth {growth:.3f}")
    verdict(8, "global continuation ledger", ok, detail)


DETERMINISM_RUNS = [
    ("lp-check", ["--N", "8", "--trials", "3"], ["lp_check.csv"]),
    ("simulate", ["--N", "8", "--eps", "1", "--t-final", "0.05", "--set", "record_every=10"], ["trajectory.csv"]),
    ("trace-check", ["--trials", "3", "--set", "trace.lambdas=[2,4]"], ["trace_check.csv"]),
    ("virial-check", ["--set", "virial.pairs=[[2,1]]"], ["virial_first.csv", "virial_second.csv"]),
    ("l4-scan", ["--trials", "2", "--set", "j_range=[2,3]", "--set", "M=9"], ["l4.csv"]),
    ("bilinear-scan", ["--trials", "2", "--set", "j_range=[2,3]", "--set", "M=9"],
     ["global_time.csv", "semiclassical.csv", "grad_bilinear.csv"]),
    ("logsobolev-check", ["--set", "logsobolev.n_calibration=10", "--set", "logsobolev.n_holdout=10"],
     ["logsobolev.csv"]),
    ("global-run", ["--N", "6", "--eps", "1", "--set", "initial.energy=1", "--set", "global_run.target_time=0.05",
                    "--set", "constants.C7=0.05"], ["ledger.csv"]),
]


def test_9_determinism(tmp_path):
    mismatched = []
    for cmd, extra, files in DETERMINISM_RUNS:
        outs = []
        for i, workers in enumerate((1, 1, 2)):
            out = tmp_path / f"{cmd}-{i}"
            main([cmd, "--seed", "5", "--workers", str(workers), "--output", str(out), *extra])
            outs.append([(out / f).read_bytes() for f in files])
        if not outs[0] == outs[1] == outs[2]:
            mismatched.append(cmd)
    detail = f"{len(DETERMINISM_RUNS)} commands x (rerun, 2 workers); mismatched: {mismatched or 'none'}"
    verdict(9, "byte-identical CSV outputs", not mismatched, detail)
