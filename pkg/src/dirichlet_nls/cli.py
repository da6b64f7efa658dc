"""Command-line front end: ``dnls <command> [--config FILE] [overrides]``.

Every command writes its CSV outputs plus ``manifest.json`` (package version,
config sha256, wall time, check outcomes) into the output directory, which is
``--output`` if given, else ``output_dir`` from the config, else
``$DNLS_OUTPUT_ROOT/<command>`` (default root ``./dnls_runs``).

Exit status: 0 when every check passes, 1 when a check fails or the solver
aborts, 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import __version__
from .basis import DomainSpec, SpectralField, build_basis, synthesize
from .driver import (
    ContinuationConfig,
    SolverInstability,
    calibrate_log_sobolev,
    global_continuation,
    harmonic_log_sum,
    log_sobolev_check,
    log_sobolev_family,
)
from .estimates import band_basis, bilinear_scan, scaling_study, trace_lemma_check
from .flow import FlowConfig, evolve, scale_to_energy
from .io import config_hash, save_snapshot, write_csv, write_json
from .spectral import lp_decompose, random_band_field, sobolev_norm
from .virial import (
    DirectionalWeight,
    direction_set,
    first_derivative_check,
    interaction_functional,
    line_projection,
    virial_second_derivative_check,
)


__all__ = ["RunConfig", "main", "build_parser", "COMMANDS"]

ENV_OUTPUT_ROOT = "DNLS_OUTPUT_ROOT"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DomainConfig(_Strict):
    kind: Literal["cube", "ball"] = "cube"
    N: int = Field(16, ge=1)
    q: int = Field(2, ge=2)


class InitialData(_Strict):
    kind: Literal["mode", "band"] = "band"
    index: list[int] = [1, 1, 1]
    band: int = Field(2, ge=0)
    amplitude: float = 1.0
    energy: float | None = None


class Constants(_Strict):
    C0: float = 1.0
    C1: float = 1.0
    C2: float = 1.0
    C3: float | None = None
    C4: float = 1.0
    C5: float = 1.0
    C6: float = 1.0
    C7: float = 1.0
    C8: float | None = None
    C9: float = 1.0


class Tolerances(_Strict):
    lp_reconstruction: float = 1e-12
    mass_drift: float = 1e-6
    energy_drift: float = 1e-6
    virial_first: float = 1e-3
    virial_order: float = 1.0
    slope: float = 0.3
    trace_spread: float = 4.0
    logsobolev_ratio: float = 1.0
    witness_growth: float = 0.5


class VirialOptions(_Strict):
    pairs: list[tuple[int, int]] = [(2, 1), (3, 2), (3, 3)]
    times: list[float] = [0.05]
    levels: int = Field(3, ge=2)
    projections: bool = True


class TraceOptions(_Strict):
    lambdas: list[float] = [2.0, 4.0, 8.0, 16.0]
    center: list[float] | None = None


class LogSobolevOptions(_Strict):
    n_calibration: int = Field(50, ge=2)
    n_holdout: int = Field(100, ge=1)
    s_values: list[float] = [1.5, 2.0, 3.0]
    margin: float = 0.25
    max_band: int = 4


class GlobalRunOptions(_Strict):
    target_time: float = Field(1.0, gt=0)
    step_law: Literal["measured", "cap"] = "measured"
    max_steps: int = Field(10_000, ge=1)


class RunConfig(_Strict):
    """All experiment settings; unknown keys are rejected."""

    domain: DomainConfig = DomainConfig()
    seed: int | None = None
    trials: int = Field(5, ge=1)
    j_range: tuple[int, int] = (2, 4)
    k_range: tuple[int, int] | None = None
    T: float | None = None
    M: int = Field(65, ge=3)
    precision: Literal["single", "double"] = "single"
    estimates: list[Literal["grad_bilinear", "semiclassical", "global_time"]] = [
        "global_time", "semiclassical", "grad_bilinear"]
    eps: Literal[-1, 0, 1] = 0
    dt: float = Field(1e-3, gt=0)
    t_final: float = Field(1.0, gt=0)
    s: float = Field(2.0, gt=1)
    record_every: int = Field(0, ge=0)
    snapshot_every: int = Field(0, ge=0)
    dealias: bool = False
    initial: InitialData = InitialData()
    constants: Constants = Constants()
    tolerances: Tolerances = Tolerances()
    virial: VirialOptions = VirialOptions()
    trace: TraceOptions = TraceOptions()
    logsobolev: LogSobolevOptions = LogSobolevOptions()
    global_run: GlobalRunOptions = GlobalRunOptions()
    workers: int | None = Field(None, ge=1)
    output_dir: str | None = None


class UsageError(Exception):
    pass


# -- helpers ----------------------------------------------------------------

def _rng(cfg: RunConfig, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(cfg.seed), *map(int, key)]))


def _stochastic(command: str, cfg: RunConfig) -> bool:
    if command in ("simulate", "global-run"):
        return cfg.initial.kind == "band"
    return True


def _workers(cfg: RunConfig) -> int:
    if cfg.workers:
        return cfg.workers
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _initial_field(cfg: RunConfig, eps: int) -> SpectralField:
    basis = build_basis(DomainSpec(cfg.domain.kind, cfg.domain.N, cfg.domain.q))
    ini = cfg.initial
    if ini.kind == "mode":
        idx = ini.index[0] if cfg.domain.kind == "ball" else tuple(ini.index)
        f = basis.mode(idx, ini.amplitude)
    else:
        f = random_band_field(basis, ini.band, _rng(cfg, 7)) * ini.amplitude
    if ini.energy is not None:
        f = scale_to_energy(f, eps, ini.energy)
    return f


class _Run:
    """Collects outputs and checks of one command."""

    def __init__(self, command: str, cfg: RunConfig, out_dir: str):
        self.command, self.cfg, self.out_dir = command, cfg, out_dir
        self.outputs: list[str] = []
        self.checks: dict = {}
        self.extra: dict = {}

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def csv(self, name: str, columns, rows):
        self.outputs.append(os.path.basename(write_csv(self.path(name), columns, rows)))

    def text(self, name: str, content: str):
        with open(self.path(name), "w", newline="") as fh:
            fh.write(content)
        self.outputs.append(name)

    def check(self, name: str, value, bound, passed: bool):
        self.checks[name] = {"value": value, "bound": bound, "pass": bool(passed)}

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks.values())


# -- commands ---------------------------------------------------------------

def cmd_simulate(run: _Run):
    cfg = run.cfg
    f0 = _initial_field(cfg, cfg.eps)
    fc = FlowConfig(eps=cfg.eps, dt=cfg.dt, dealias=cfg.dealias, snapshot_every=cfg.snapshot_every)
    traj = evolve(f0, fc, cfg.t_final, cfg.record_every, cfg.s)
    run.csv("trajectory.csv", traj.columns(), traj.rows)
    for i, (t, f) in enumerate(traj.snapshots):
        stem = run.path(f"snapshot_{i:04d}")
        save_snapshot(stem, f, t)
        run.outputs += [os.path.basename(stem) + ".json", os.path.basename(stem) + ".bin"]
    m0, E0 = traj.rows[0]["mass"], traj.rows[0]["E"]
    dm = max(abs(r["mass"] - m0) for r in traj.rows) / m0
    run.check("mass_drift", dm, cfg.tolerances.mass_drift, dm <= cfg.tolerances.mass_drift)
    dE = max(abs(r["E"] - E0) for r in traj.rows) / max(abs(E0), 1e-300)
    run.check("energy_drift", dE, cfg.tolerances.energy_drift, dE <= cfg.tolerances.energy_drift)


def cmd_lp_check(run: _Run):
    cfg = run.cfg
    basis = build_basis(DomainSpec(cfg.domain.kind, cfg.domain.N, cfg.domain.q))
    rows = []
    for trial in range(cfg.trials):
        rng = _rng(cfg, 11, trial)
        c = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
        f = SpectralField(basis, c / np.linalg.norm(c))
        pieces = lp_decompose(f)
        total = sum(p.coeffs for p in pieces)
        res = float(np.linalg.norm(total - f.coeffs) / f.norm())
        orth = float(sum(p.norm() ** 2 for p in pieces) / f.norm() ** 2)
        rows.append({"trial": trial, "bands": len(pieces), "residual": res, "orthogonality": orth})
    run.csv("lp_check.csv", ("trial", "bands", "residual", "orthogonality"), rows)
    worst = max(r["residual"] for r in rows)
    tol = cfg.tolerances.lp_reconstruction
    run.check("reconstruction", worst, tol, worst <= tol)
    orth = [r["orthogonality"] for r in rows]
    ok = 0.5 - 1e-12 <= min(orth) and max(orth) <= 1 + 1e-12
    run.check("almost_orthogonality", [min(orth), max(orth)], [0.5, 1.0], ok)


def cmd_bilinear_scan(run: _Run):
    cfg = run.cfg
    reps = bilinear_scan(cfg.estimates, cfg.j_range, cfg.k_range, cfg.trials, cfg.seed, cfg.T, cfg.M,
                         cfg.domain.kind, None, _workers(cfg), cfg.precision)
    for name, rep in reps.items():
        run.text(f"{name}.csv", rep.to_csv())
        run.text(f"{name}.json", rep.to_json() + "\n")
        sm = rep.summary()
        if sm["slope_j"] is not None:
            run.check(f"{name}_slope_j", sm["slope_j"], cfg.tolerances.slope, sm["slope_j"] <= cfg.tolerances.slope)


def cmd_l4_scan(run: _Run):
    cfg = run.cfg
    rep = scaling_study("l4", cfg.j_range, None, cfg.trials, cfg.seed, cfg.T, cfg.M, cfg.domain.kind,
                        None, _workers(cfg))
    run.text("l4.csv", rep.to_csv())
    run.text("l4.json", rep.to_json() + "\n")
    sm = rep.summary()
    if sm["slope_j"] is not None:
        run.check("l4_slope", sm["slope_j"], cfg.tolerances.slope, sm["slope_j"] <= cfg.tolerances.slope)


def cmd_virial_check(run: _Run):
    cfg = run.cfg
    if cfg.domain.kind != "cube":
        raise UsageError("virial-check runs on the cube")
    first, second, proj = [], [], []
    for j, k in cfg.virial.pairs:
        if k > j:
            raise UsageError(f"pair ({j}, {k}) needs k <= j")
        basis = band_basis("cube", j)
        u = random_band_field(basis, j, _rng(cfg, 21, j, k))
        v = random_band_field(basis, k, _rng(cfg, 22, j, k))
        for om in np.eye(3):
            w = DirectionalWeight(tuple(om), k)
            label = " ".join(f"{x:.6f}" for x in w.omega)
            for t in cfg.virial.times:
                r1 = first_derivative_check(u, v, w, t)
                first.append({"omega": label, "j": j, "k": k, "t": float(t), **r1})
            rep = virial_second_derivative_check(u, v, w, cfg.virial.times, levels=cfg.virial.levels)
            for row in rep.rows:
                second.append({**row, "j": j})
        if cfg.virial.projections:
            dens_u = np.abs(synthesize(u).values) ** 2
            for om in direction_set():
                w = DirectionalWeight(tuple(om), k)
                I = interaction_functional(u, v, w, method="binned")
                lp = line_projection(dens_u, basis, om)
                proj.append({"omega": " ".join(f"{x:.6f}" for x in w.omega), "j": j, "k": k,
                             "I": I, "lower_bound": 2.0 ** (-k - 1) * u.norm() ** 2 * v.norm() ** 2,
                             "projection_mass_error": abs(lp.total() - u.norm() ** 2)})
    run.csv("virial_first.csv", ("omega", "j", "k", "t", "fd", "formula", "residual"), first)
    cols = ("omega", "j", "k", "t", "lhs", "rhs", "residual", "order", "hessian", "boundary_u", "boundary_v")
    run.csv("virial_second.csv", cols, second)
    if proj:
        run.csv("virial_projections.csv",
                ("omega", "j", "k", "I", "lower_bound", "projection_mass_error"), proj)
    tol = cfg.tolerances
    w1 = max(r["residual"] for r in first)
    run.check("first_derivative_residual", w1, tol.virial_first, w1 <= tol.virial_first)
    o2 = min(r["order"] for r in second)
    run.check("second_derivative_order", o2, tol.virial_order, o2 >= tol.virial_order)
    if proj:
        ok = all(r["I"] >= r["lower_bound"] * (1 - 1e-12) for r in proj)
        run.check("functional_lower_bound", ok, True, ok)


def cmd_trace_check(run: _Run):
    cfg = run.cfg
    center = cfg.trace.center or [math.pi / 2] * 3
    rows, worst = [], {}
    for lam in cfg.trace.lambdas:
        m = int(round(math.log2(lam))) + 1
        basis = band_basis("cube", m)
        for trial in range(cfg.trials):
            f = random_band_field(basis, m, _rng(cfg, 31, m, trial))
            lhs, rhs, ratio = trace_lemma_check(f, lam, center)
            rows.append({"lambda": float(lam), "m": m, "trial": trial, "lhs": lhs, "rhs": rhs, "ratio": ratio})
            worst[lam] = max(worst.get(lam, 0.0), ratio)
    run.csv("trace_check.csv", ("lambda", "m", "trial", "lhs", "rhs", "ratio"), rows)
    spread = max(worst.values()) / min(worst.values())
    run.extra["constant"] = max(worst.values())
    run.check("constant_spread", spread, cfg.tolerances.trace_spread, spread <= cfg.tolerances.trace_spread)


def cmd_logsobolev_check(run: _Run):
    cfg = run.cfg
    opt = cfg.logsobolev
    basis = band_basis(cfg.domain.kind, opt.max_band)
    cal = log_sobolev_family(basis, opt.n_calibration, cfg.seed, opt.s_values, opt.max_band)
    hold = log_sobolev_family(basis, opt.n_holdout, cfg.seed + 1, opt.s_values, opt.max_band)
    C5, C6 = calibrate_log_sobolev(cal, opt.margin)
    rows = []
    for name, fam in (("calibration", cal), ("holdout", hold)):
        for i, (f, s) in enumerate(fam):
            r = log_sobolev_check(f, s, C5, C6)
            rows.append({"set": name, "index": i, "s": s, "Hs": sobolev_norm(f, s), "lhs": r.lhs,
                         "rhs": r.rhs, "ratio": r.ratio, "J": r.J_used, "clamped": r.clamped})
    run.csv("logsobolev.csv", ("set", "index", "s", "Hs", "lhs", "rhs", "ratio", "J", "clamped"), rows)
    run.extra.update({"C5": C5, "C6": C6})
    held = [r for r in rows if r["set"] == "holdout"]
    worst = max(r["ratio"] for r in held)
    run.check("holdout_ratio", worst, cfg.tolerances.logsobolev_ratio, worst <= cfg.tolerances.logsobolev_ratio)
    decades = math.log10(max(r["Hs"] for r in held) / min(r["Hs"] for r in held))
    run.extra["Hs_decades"] = decades


def cmd_global_run(run: _Run):
    cfg = run.cfg
    f0 = _initial_field(cfg, cfg.eps)
    c = cfg.constants
    gc = ContinuationConfig(C2=c.C2, C3=c.C3, C7=c.C7, dt=cfg.dt, max_steps=cfg.global_run.max_steps,
                            mass_tol=cfg.tolerances.mass_drift, step_law=cfg.global_run.step_law,
                            dealias=cfg.dealias)
    try:
        ledger = global_continuation(f0, cfg.s, cfg.eps, cfg.global_run.target_time, gc)
    except SolverInstability as exc:
        run.text("ledger.csv", exc.ledger.to_csv())
        run.check("solver_stable", str(exc), None, False)
        return
    run.text("ledger.csv", ledger.to_csv())
    run.extra["ledger"] = ledger.manifest()
    tol = cfg.tolerances
    run.check("target_reached", ledger.cumulative_time, cfg.global_run.target_time,
              ledger.cumulative_time >= cfg.global_run.target_time * (1 - 1e-12))
    if cfg.eps == 1 or cfg.eps == 0:
        d = ledger.energy_drift()
        run.check("energy_drift", d, tol.energy_drift, d <= tol.energy_drift)
    audit = ledger.growth_audit()
    run.check("growth_audit", sum(audit), len(audit), all(audit))
    C8 = ledger.c8() if c.C8 is None else c.C8
    ok = all(r["T_cap"] >= C8 / (r["n"] * math.log(r["n"])) for r in ledger.rows if r["n"] >= 3)
    run.check("step_lower_bound", C8, "T_cap(n) >= C8/(n log n), n >= 3", ok)
    growth = harmonic_log_sum(10**6) - harmonic_log_sum(10**3)
    run.check("divergence_witness", growth, tol.witness_growth, growth >= tol.witness_growth)


COMMANDS = {
    "simulate": cmd_simulate,
    "lp-check": cmd_lp_check,
    "bilinear-scan": cmd_bilinear_scan,
    "virial-check": cmd_virial_check,
    "trace-check": cmd_trace_check,
    "l4-scan": cmd_l4_scan,
    "logsobolev-check": cmd_logsobolev_check,
    "global-run": cmd_global_run,
}


# -- config assembly --------------------------------------------------------

def _set_path(d: dict, dotted: str, value):
    keys = dotted.split(".")
    for k in keys[:-1]:
        d = d.setdefault(k, {})
        if not isinstance(d, dict):
            raise UsageError(f"cannot set {dotted!r}")
    d[keys[-1]] = value


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(args) -> RunConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        _set_path(data, key.strip(), _parse_value(val))
    flag_map = {"seed": "seed", "trials": "trials", "workers": "workers", "output": "output_dir",
                "N": "domain.N", "kind": "domain.kind", "eps": "eps", "dt": "dt", "t_final": "t_final"}
    for attr, path in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            _set_path(data, path, v)
    return RunConfig.model_validate(data)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dnls", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config field (dotted path, JSON value)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--output", help="output directory")
        sp.add_argument("--N", type=int, help="per-axis mode limit")
        sp.add_argument("--kind", choices=("cube", "ball"))
        sp.add_argument("--eps", type=int, choices=(-1, 0, 1))
        sp.add_argument("--dt", type=float)
        sp.add_argument("--t-final", dest="t_final", type=float)
    return p


def _out_dir(command: str, cfg: RunConfig) -> str:
    if cfg.output_dir:
        return cfg.output_dir
    return os.path.join(os.environ.get(ENV_OUTPUT_ROOT, "dnls_runs"), command)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
    except (ValidationError, UsageError, OSError, json.JSONDecodeError) as exc:
        parser.error(f"invalid configuration: {exc}")
    if cfg.seed is None and _stochastic(args.command, cfg):
        parser.error(f"{args.command} is stochastic and needs a seed (--seed or 'seed' in the config)")
    out = _out_dir(args.command, cfg)
    os.makedirs(out, exist_ok=True)
    run = _Run(args.command, cfg, out)
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](run)
    except UsageError as exc:
        parser.error(str(exc))
    dump = cfg.model_dump(mode="json")
    manifest = {
        "command": args.command,
        "version": __version__,
        "config_sha256": config_hash(dump),
        "config": dump,
        "wall_time_s": time.perf_counter() - t0,
        "outputs": sorted(run.outputs),
        "checks": run.checks,
        "passed": run.passed,
        **run.extra,
    }
    write_json(os.path.join(out, "manifest.json"), manifest)
    for name, c in run.checks.items():
        print(f"{'PASS' if c['pass'] else 'FAIL'} {name}: {c['value']} (bound {c['bound']})")
    print(f"outputs in {out}")
    return 0 if run.passed else 1


if __name__ == "__main__":
    sys.exit(main())
