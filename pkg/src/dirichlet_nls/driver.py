"""Well-posedness driver: logarithmic Sobolev check, local existence times and
the iterated global continuation with its norm-growth audit.

Constants C2, C3, C5, C6, C7 are configuration values (default 1); the checks
concern scalings and boundedness, never absolute values.  Arguments of the
double logarithm are clamped below at e^2, and every clamp is flagged.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .basis import SpectralField
from .flow import FlowConfig, SplitStepSolver, conserved
from .spectral import dyadic_band, log_besov_norm, sobolev_norm

__all__ = [
    "LOG_FLOOR",
    "LogSobolevParams",
    "LogSobolevResult",
    "log_sobolev_params",
    "log_sobolev_check",
    "calibrate_log_sobolev",
    "multiband_field",
    "log_sobolev_family",
    "local_time",
    "loglog_factor",
    "step_length",
    "cap_step_length",
    "c8_constant",
    "harmonic_log_sum",
    "ContinuationConfig",
    "ContinuationLedger",
    "SolverInstability",
    "global_continuation",
]

LOG_FLOOR = math.e**2


# -- logarithmic Sobolev inequality ----------------------------------------

@dataclass(frozen=True)
class LogSobolevParams:
    s: float
    eta: float
    J: int
    l2: float
    h1: float
    hs: float
    b11l: float


@dataclass(frozen=True)
class LogSobolevResult:
    lhs: float
    rhs: float
    ratio: float
    J_used: int
    clamped: bool


def loglog_factor(x: float) -> tuple[float, bool]:
    """(log X * log log X, clamped) with X = max(x, e^2)."""
    clamped = not x >= LOG_FLOOR
    X = LOG_FLOOR if clamped else x
    L = math.log(X)
    return L * math.log(L), clamped


def log_sobolev_params(f: SpectralField, s: float) -> LogSobolevParams:
    if not s > 1:
        raise ValueError("s must exceed 1")
    l2 = f.norm()
    if l2 == 0:
        raise ValueError("the zero field is degenerate")
    h1, hs = sobolev_norm(f, 1.0), sobolev_norm(f, s)
    eta = s - 1.0
    arg = eta * hs / (2.0 * h1)
    J = 2.0 / eta * math.log(arg) if arg > 0 else 1.0
    return LogSobolevParams(s, eta, max(1, int(round(J))), l2, h1, hs, log_besov_norm(f, 1.0, 1))


def log_sobolev_check(f: SpectralField, s: float, C5: float = 1.0, C6: float = 1.0) -> LogSobolevResult:
    """||f||_{B^{1,1}_{2,l}} against ||f||_{H^1} (C5 + C6 (log ||f||_{H^s} log log ||f||_{H^s})^{1/2})."""
    p = log_sobolev_params(f, s)
    fac, clamped = loglog_factor(p.hs)
    rhs = p.h1 * (C5 + C6 * math.sqrt(fac))
    return LogSobolevResult(p.b11l, rhs, p.b11l / rhs, p.J, clamped)


def calibrate_log_sobolev(fields, margin: float = 0.25) -> tuple[float, float]:
    """Smallest-on-average (C5, C6) >= 0 with C5 + C6 x_i >= (1 + margin) y_i.

    Here y_i = ||f_i||_B / ||f_i||_{H^1} and x_i = (log log-factor)^{1/2}; the
    linear program minimizes the mean right-hand side over the sample.
    ``fields`` holds (field, s) pairs.
    """
    xs, ys = [], []
    for f, s in fields:
        p = log_sobolev_params(f, s)
        xs.append(math.sqrt(loglog_factor(p.hs)[0]))
        ys.append(p.b11l / p.h1)
    x, y = np.array(xs), (1.0 + margin) * np.array(ys)
    res = linprog(
        c=[1.0, float(np.mean(x))],
        A_ub=-np.column_stack([np.ones_like(x), x]),
        b_ub=-y,
        bounds=[(0, None), (0, None)],
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"calibration failed: {res.message}")
    return float(res.x[0]), float(res.x[1])


def multiband_field(basis, bands, weights, rng: np.random.Generator) -> SpectralField:
    """Sum of unit random band fields with the given per-band L2 weights."""
    c = np.zeros(basis.size, dtype=complex)
    for j, w in zip(bands, weights):
        m = dyadic_band(basis, j).members
        z = rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size)
        c[m] += w * z / np.linalg.norm(z)
    return SpectralField(basis, c)


def log_sobolev_family(basis, n: int, seed: int, s_values=(1.5, 2.0, 3.0),
                       max_band: int = 4, amplitude=(0.1, 30.0)):
    """``n`` (field, s) pairs: random band subsets, log-uniform band weights and
    amplitudes; s cycles through ``s_values``."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 44]))
    out = []
    lo, hi = np.log(amplitude[0]), np.log(amplitude[1])
    for i in range(n):
        k = int(rng.integers(1, 4))
        bands = np.sort(rng.choice(max_band + 1, size=k, replace=False))
        weights = np.exp(rng.uniform(-2.0, 2.0, size=k))
        f = multiband_field(basis, bands, weights, rng)
        f = f * (float(np.exp(rng.uniform(lo, hi))) / f.norm())
        out.append((f, float(s_values[i % len(s_values)])))
    return out


# -- existence times --------------------------------------------------------

def local_time(norm_B: float, C2: float = 1.0, T_max: float | None = None) -> float:
    """Midpoint 3 C2 / (4 ||u||_B^2) of the bracket [C2/(2||u||^2), C2/||u||^2)."""
    if not norm_B > 0:
        raise ValueError("the norm must be positive")
    T = 0.75 * C2 / norm_B**2
    return min(T, T_max) if T_max is not None else T


def step_length(energy: float, hs: float, C7: float = 1.0) -> tuple[float, bool]:
    """C7 / (E log X log log X) with X = max(||u||_{H^s}, e^2); returns (T, clamped)."""
    if not energy > 0:
        raise ValueError("the energy scale must be positive")
    fac, clamped = loglog_factor(hs)
    return C7 / (energy * fac), clamped


def cap_step_length(n: int, energy: float, hs0: float, C3: float, C7: float = 1.0) -> tuple[float, bool]:
    """Step length under the geometric cap ||u(T_{n-1})||_{H^s} <= (2 C3)^{n-1} ||u(0)||_{H^s}."""
    # log X directly: the cap itself overflows a float for large n
    if not energy > 0:
        raise ValueError("the energy scale must be positive")
    log_x = (n - 1) * math.log(2.0 * C3) + math.log(hs0)
    clamped = not log_x >= math.log(LOG_FLOOR)
    L = math.log(LOG_FLOOR) if clamped else log_x
    return C7 / (energy * L * math.log(L)), clamped


def c8_constant(energy: float, hs0: float, C3: float, C7: float = 1.0) -> float:
    """C8 with cap_step_length(n) >= C8 / (n log n) for every n >= 3.

    With a = log(2 C3), b = max(2, |log ||u(0)||_{H^s}|) the clamped logarithm
    satisfies 2 <= L_n <= n (a + b), and log L_n <= log n (1 + log+(a + b) / log 3).
    """
    a = math.log(2.0 * C3)
    b = max(2.0, abs(math.log(hs0)))
    return C7 / (energy * (a + b) * (1.0 + max(0.0, math.log(a + b)) / math.log(3.0)))


def harmonic_log_sum(N: int) -> float:
    """sum_{n=2}^N 1 / (n log n)."""
    n = np.arange(2, int(N) + 1, dtype=float)
    return float(np.sum(1.0 / (n * np.log(n))))


# -- global continuation ----------------------------------------------------

class SolverInstability(RuntimeError):
    """Raised when the mass drifts beyond tolerance; carries the partial ledger."""

    def __init__(self, message: str, ledger: "ContinuationLedger"):
        super().__init__(message)
        self.ledger = ledger


@dataclass(frozen=True)
class ContinuationConfig:
    C2: float = 1.0
    C3: float | None = None
    C7: float = 1.0
    dt: float = 1e-3
    max_steps: int = 10_000
    mass_tol: float = 1e-6
    focusing_threshold: float = 0.1
    step_law: str = "measured"
    dealias: bool = False

    def __post_init__(self):
        if self.step_law not in ("measured", "cap"):
            raise ValueError("step_law must be 'measured' or 'cap'")
        if not (self.dt > 0 and self.C7 > 0 and self.C2 > 0):
            raise ValueError("dt, C2 and C7 must be positive")
        if self.C3 is not None and not self.C3 >= 1:
            raise ValueError("C3 must be >= 1")


LEDGER_COLUMNS = (
    "n", "T_n", "cum_t", "mass", "E", "H1", "Hs", "B11l", "clamped",
    "T_cap", "Hs_cap", "T_local",
)


@dataclass
class ContinuationLedger:
    """One row per local interval n: norms at its start, cumulative time at its end."""

    s: float
    eps: int
    energy: float
    constants: dict
    rows: list = field(default_factory=list)
    final: SpectralField | None = None

    @property
    def cumulative_time(self) -> float:
        return self.rows[-1]["cum_t"] if self.rows else 0.0

    @property
    def C3(self) -> float:
        return self.constants["C3"]

    def growth_audit(self, rtol: float = 1e-12) -> list[bool]:
        """Row n passes iff Hs_n <= (2 C3)^{n-1} Hs_1."""
        return [r["Hs"] <= r["Hs_cap"] * (1 + rtol) for r in self.rows]

    def energy_drift(self) -> float:
        E = np.array([r["E"] for r in self.rows])
        return float(np.max(np.abs(E - self.energy)) / abs(self.energy)) if E.size else 0.0

    def c8(self) -> float:
        hs0 = self.rows[0]["Hs"]
        return c8_constant(self.constants["E_step"], hs0, self.C3, self.constants["C7"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(LEDGER_COLUMNS)
        for r in self.rows:
            wr.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in LEDGER_COLUMNS])
        return buf.getvalue()

    def manifest(self) -> dict:
        return {"s": self.s, "eps": self.eps, "energy": self.energy, "constants": self.constants,
                "intervals": len(self.rows), "cumulative_time": self.cumulative_time}


def _geometric_cap(n: int, C3: float, hs0: float) -> float:
    log_cap = (n - 1) * math.log(2.0 * C3) + math.log(hs0)
    return math.exp(log_cap) if log_cap < 700 else math.inf


def _clamp_flags(*flags) -> str:
    names = ("measured", "cap")
    hit = [n for n, f in zip(names, flags) if f]
    return "|".join(hit) if hit else "none"


def global_continuation(
    phi0: SpectralField,
    s: float,
    eps: int,
    target_time: float,
    config: ContinuationConfig = ContinuationConfig(),
) -> ContinuationLedger:
    """Chain local intervals T_n = C7 / (E log X log log X) up to ``target_time``.

    X is the measured ||u||_{H^s} at the start of the interval (``step_law =
    'measured'``) or the geometric cap (2 C3)^{n-1} ||u(0)||_{H^s} (``'cap'``);
    both are recorded.  E is the conserved energy, replaced by ||u(0)||_{H^1}^2
    when that is larger (focusing case).  C3, when not configured, is calibrated
    as max(1, sup_{t <= T_1} ||u(t)||_{H^s} / ||u(0)||_{H^s}) over the first
    interval, sampled at every time step.
    """
    if not s > 1:
        raise ValueError("s must exceed 1")
    cs0 = conserved(phi0, eps)
    h1_sq = sobolev_norm(phi0, 1.0) ** 2
    if eps == -1 and cs0.mass > config.focusing_threshold * h1_sq:
        raise ValueError(
            f"focusing run needs mass <= {config.focusing_threshold} * ||phi0||_H1^2 "
            f"(mass {cs0.mass:.3e}, bound {config.focusing_threshold * h1_sq:.3e})"
        )
    E_step = max(cs0.energy, h1_sq)
    solver = SplitStepSolver(phi0.basis, FlowConfig(eps=eps, dt=config.dt, dealias=config.dealias))
    u = solver.prepare(phi0)
    hs0 = sobolev_norm(u, s)
    C3 = config.C3
    constants = {"C2": config.C2, "C3": C3, "C7": config.C7, "E_step": E_step,
                 "step_law": config.step_law, "dt": config.dt}
    ledger = ContinuationLedger(s, eps, cs0.energy, constants)
    mass0 = cs0.mass
    cum = 0.0
    n = 0
    while cum < target_time * (1 - 1e-12) and n < config.max_steps:
        n += 1
        cs = conserved(u, eps)
        hs = sobolev_norm(u, s)
        b11 = log_besov_norm(u, 1.0, 1)
        T_meas, clamp_m = step_length(E_step, hs, config.C7)
        c3_now = 1.0 if C3 is None else C3
        T_cap, clamp_c = cap_step_length(n, E_step, hs0, c3_now, config.C7)
        T_n = T_meas if config.step_law == "measured" else T_cap
        n_sub = max(1, math.ceil(T_n / min(config.dt, T_n / 32) - 1e-9))
        dt = T_n / n_sub
        if n == 1 and C3 is None:
            peak = hs
            for _ in range(n_sub):
                u = solver.advance(u, 1, dt)
                peak = max(peak, sobolev_norm(u, s))
            C3 = max(1.0, peak / hs0)
            constants["C3"] = C3
            T_cap, clamp_c = cap_step_length(n, E_step, hs0, C3, config.C7)
        else:
            u = solver.advance(u, n_sub, dt)
        cum += T_n
        ledger.rows.append({
            "n": n, "T_n": T_n, "cum_t": cum, "mass": cs.mass, "E": cs.energy,
            "H1": math.sqrt(cs.kinetic), "Hs": hs, "B11l": b11,
            "clamped": _clamp_flags(clamp_m, clamp_c), "T_cap": T_cap,
            "Hs_cap": _geometric_cap(n, C3, hs0), "T_local": local_time(b11, config.C2),
        })
        drift = abs(u.mass() - mass0) / mass0 if mass0 > 0 else 0.0
        if drift > config.mass_tol:
            ledger.final = u
            raise SolverInstability(
                f"mass drift {drift:.3e} exceeds {config.mass_tol:.1e} in interval {n} "
                f"(t = {cum:.6g}, dt = {dt:.3e})",
                ledger,
            )
    ledger.final = u
    return ledger
