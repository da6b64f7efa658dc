"""Measured constants of the bilinear, L^4, trace and boundary-trace estimates.

Every check reports the ratio LHS / RHS with all implicit constants set to 1;
scaling studies sweep dyadic bands and summarize the growth of the worst ratio
by a least-squares slope of log2(max ratio) against the band index.

Time integrals use composite Simpson on [0, T] (``M`` odd nodes).  Products of
band-limited fields are formed on grids with G >= n_u + n_v per axis, so the
spatial quadrature of quartic integrands is exact up to roundoff.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .basis import (
    DomainKind,
    DomainSpec,
    EigenBasis,
    SpectralField,
    boundary_energy,
    build_basis,
    gradient,
    laplacian_power,
    synthesize,
    _trim,
)
from .flow import embed, linear_evolve, simpson_weights
from .spectral import SUPPORT, dyadic_band, lp_decompose, random_band_field, sobolev_norm

__all__ = [
    "ESTIMATES",
    "BandPairSample",
    "EstimateReport",
    "band_basis",
    "band_pair_sample",
    "dominant_band",
    "boundary_functional",
    "bilinear_lhs",
    "gamma_functional",
    "gradient_product_check",
    "l4_norm_integral",
    "l4_ratio",
    "l2linf_ratio",
    "evaluate_at",
    "trace_lemma_check",
    "boundary_trace_scaling",
    "scaling_study",
    "bilinear_scan",
]

_DTYPES = {"double": np.float64, "single": np.float32}
ESTIMATES = ("grad_bilinear", "semiclassical", "global_time", "l4", "l2linf")
CSV_COLUMNS = ("estimate", "j", "k", "trial", "seed", "T", "lhs", "rhs", "ratio")


# -- band data --------------------------------------------------------------

@lru_cache(maxsize=None)
def _cached_basis(kind: str, N: int) -> EigenBasis:
    return build_basis(DomainSpec(DomainKind(kind), N))


def band_basis(kind: str | DomainKind, j: int, cap: int | None = None) -> EigenBasis:
    """Smallest basis containing every mode of band j (optionally capped)."""
    kind = DomainKind(kind)
    top = SUPPORT * 2.0 ** (j + 1)
    N = math.ceil(top) if kind is DomainKind.CUBE else math.ceil(top / np.pi) + 1
    if cap is None:
        cap = 64 if kind is DomainKind.CUBE else 256
    return _cached_basis(kind.value, max(1, min(int(cap), N)))


def _rng(*key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(x) for x in key]))


@dataclass(frozen=True)
class BandPairSample:
    """Unit-L2 random fields u_j (band j) and v_k (band k), on u's basis."""

    j: int
    k: int
    trial: int
    seed: int
    u: SpectralField
    v: SpectralField
    T: float


def _u_field(kind, j, trial, seed, cap):
    return random_band_field(band_basis(kind, j, cap), j, _rng(seed, 0, j, trial))


def _v_field(kind, j, k, trial, seed, cap):
    return random_band_field(band_basis(kind, k, cap), k, _rng(seed, 1, j, k, trial))


def band_pair_sample(
    j: int, k: int, trial: int, seed: int, T: float = 1.0, kind: str = "cube", cap: int | None = None
) -> BandPairSample:
    """Reproducible pair keyed by (seed, j, trial) for u and (seed, j, k, trial) for v."""
    if k > j:
        raise ValueError("need k <= j")
    u = _u_field(kind, j, trial, seed, cap)
    v = embed(_v_field(kind, j, k, trial, seed, cap), u.basis)
    return BandPairSample(j, k, trial, seed, u, v, T)


def dominant_band(w: SpectralField) -> int:
    """Band index carrying the largest L2 share (S_0 counts as band 0)."""
    norms = [p.norm() for p in lp_decompose(w)]
    i = int(np.argmax(norms))
    return max(0, i - 1)


# -- boundary functional ----------------------------------------------------

def _surface_integrals(w: SpectralField, T: float, orders: int, M: int) -> np.ndarray:
    """int_0^T int_dOmega |d_n Delta^l w|^2 for l = 0..orders."""
    out = np.zeros(orders + 1)
    if T == 0:
        return out
    t, wt = simpson_weights(T, M)
    for ti, wi in zip(t, wt):
        wt_f = linear_evolve(w, ti)
        for l in range(orders + 1):
            out[l] += wi * boundary_energy(laplacian_power(wt_f, l))
    return out


def boundary_functional(
    w: SpectralField, T: float, k_order: int, m: int | None = None, M: int = 65
) -> float:
    """H_k(w) = ||w|| ||w||_{H^1_0} + int_0^T int_dOmega sum_{l<=k} 2^{-2lm} |d_n Delta^l w|^2.

    ``m`` is the band of w (inferred when omitted).
    """
    if k_order not in (0, 1, 2):
        raise ValueError("k_order must be 0, 1 or 2")
    if m is None:
        m = dominant_band(w)
    surf = _surface_integrals(w, T, k_order, M)
    scale = 4.0 ** (-m * np.arange(k_order + 1))
    return float(w.norm() * sobolev_norm(w, 1.0) + np.dot(scale, surf))


def gamma_functional(u: SpectralField, v: SpectralField, T: float, j: int | None = None,
                     k: int | None = None, M: int = 65) -> float:
    """Gamma = 2^-k H_2(v) ||u(0)||^2 + 2^-j H_0(u) ||v(0)||^2."""
    j = dominant_band(u) if j is None else j
    k = dominant_band(v) if k is None else k
    return float(
        2.0**-k * boundary_functional(v, T, 2, k, M) * u.norm() ** 2
        + 2.0**-j * boundary_functional(u, T, 0, j, M) * v.norm() ** 2
    )


# -- bilinear integrals -----------------------------------------------------

class _Prepared:
    """Trimmed coefficient tensor of a cube field with per-axis eigenvalues."""

    __slots__ = ("c", "n", "lam")

    def __init__(self, f: SpectralField):
        t = f.tensor()
        self.n = _trim(t)
        self.c = t[: self.n[0], : self.n[1], : self.n[2]]
        self.lam = [np.arange(1, k + 1, dtype=float) ** 2 for k in self.n]

    def at(self, t: float, dtype) -> np.ndarray:
        p0, p1, p2 = (np.exp(-1j * lam * t) for lam in self.lam)
        c = self.c * (p0[:, None, None] * p1[None, :, None] * p2[None, None, :])
        return np.stack([c.real, c.imag]).astype(dtype)


class _ProductGrid:
    """Interior cube grid of a basis, with fused synthesis of f and grad f.

    The boundary samples of Dirichlet fields vanish, so only interior points
    enter the quadrature.  Contractions share their first stages between f
    and its three derivatives; ``dtype`` selects the GEMM precision.  Fields on
    smaller bases are synthesized directly (the 1D mode functions coincide).
    """

    def __init__(self, basis: EigenBasis, dtype=np.float64):
        self.basis = basis
        self.dtype = np.dtype(dtype)
        self.G = basis.sin_matrix.shape[0] - 2
        self.S = np.ascontiguousarray(basis.sin_matrix[1:-1], dtype=self.dtype)
        self.D = np.ascontiguousarray(basis.dcos_matrix[1:-1], dtype=self.dtype)
        w = basis.weights[0][1:-1]
        W = w[:, None, None] * w[None, :, None] * w[None, None, :]
        self.W = W.reshape(self.G, -1).astype(self.dtype)

    def density(self, f: _Prepared, t: float) -> np.ndarray:
        """|f(t)|^2 on the interior grid as a (G, G*G) array."""
        G, n, S = self.G, f.n, self.S
        if 0 in n:
            return np.zeros((G, G * G), dtype=self.dtype)
        X = f.at(t, self.dtype)
        X = (X.reshape(-1, n[2]) @ S[:, : n[2]].T).reshape(2, n[0], n[1], G)
        X = np.matmul(S[:, : n[1]], X)
        return _abs2(S[:, : n[0]] @ X.reshape(2, n[0], G * G))

    def density_and_gradient(self, f: _Prepared, t: float):
        """(|f|^2, |grad f|^2) at time t on the interior grid."""
        G, n = self.G, f.n
        if 0 in n:
            z = np.zeros((G, G * G), dtype=self.dtype)
            return z, z.copy()
        S, D = self.S, self.D
        flat = f.at(t, self.dtype).reshape(-1, n[2])
        Zs = (flat @ S[:, : n[2]].T).reshape(2, n[0], n[1], G)
        Zd = (flat @ D[:, : n[2]].T).reshape(2, n[0], n[1], G)
        S1, D1, S0, D0 = S[:, : n[1]], D[:, : n[1]], S[:, : n[0]], D[:, : n[0]]
        Yss = np.matmul(S1, Zs).reshape(2, n[0], G * G)
        Yds = np.matmul(D1, Zs).reshape(2, n[0], G * G)
        Ysd = np.matmul(S1, Zd).reshape(2, n[0], G * G)
        dens = _abs2(S0 @ Yss)
        grad = _abs2(D0 @ Yss)
        grad += _abs2(S0 @ Yds)
        grad += _abs2(S0 @ Ysd)
        return dens, grad


def _abs2(X: np.ndarray) -> np.ndarray:
    out = np.square(X[0])
    out += np.square(X[1])
    return out


def _wdot(a: np.ndarray, b: np.ndarray) -> float:
    """sum(a * b) with per-row dot products accumulated in float64."""
    return float(np.sum(np.vecdot(a, b), dtype=np.float64))


def _pair_integrals(u: SpectralField, vs: list, T: float, M: int, dtype=np.float64):
    """A_i = int ||u v_i||^2, B_i = int ||v_i grad u||^2 over [0, T] for all v_i."""
    b = u.basis
    A = np.zeros(len(vs))
    B = np.zeros(len(vs))
    t, wt = simpson_weights(T, M)
    if b.kind is DomainKind.CUBE:
        if any(v.basis.n_modes > b.n_modes for v in vs):
            raise ValueError("u must live on the largest basis")
        grid = _ProductGrid(b, dtype)
        pu = _Prepared(u)
        pvs = [_Prepared(v) for v in vs]
        for ti, wi in zip(t, wt):
            U2, G2 = grid.density_and_gradient(pu, ti)
            U2 *= grid.W
            G2 *= grid.W
            for i, pv in enumerate(pvs):
                V2 = grid.density(pv, ti)
                A[i] += wi * _wdot(V2, U2)
                B[i] += wi * _wdot(V2, G2)
        return A, B
    vs = [embed(v, b) for v in vs]
    for ti, wi in zip(t, wt):
        ut = linear_evolve(u, ti)
        U = synthesize(ut)
        W = U.weight_array
        U2 = np.abs(U.values) ** 2
        G2 = sum(np.abs(g.values) ** 2 for g in gradient(ut))
        for i, v in enumerate(vs):
            V2 = np.abs(synthesize(linear_evolve(v, ti)).values) ** 2 * W
            A[i] += wi * np.sum(V2 * U2)
            B[i] += wi * np.sum(V2 * G2)
    return A, B


def bilinear_lhs(u: SpectralField, v: SpectralField, T: float, M: int = 65,
                 precision: str = "double") -> tuple[float, float]:
    """(A, B) = (int_0^T ||u v||^2 dt, int_0^T ||v grad u||^2 dt) along the linear flow.

    ``precision="single"`` runs the grid transforms in float32 (sums stay in
    float64); relative accuracy is then about 1e-6.
    """
    if v.basis.size > u.basis.size:
        u = embed(u, v.basis)
    A, B = _pair_integrals(u, [v], T, M, _DTYPES[precision])
    return float(A[0]), float(B[0])


def gradient_product_check(u: SpectralField, v: SpectralField, T: float, M: int = 65) -> dict:
    """int ||grad(u v)||^2 against int ||u grad v||^2 + int ||v grad u||^2."""
    if v.basis.size > u.basis.size:
        u = embed(u, v.basis)
    v = embed(v, u.basis)
    t, wt = simpson_weights(T, M)
    lhs = a = c = 0.0
    for ti, wi in zip(t, wt):
        ut, vt = linear_evolve(u, ti), linear_evolve(v, ti)
        U, V = synthesize(ut), synthesize(vt)
        W = U.weight_array
        gu, gv = gradient(ut), gradient(vt)
        for du, dv in zip(gu, gv):
            p = V.values * du.values
            q = U.values * dv.values
            lhs += wi * np.sum(W * np.abs(p + q) ** 2)
            a += wi * np.sum(W * np.abs(p) ** 2)
            c += wi * np.sum(W * np.abs(q) ** 2)
    rhs = a + c
    return {"lhs": float(lhs), "rhs": float(rhs), "ratio": float(lhs / rhs) if rhs > 0 else 0.0}


# -- single-band norms ------------------------------------------------------

def l4_norm_integral(w: SpectralField, T: float, M: int = 65) -> float:
    """int_0^T ||w(t)||_4^4 dt along the linear flow."""
    t, wt = simpson_weights(T, M)
    total = 0.0
    for ti, wi in zip(t, wt):
        P = synthesize(linear_evolve(w, ti))
        total += wi * np.sum(P.weight_array * np.abs(P.values) ** 4)
    return float(total)


def l4_ratio(w: SpectralField, T: float, m: int | None = None, M: int = 65) -> float:
    """int_0^T ||w||_4^4 / (T 2^{2m} ||w(0)||^4)."""
    m = dominant_band(w) if m is None else m
    n = w.norm()
    if n == 0:
        return 0.0
    return l4_norm_integral(w, T, M) / (T * 4.0**m * n**4)


def l2linf_ratio(w: SpectralField, T: float, m: int | None = None, M: int = 65) -> tuple[float, float]:
    """(||w||_{L^2_T L^inf}, ratio to sqrt(T) m^2 2^m ||w(0)||); sup taken over the grid."""
    m = dominant_band(w) if m is None else m
    t, wt = simpson_weights(T, M)
    total = sum(wi * np.max(np.abs(synthesize(linear_evolve(w, ti)).values)) ** 2 for ti, wi in zip(t, wt))
    lhs = math.sqrt(total)
    rhs = math.sqrt(T) * max(m, 1) ** 2 * 2.0**m * w.norm()
    return lhs, lhs / rhs if rhs > 0 else 0.0


# -- trace lemma ------------------------------------------------------------

def evaluate_at(f: SpectralField, xs, ys, zs, laplacian: bool = False) -> np.ndarray:
    """Values of f (or Delta f) on the tensor grid xs x ys x zs (cube only)."""
    b = f.basis
    if b.kind is not DomainKind.CUBE:
        raise ValueError("pointwise tensor evaluation is implemented on the cube")
    g = laplacian_power(f, 1) if laplacian else f
    a = np.arange(1, b.n_modes + 1)
    s = math.sqrt(2.0 / math.pi)
    mats = [s * np.sin(np.outer(np.atleast_1d(p), a)) for p in (xs, ys, zs)]
    out = np.tensordot(mats[0], g.tensor(), axes=([1], [0]))
    out = np.tensordot(mats[1], out, axes=([1], [1])).transpose(1, 0, 2)
    return np.tensordot(out, mats[2], axes=([2], [1]))


def trace_lemma_check(
    phi: SpectralField | Callable,
    lam: float,
    center,
    laplacian: Callable | None = None,
    n_quad: int | None = None,
) -> tuple[float, float, float]:
    """(|phi(c)|^2, lam^-1 int_C |Delta phi|^2 + lam^3 int_C |phi|^2, ratio) on the cube C
    of side 1/lam centred at c.

    ``phi`` may be a callable phi(x, y, z) on broadcast arrays; then ``laplacian``
    must be given as a callable too.
    """
    c = np.asarray(center, dtype=float)
    half = 0.5 / lam
    if np.any(c - half < 0) or np.any(c + half > np.pi):
        raise ValueError("the subcube leaves the domain")
    if callable(phi) and not isinstance(phi, SpectralField):
        if laplacian is None:
            raise ValueError("a callable phi needs a callable laplacian")
        n = n_quad or 24
    else:
        n = n_quad or int(phi.basis.n_modes / lam) + 24
    t, w = np.polynomial.legendre.leggauss(n)
    axes = [ci + half * t for ci in c]
    wq = half * w
    W = wq[:, None, None] * wq[None, :, None] * wq[None, None, :]
    if isinstance(phi, SpectralField):
        vals = evaluate_at(phi, *axes)
        lap = evaluate_at(phi, *axes, laplacian=True)
        point = evaluate_at(phi, [c[0]], [c[1]], [c[2]])[0, 0, 0]
    else:
        X, Y, Z = np.meshgrid(*axes, indexing="ij")
        vals, lap = phi(X, Y, Z), laplacian(X, Y, Z)
        point = phi(np.array(c[0]), np.array(c[1]), np.array(c[2]))
    lhs = float(abs(point) ** 2)
    rhs = float(np.sum(W * np.abs(lap) ** 2) / lam + lam**3 * np.sum(W * np.abs(vals) ** 2))
    return lhs, rhs, lhs / rhs if rhs > 0 else 0.0


def boundary_trace_scaling(w: SpectralField, T: float | None = None, j: int | None = None,
                           M: int = 65) -> float:
    """int_0^T int_dOmega |d_n w|^2 / (2^-j ||w||_{H^1}^2 + ||w|| ||w||_{H^1}), T = 2^-j by default."""
    j = dominant_band(w) if j is None else j
    T = 2.0**-j if T is None else T
    h1 = sobolev_norm(w, 1.0)
    rhs = 2.0**-j * h1**2 + w.norm() * h1
    if rhs == 0:
        return 0.0
    return float(_surface_integrals(w, T, 0, M)[0] / rhs)


# -- reports ----------------------------------------------------------------

def _slope(keys: np.ndarray, ratios: np.ndarray) -> float | None:
    uniq = np.unique(keys)
    if uniq.size < 2:
        return None
    worst = np.array([ratios[keys == q].max() for q in uniq])
    return float(np.polyfit(uniq.astype(float), np.log2(worst), 1)[0])


@dataclass
class EstimateReport:
    """Rows (estimate, j, k, trial, seed, T, lhs, rhs, ratio) plus regression summary."""

    estimate: str
    rows: list = field(default_factory=list)
    domain: str = "cube"
    config: dict = field(default_factory=dict)

    def sort(self) -> "EstimateReport":
        self.rows.sort(key=lambda r: (r["j"], r["k"], r["trial"]))
        return self

    def ratios(self) -> np.ndarray:
        return np.array([r["ratio"] for r in self.rows], dtype=float)

    def summary(self) -> dict:
        r = self.ratios()
        js = np.array([row["j"] for row in self.rows])
        ks = np.array([row["k"] for row in self.rows])
        return {
            "estimate": self.estimate,
            "domain": self.domain,
            "rows": len(self.rows),
            "max_ratio": float(r.max()) if r.size else None,
            "min_ratio": float(r.min()) if r.size else None,
            "slope_j": _slope(js, r) if r.size else None,
            "slope_k": _slope(ks, r) if r.size and self.estimate not in ("l4", "l2linf") else None,
            "config": self.config,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for row in self.rows:
            wr.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def write(self, directory: str, stem: str | None = None) -> tuple[str, str]:
        os.makedirs(directory, exist_ok=True)
        stem = stem or self.estimate
        p_csv = os.path.join(directory, f"{stem}.csv")
        p_json = os.path.join(directory, f"{stem}.json")
        with open(p_csv, "w", newline="") as fh:
            fh.write(self.to_csv())
        with open(p_json, "w") as fh:
            fh.write(self.to_json() + "\n")
        return p_csv, p_json


def _row(est, j, k, trial, seed, T, lhs, rhs):
    return {
        "estimate": est, "j": int(j), "k": int(k), "trial": int(trial), "seed": int(seed),
        "T": float(T), "lhs": float(lhs), "rhs": float(rhs),
        "ratio": float(lhs / rhs) if rhs > 0 else 0.0,
    }


def _horizon(est: str, j: int, T: float | None) -> float:
    if T is not None:
        return float(T)
    return 2.0**-j / 2 if est == "semiclassical" else 1.0


def _bilinear_task(args):
    """Rows for all k at one (j, trial): u_j is shared across k."""
    ests, j, ks, trial, seed, T_cfg, M, kind, cap, precision = args
    u = _u_field(kind, j, trial, seed, cap)
    vs = [_v_field(kind, j, k, trial, seed, cap) for k in ks]
    out = []
    horizons = {}
    for est in ests:
        horizons.setdefault(_horizon(est, j, T_cfg), []).append(est)
    for T, group in sorted(horizons.items()):
        A, B = _pair_integrals(u, vs, T, M, _DTYPES[precision])
        if "grad_bilinear" in group:
            H0 = boundary_functional(u, T, 0, j, M)
            H2 = [boundary_functional(v, T, 2, k, M) for v, k in zip(vs, ks)]
        for i, k in enumerate(ks):
            lhs = A[i] + 4.0**-j * B[i]
            for est in group:
                if est == "global_time":
                    out.append(_row(est, j, k, trial, seed, T, lhs, T * 4.0**k))
                elif est == "semiclassical":
                    out.append(_row(est, j, k, trial, seed, T, lhs, 2.0 ** (2 * k - j)))
                elif est == "grad_bilinear":
                    rhs = 4.0**k * (vs[i].norm() ** 2 * H0 + u.norm() ** 2 * H2[i])
                    out.append(_row(est, j, k, trial, seed, T, B[i], rhs))
    return out


def _single_task(args):
    est, m, trial, seed, T_cfg, M, kind, cap = args
    w = _u_field(kind, m, trial, seed, cap)
    T = _horizon(est, m, T_cfg)
    if est == "l4":
        lhs = l4_norm_integral(w, T, M)
        rhs = T * 4.0**m * w.norm() ** 4
    else:
        lhs, _ = l2linf_ratio(w, T, m, M)
        rhs = math.sqrt(T) * max(m, 1) ** 2 * 2.0**m * w.norm()
    return [_row(est, m, m, trial, seed, T, lhs, rhs)]


def _run(tasks, fn, workers):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(fn, tasks))
    else:
        chunks = [fn(t) for t in tasks]
    return [row for c in chunks for row in c]


def bilinear_scan(
    estimates,
    j_range,
    k_range=None,
    trials: int = 5,
    seed: int | None = None,
    T: float | None = None,
    M: int = 65,
    kind: str = "cube",
    cap: int | None = None,
    workers: int = 1,
    precision: str = "single",
) -> dict:
    """Jointly computed reports for the bilinear estimates; u_j is drawn once per (j, trial).

    ``j_range``/``k_range`` are inclusive (lo, hi); k runs over [k_lo, min(k_hi, j)].
    ``precision`` selects the grid-transform precision (see :func:`bilinear_lhs`).
    """
    if seed is None:
        raise ValueError("a seed is required")
    estimates = tuple(estimates)
    for e in estimates:
        if e not in ("grad_bilinear", "semiclassical", "global_time"):
            raise ValueError(f"{e!r} is not a bilinear estimate")
    j_lo, j_hi = j_range
    k_lo, k_hi = k_range if k_range is not None else (1, j_hi)
    tasks = []
    for j in range(j_lo, j_hi + 1):
        ks = tuple(range(k_lo, min(k_hi, j) + 1))
        if not ks:
            continue
        for trial in range(trials):
            tasks.append((estimates, j, ks, trial, seed, T, M, kind, cap, precision))
    if not tasks or trials < 1:
        raise ValueError("empty (j, k, trial) range")
    rows = _run(tasks, _bilinear_task, workers)
    cfg = {"j_range": list(j_range), "k_range": [k_lo, k_hi], "trials": trials, "seed": seed,
           "T": T, "M": M, "cap": cap, "precision": precision}
    reports = {}
    for e in estimates:
        rep = EstimateReport(e, [r for r in rows if r["estimate"] == e], kind, cfg)
        reports[e] = rep.sort()
    return reports


def scaling_study(
    estimate: str,
    j_range,
    k_range=None,
    trials: int = 5,
    seed: int | None = None,
    T: float | None = None,
    M: int = 65,
    kind: str = "cube",
    cap: int | None = None,
    workers: int = 1,
    precision: str = "single",
) -> EstimateReport:
    """Sweep one estimate over dyadic bands; rows keyed by (j, k, trial).

    Default horizons: T = 2^-j / 2 for ``semiclassical``, T = 1 otherwise.
    """
    if estimate not in ESTIMATES:
        raise ValueError(f"unknown estimate {estimate!r}; choose from {ESTIMATES}")
    if seed is None:
        raise ValueError("a seed is required")
    if estimate in ("l4", "l2linf"):
        lo, hi = j_range
        if hi < lo or trials < 1:
            raise ValueError("empty (j, trial) range")
        tasks = [(estimate, m, t, seed, T, M, kind, cap) for m in range(lo, hi + 1) for t in range(trials)]
        rows = _run(tasks, _single_task, workers)
        cfg = {"j_range": list(j_range), "trials": trials, "seed": seed, "T": T, "M": M, "cap": cap}
        return EstimateReport(estimate, rows, kind, cfg).sort()
    return bilinear_scan(
        (estimate,), j_range, k_range, trials, seed, T, M, kind, cap, workers, precision
    )[estimate]
