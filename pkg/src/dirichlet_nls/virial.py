"""Bilinear virial functional I(u, v) = int int rho(x - y) |u|^2(x) |v|^2(y)
for the directional weight rho_{omega,k}, its time derivatives, and residual
checks of the second-derivative identity.

rho_{omega,k}(z) = g(omega . z) with the C^{1,1} profile
    g(s) = |s|                      for |s| > 2^-k
    g(s) = 2^k s^2 / 2 + 2^-k / 2   for |s| <= 2^-k.

Because rho only depends on s = omega . z, everything reduces to integrals
against 1D line projections (marginals) of densities such as |u|^2 and
Im(conj(u) d_omega u).  Two routes are provided:

* ``binned``: marginals deposited from grid samples into B bins with linear
  interpolation (any direction);
* ``exact``: for coordinate directions on the cube the marginals are finite
  trigonometric sums, evaluated in closed form and integrated with
  Gauss-Legendre panels split at the kinks of g.  This route is accurate to
  roundoff and is what the finite-difference identity checks use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .basis import (
    CUBE_FACES,
    DomainKind,
    PhysicalField,
    SpectralField,
    analyze,
    face_energies,
    gradient,
    synthesize,
)
from .flow import linear_evolve

__all__ = [
    "DirectionalWeight",
    "weight_eval",
    "weight_grad",
    "LineProjection",
    "line_projection",
    "interaction_functional",
    "momentum_derivative",
    "second_derivative_terms",
    "first_derivative_check",
    "virial_second_derivative_check",
    "VirialReport",
    "direction_set",
    "axis_of",
    "interior_packet",
    "brute_force_functional",
]


@dataclass(frozen=True)
class DirectionalWeight:
    omega: tuple
    k: int

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        if om.shape != (3,) or not np.isclose(np.linalg.norm(om), 1.0, atol=1e-12):
            raise ValueError("omega must be a unit 3-vector")
        object.__setattr__(self, "omega", tuple(float(x) for x in om))

    @property
    def width(self) -> float:
        return 2.0 ** (-self.k)

    def g(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        d = self.width
        return np.where(s > d, s, 0.5 * s * s / d + 0.5 * d)

    def dg(self, s):
        s = np.asarray(s, dtype=float)
        d = self.width
        return np.where(np.abs(s) > d, np.sign(s), s / d)

    def d2g(self, s):
        """A.e. second derivative: 2^k inside the slab, 0 outside."""
        s = np.asarray(s, dtype=float)
        return np.where(np.abs(s) < self.width, 1.0 / self.width, 0.0)


def weight_eval(w: DirectionalWeight, z) -> np.ndarray:
    """rho_{omega,k}(z) for z of shape (..., 3)."""
    return w.g(np.asarray(z, dtype=float) @ np.asarray(w.omega))


def weight_grad(w: DirectionalWeight, z) -> np.ndarray:
    """omega . grad rho_{omega,k}(z)."""
    return w.dg(np.asarray(z, dtype=float) @ np.asarray(w.omega))


def direction_set(n_random: int = 10, seed: int = 20140601) -> np.ndarray:
    """The three coordinate axes followed by seeded random unit vectors."""
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((n_random, 3))
    r /= np.linalg.norm(r, axis=1, keepdims=True)
    return np.vstack([np.eye(3), r])


def axis_of(omega) -> int | None:
    om = np.abs(np.asarray(omega, dtype=float))
    hit = np.flatnonzero(np.isclose(om, 1.0, atol=1e-14))
    return int(hit[0]) if hit.size == 1 else None


# -- binned line projections -----------------------------------------------

@dataclass
class LineProjection:
    omega: tuple
    centers: np.ndarray
    h: float
    density: np.ndarray

    def total(self) -> float:
        return float(np.sum(self.density) * self.h)


def _cube_coords(basis):
    x = basis.points[0]
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    return X, Y, Z


def line_projection(
    values: np.ndarray,
    basis,
    omega,
    n_bins: int | None = None,
    weights: np.ndarray | None = None,
) -> LineProjection:
    """Project a density sampled on the cube grid onto the line s = omega . x.

    Each grid point's quadrature mass is split between the two neighbouring bin
    nodes by linear interpolation, so sum(density) * h equals the quadrature
    integral of the density.
    """
    om = np.asarray(omega, dtype=float)
    X, Y, Z = _cube_coords(basis)
    s = om[0] * X + om[1] * Y + om[2] * Z
    w1 = basis.weights[0]
    W = w1[:, None, None] * w1[None, :, None] * w1[None, None, :] if weights is None else weights
    G = basis.spec.grid_size
    B = 4 * G if n_bins is None else int(n_bins)
    lo = float(np.sum(np.minimum(om, 0.0)) * np.pi)
    hi = float(np.sum(np.maximum(om, 0.0)) * np.pi)
    h = (hi - lo) / B
    u = ((s - lo) / h).ravel()
    i = np.clip(np.floor(u).astype(int), 0, B - 1)
    frac = u - i
    mass = (W * values).ravel()
    dens = np.bincount(i, weights=mass * (1 - frac), minlength=B + 1)
    dens += np.bincount(i + 1, weights=mass * frac, minlength=B + 1)
    centers = lo + h * np.arange(B + 1)
    return LineProjection(tuple(om), centers, h, dens / h)


def _binned_pair(kernel, pu: LineProjection, pv: LineProjection) -> float:
    diff = pu.centers[:, None] - pv.centers[None, :]
    return float(pu.density @ kernel(diff) @ pv.density * pu.h * pv.h)


# -- exact axis marginals ---------------------------------------------------

class _AxisMarginals:
    """Closed-form 1D marginals of a cube field along coordinate axis ``axis``.

    With R_{aa'} = sum over the transverse indices of c_a conj(c_a'):
      |u|^2           -> (2/pi) sum R sin(ax) sin(a'x)
      conj(u) d u     -> (2/pi) sum R a cos(ax) sin(a'x)
      |d u|^2         -> (2/pi) sum R a a' cos(ax) cos(a'x)
    """

    def __init__(self, f: SpectralField, axis: int):
        t = np.moveaxis(f.tensor(), axis, 0)
        n = t.shape[0]
        C = t.reshape(n, -1)
        nz = np.flatnonzero(np.any(C != 0, axis=1))
        self.n_eff = int(nz[-1]) + 1 if nz.size else 1
        C = C[: self.n_eff]
        self.R = C @ C.conj().T
        self.a = np.arange(1, self.n_eff + 1, dtype=float)

    def evaluate(self, x: np.ndarray) -> dict:
        x = np.asarray(x, dtype=float).ravel()
        S = np.sin(np.outer(x, self.a))
        D = self.a * np.cos(np.outer(x, self.a))
        c = 2.0 / np.pi
        # sum_{a,a'} R_{aa'} X_a Y_a' = sum_a' (X R)_a' Y_a'
        SR = S @ self.R
        DR = D @ self.R
        dens = c * np.sum(SR * S, axis=1).real
        cross = c * np.sum(DR * S, axis=1)
        kin = c * np.sum(DR * D, axis=1).real
        return {"P": dens, "Q": cross, "M": cross.imag, "K": kin}


def _gl(n):
    t, w = leggauss(n)
    return t, w


def _panel_pairs(breaks, n):
    """Gauss-Legendre nodes for s in the panels given by ``breaks``."""
    t, w = _gl(n)
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 0:
            continue
        yield a + (t + 1) * (b - a) / 2, w * (b - a) / 2


def _double_integrals(kernels: dict, mu: _AxisMarginals, mv: _AxisMarginals, width: float, n: int):
    """int_0^pi int_0^pi K(x - y) A(x) B(y) dx dy for named (kernel, A, B) triples.

    ``kernels`` maps a name to (kernel callable, key of the u marginal, key of
    the v marginal); values are returned complex.
    """
    L = np.pi
    br = sorted({-L, L, 0.0} | ({-width, width} if width < L else set()))
    out = {name: 0.0 + 0.0j for name in kernels}
    tx, wx = _gl(n)
    for s, ws in _panel_pairs(br, n):
        lo = np.maximum(0.0, s)
        hi = np.minimum(L, L + s)
        half = (hi - lo) / 2
        X = lo[:, None] + (tx[None, :] + 1) * half[:, None]
        WX = wx[None, :] * half[:, None]
        Y = X - s[:, None]
        Mu = mu.evaluate(X)
        Mv = mv.evaluate(Y)
        for name, (kern, ku, kv) in kernels.items():
            inner = np.sum(WX * (Mu[ku].reshape(X.shape) * Mv[kv].reshape(Y.shape)), axis=1)
            out[name] += np.sum(ws * kern(s) * inner)
    return out


def _single_integral(kern, x0: float, m: _AxisMarginals, key: str, width: float, n: int) -> float:
    """int_0^pi K(x0 - y) m[key](y) dy with panels split at the kinks of K."""
    L = np.pi
    br = sorted({0.0, L} | {p for p in (x0 - width, x0 + width, x0) if 0.0 < p < L})
    total = 0.0
    for y, wy in _panel_pairs(br, n):
        total += np.sum(wy * kern(x0 - y) * m.evaluate(y)[key])
    return float(np.real(total))


def _quad_order(u: SpectralField, v: SpectralField) -> int:
    n = u.basis.n_modes + v.basis.n_modes
    return int(2 * n + 32)


def _at(f: SpectralField, t: float) -> SpectralField:
    return f if t == 0 else linear_evolve(f, t)


def _require_axis(w: DirectionalWeight, u: SpectralField) -> int:
    ax = axis_of(w.omega)
    if ax is None or u.basis.kind is not DomainKind.CUBE:
        raise ValueError("exact route needs a coordinate direction on the cube")
    return ax


def interaction_functional(
    u: SpectralField,
    v: SpectralField,
    w: DirectionalWeight,
    t: float = 0.0,
    method: str = "auto",
    kernel=None,
    n_bins: int | None = None,
) -> float:
    """I(u, v) at time t (fields evolved by the linear flow).

    ``kernel`` replaces g(s) (test hook, e.g. ``lambda s: np.ones_like(s)``).
    """
    if u.basis.kind is not DomainKind.CUBE:
        raise ValueError("the interaction functional is implemented on the cube")
    kern = w.g if kernel is None else kernel
    ut, vt = _at(u, t), _at(v, t)
    if method == "auto":
        method = "exact" if axis_of(w.omega) is not None else "binned"
    if method == "exact":
        ax = _require_axis(w, u)
        mu, mv = _AxisMarginals(ut, ax), _AxisMarginals(vt, ax)
        r = _double_integrals({"I": (kern, "P", "P")}, mu, mv, w.width, _quad_order(u, v))
        return float(r["I"].real)
    if method != "binned":
        raise ValueError(f"unknown method {method!r}")
    du = np.abs(synthesize(ut).values) ** 2
    dv = np.abs(synthesize(vt).values) ** 2
    pu = line_projection(du, u.basis, w.omega, n_bins)
    pv = line_projection(dv, v.basis, w.omega, n_bins)
    return _binned_pair(kern, pu, pv)


def _momentum_density(f: SpectralField, omega) -> np.ndarray:
    phi = synthesize(f).values
    grads = gradient(f)
    d = sum(o * g.values for o, g in zip(omega, grads))
    return np.imag(np.conj(phi) * d)


def momentum_derivative(
    u: SpectralField,
    v: SpectralField,
    w: DirectionalWeight,
    t: float = 0.0,
    method: str = "auto",
    n_bins: int | None = None,
) -> float:
    """d/dt I along the linear flow, from the momentum densities.

    dI/dt = 2 int int (omega . grad rho)(x - y) [m_u(x) |v|^2(y) - |u|^2(x) m_v(y)]
    with m_f = Im(conj(f) (omega . grad) f).
    """
    ut, vt = _at(u, t), _at(v, t)
    if method == "auto":
        method = "exact" if axis_of(w.omega) is not None else "binned"
    if method == "exact":
        ax = _require_axis(w, u)
        mu, mv = _AxisMarginals(ut, ax), _AxisMarginals(vt, ax)
        r = _double_integrals(
            {"mp": (w.dg, "M", "P"), "pm": (w.dg, "P", "M")}, mu, mv, w.width, _quad_order(u, v)
        )
        return float(2.0 * (r["mp"] - r["pm"]).real)
    om = w.omega
    pu = line_projection(np.abs(synthesize(ut).values) ** 2, u.basis, om, n_bins)
    pv = line_projection(np.abs(synthesize(vt).values) ** 2, v.basis, om, n_bins)
    qu = line_projection(_momentum_density(ut, om), u.basis, om, n_bins)
    qv = line_projection(_momentum_density(vt, om), v.basis, om, n_bins)
    return 2.0 * (_binned_pair(w.dg, qu, pv) - _binned_pair(w.dg, pu, qv))


def second_derivative_terms(
    u: SpectralField, v: SpectralField, w: DirectionalWeight, t: float = 0.0
) -> dict:
    """Pieces of d^2/dt^2 I for a coordinate direction (exact route).

    hessian  = 4 * 2^k * int int_{|omega.(x-y)|<2^-k} |omega . F|^2,
               F = conj(v)(y) grad u(x) + u(x) grad conj(v)(y)
    boundary_u = int_{x in dOmega} int_y |v|^2(y) d_n rho(x - y) |d_n u|^2(x)
    boundary_v = the same with the roles of u and v exchanged
    rhs = hessian - 2 boundary_u - 2 boundary_v
    """
    ax = _require_axis(w, u)
    ut, vt = _at(u, t), _at(v, t)
    mu, mv = _AxisMarginals(ut, ax), _AxisMarginals(vt, ax)
    n = _quad_order(u, v)
    slab = _double_integrals(
        {
            "kp": (w.d2g, "K", "P"),
            "pk": (w.d2g, "P", "K"),
            "qq": (w.d2g, "Q", "Q"),
        },
        mu,
        mv,
        w.width,
        n,
    )
    # d2g already carries the 2^k factor
    slab_total = (slab["kp"] + slab["pk"]).real + 2.0 * slab["qq"].real
    hess = 4.0 * slab_total
    fu = face_energies(ut)
    fv = face_energies(vt)
    bu = bv = 0.0
    for idx, (a, side) in enumerate(CUBE_FACES):
        if a != ax:
            continue
        x0 = 0.0 if side == 0 else np.pi
        nrm = -1.0 if side == 0 else 1.0
        bu += nrm * fu[idx] * _single_integral(w.dg, x0, mv, "P", w.width, n)
        bv += nrm * fv[idx] * _single_integral(w.dg, x0, mu, "P", w.width, n)
    return {
        "slab": float(slab_total),
        "hessian": float(hess),
        "boundary_u": float(bu),
        "boundary_v": float(bv),
        "rhs": float(hess - 2.0 * bu - 2.0 * bv),
    }


def _richardson(d1: float, d2: float, order: int = 2) -> float:
    """Combine estimates at steps delta and delta/2 with leading error ~ delta^order."""
    f = 2.0**order
    return (f * d2 - d1) / (f - 1.0)


def _time_scale(u: SpectralField, v: SpectralField) -> float:
    lam = max(np.max(u.basis.eigenvalues[np.abs(u.coeffs) > 0], initial=1.0),
              np.max(v.basis.eigenvalues[np.abs(v.coeffs) > 0], initial=1.0))
    return 1.0 / lam


@dataclass
class VirialReport:
    """Residual rows (omega, k, t, lhs, rhs, residual, order) plus diagnostics."""

    rows: list = field(default_factory=list)
    converged: bool = True

    columns = ("omega", "k", "t", "lhs", "rhs", "residual", "order")


def first_derivative_check(
    u: SpectralField,
    v: SpectralField,
    w: DirectionalWeight,
    t: float = 0.0,
    delta: float | None = None,
) -> dict:
    """Centered FD of I (Richardson over delta, delta/2) vs the momentum formula."""
    d = 0.05 * _time_scale(u, v) if delta is None else delta

    def fd(h):
        return (interaction_functional(u, v, w, t + h) - interaction_functional(u, v, w, t - h)) / (2 * h)

    d1, d2 = fd(d), fd(d / 2)
    lhs = _richardson(d1, d2)
    rhs = momentum_derivative(u, v, w, t)
    scale = max(abs(rhs), abs(lhs), 1e-300)
    return {"fd": lhs, "formula": rhs, "residual": abs(lhs - rhs) / scale}


def virial_second_derivative_check(
    u0: SpectralField,
    v0: SpectralField,
    w: DirectionalWeight,
    times,
    delta: float | None = None,
    levels: int = 3,
) -> VirialReport:
    """Compare second finite differences of I(t) with the assembled identity.

    For each time, residuals are measured at steps delta / 2^i, i < levels;
    the reported order is log2 of successive residual ratios (minimum over
    the refinement levels), and ``lhs`` is the Richardson-extrapolated FD.
    """
    d0 = 0.1 * _time_scale(u0, v0) if delta is None else delta
    report = VirialReport()
    for t in times:
        I0 = interaction_functional(u0, v0, w, t)
        terms = second_derivative_terms(u0, v0, w, t)
        rhs = terms["rhs"]
        fds, res = [], []
        for i in range(levels):
            h = d0 / 2**i
            ip = interaction_functional(u0, v0, w, t + h)
            im = interaction_functional(u0, v0, w, t - h)
            fd = (ip - 2 * I0 + im) / h**2
            fds.append(fd)
            res.append(abs(fd - rhs))
        orders = [np.log2(res[i] / res[i + 1]) if res[i + 1] > 0 else np.inf for i in range(levels - 1)]
        order = float(min(orders))
        lhs = _richardson(fds[-2], fds[-1])
        residual = abs(lhs - rhs) / max(abs(rhs), abs(terms["hessian"]), 1e-300)
        if not order >= 1.0:
            report.converged = False
        report.rows.append(
            {
                "omega": " ".join(f"{x:.6f}" for x in w.omega),
                "k": w.k,
                "t": float(t),
                "lhs": float(lhs),
                "rhs": float(rhs),
                "residual": float(residual),
                "order": order,
                "fd_residuals": res,
                **terms,
            }
        )
    return report


def interior_packet(basis, center, width: float, momentum=(0.0, 0.0, 0.0)) -> SpectralField:
    """Unit-L2 Gaussian wave packet on the cube, negligible near the boundary
    when ``width`` is small against the distance from ``center`` to the faces."""
    x = basis.points[0]
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    c, p = np.asarray(center, dtype=float), np.asarray(momentum, dtype=float)
    r2 = (X - c[0]) ** 2 + (Y - c[1]) ** 2 + (Z - c[2]) ** 2
    g = np.exp(-r2 / (2 * width**2) + 1j * (p[0] * X + p[1] * Y + p[2] * Z))
    f = analyze(PhysicalField(basis.points, basis.weights, g), basis)
    return f * (1.0 / f.norm())


def brute_force_functional(u: SpectralField, v: SpectralField, w: DirectionalWeight) -> float:
    """Direct 6D grid quadrature of I (O(G^6); small grids only)."""
    b = u.basis
    X, Y, Z = _cube_coords(b)
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    wt = synthesize(u).weight_array.ravel()
    du = np.abs(synthesize(u).values.ravel()) ** 2 * wt
    dv = np.abs(synthesize(v).values.ravel()) ** 2 * wt
    s = pts @ np.asarray(w.omega)
    return float(du @ w.g(s[:, None] - s[None, :]) @ dv)
