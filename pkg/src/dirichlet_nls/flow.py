"""Time evolution: exact linear propagator, Strang split-step for the cubic
equation i d_t phi + Delta phi = eps |phi|^2 phi, and conserved quantities.

On the cube, a field on the collocation basis (all G grid modes) is evolved
with both substeps exactly unitary, so the mass is conserved to roundoff.
A field on a band-limited basis (N <= G/2) is projected back onto its modes
after each nonlinear substep; with q >= 2 this removes the aliased part of the
cubic term (the dealiased mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import (
    DomainKind,
    EigenBasis,
    SpectralField,
    _analysis_tensor,
    separable_split,
)
from .spectral import sobolev_norm

__all__ = [
    "FlowConfig",
    "ConservedSet",
    "linear_evolve",
    "nls_step",
    "conserved",
    "scale_to_energy",
    "simpson_weights",
    "embed",
    "restrict",
    "SplitStepSolver",
    "Trajectory",
    "evolve",
]


@dataclass(frozen=True)
class FlowConfig:
    eps: int = 0
    dt: float = 1e-3
    dealias: bool = False
    snapshot_every: int = 0

    def __post_init__(self):
        if self.eps not in (-1, 0, 1):
            raise ValueError("eps must be -1, 0 or +1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class ConservedSet:
    mass: float
    energy: float
    kinetic: float
    quartic: float


def linear_evolve(f: SpectralField, t: float) -> SpectralField:
    """exp(i t Delta) f: c_n -> exp(-i lambda_n t) c_n."""
    return f.with_coeffs(f.coeffs * np.exp(-1j * f.basis.eigenvalues * t))


def _to_grid(basis: EigenBasis, c: np.ndarray) -> np.ndarray:
    if basis.kind is DomainKind.CUBE:
        S = basis.sin_matrix
        X = separable_split(basis.to_tensor(c), (S, S, S))
        return X[0] + 1j * X[1]
    return basis.sin_matrix @ c


def _from_grid(basis: EigenBasis, phi: np.ndarray) -> np.ndarray:
    if basis.kind is DomainKind.CUBE:
        return basis.from_tensor(_analysis_tensor(phi, basis.analysis_matrix))
    return basis.analysis_matrix @ phi


def _phase(phi: np.ndarray, eps: float, tau: float) -> np.ndarray:
    return phi * np.exp(-1j * eps * tau * (phi.real**2 + phi.imag**2))


def nls_step(f: SpectralField, dt: float, eps: int) -> SpectralField:
    """One Strang step: half nonlinear phase, exact linear step, half phase."""
    b = f.basis
    if eps == 0:
        return linear_evolve(f, dt)
    phi = _phase(_to_grid(b, f.coeffs), eps, dt / 2)
    c = _from_grid(b, phi) * np.exp(-1j * b.eigenvalues * dt)
    phi = _phase(_to_grid(b, c), eps, dt / 2)
    return f.with_coeffs(_from_grid(b, phi))


def conserved(f: SpectralField, eps: int) -> ConservedSet:
    """Mass and Hamiltonian E = int |grad phi|^2 + (eps/2) int |phi|^4."""
    b = f.basis
    mass = float(np.sum(np.abs(f.coeffs) ** 2))
    kinetic = float(np.sum(b.eigenvalues * np.abs(f.coeffs) ** 2))
    quartic = 0.0
    if eps != 0:
        phi = _to_grid(b, f.coeffs)
        a2 = phi.real**2 + phi.imag**2
        if b.kind is DomainKind.CUBE:
            w = b.weights[0]
            quartic = float(np.einsum("i,j,k,ijk->", w, w, w, a2 * a2))
        else:
            quartic = float(np.sum(b.weights[0] * a2 * a2))
    return ConservedSet(mass, kinetic + 0.5 * eps * quartic, kinetic, quartic)


def scale_to_energy(f: SpectralField, eps: int, energy: float) -> SpectralField:
    """alpha f with E(alpha f) = energy, i.e. alpha^2 K + eps alpha^4 Q / 2 = energy.

    Takes the smallest admissible alpha^2; raises when no real root exists.
    """
    cs = conserved(f, eps if eps else 1)
    K, Q = cs.kinetic, cs.quartic
    if K <= 0 or energy <= 0:
        raise ValueError("need a nonzero field and a positive target energy")
    if eps == 0 or Q == 0:
        x = energy / K
    elif eps > 0:
        x = 2.0 * energy / (K + math.sqrt(K * K + 2.0 * Q * energy))
    else:
        disc = K * K - 2.0 * Q * energy
        if disc < 0:
            raise ValueError("target energy not reachable in the focusing case")
        x = 2.0 * energy / (K + math.sqrt(disc))
    return f * math.sqrt(x)


def simpson_weights(T: float, M: int = 65) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and composite Simpson weights on [0, T] with M (odd) samples."""
    if M < 3 or M % 2 == 0:
        raise ValueError("M must be odd and >= 3")
    t = np.linspace(0.0, T, M)
    w = np.ones(M)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return t, w * (T / (M - 1)) / 3.0


def embed(f: SpectralField, basis: EigenBasis) -> SpectralField:
    """Copy coefficients into a larger basis on the same domain."""
    if basis is f.basis:
        return f
    c = np.zeros(basis.size, dtype=complex)
    pos = _positions(f.basis, basis)
    c[pos] = f.coeffs
    return SpectralField(basis, c)


def restrict(f: SpectralField, basis: EigenBasis) -> SpectralField:
    """Orthogonal projection onto a smaller basis on the same domain."""
    if basis is f.basis:
        return f
    return SpectralField(basis, f.coeffs[_positions(basis, f.basis)])


def _positions(small: EigenBasis, big: EigenBasis) -> np.ndarray:
    key = ("positions", id(small))
    if key not in big._cache:
        lookup = {tuple(ix): i for i, ix in enumerate(big.indices)}
        big._cache[key] = np.array([lookup[tuple(ix)] for ix in small.indices])
    return big._cache[key]


class SplitStepSolver:
    """Repeated Strang steps with the inner half-phases fused.

    With ``dealias=False`` on the cube the state is held on the collocation
    basis; results are returned on that basis.
    """

    def __init__(self, basis: EigenBasis, config: FlowConfig):
        self.config = config
        if basis.kind is DomainKind.CUBE and not config.dealias:
            basis = basis.collocation()
        self.basis = basis
        self._phase_lin = None
        self._dt = None

    def _lin(self, dt):
        if self._dt != dt:
            self._phase_lin = np.exp(-1j * self.basis.eigenvalues * dt)
            self._dt = dt
        return self._phase_lin

    def prepare(self, f: SpectralField) -> SpectralField:
        if f.basis is self.basis:
            return f
        if f.basis.size <= self.basis.size:
            return embed(f, self.basis)
        return restrict(f, self.basis)

    def advance(self, f: SpectralField, n_steps: int, dt: float | None = None) -> SpectralField:
        """n Strang steps of size dt (default config.dt)."""
        dt = self.config.dt if dt is None else dt
        eps = self.config.eps
        f = self.prepare(f)
        if n_steps <= 0:
            return f
        lin = self._lin(dt)
        if eps == 0:
            return f.with_coeffs(f.coeffs * np.exp(-1j * self.basis.eigenvalues * dt * n_steps))
        b = self.basis
        phi = _phase(_to_grid(b, f.coeffs), eps, dt / 2)
        for i in range(n_steps):
            c = _from_grid(b, phi) * lin
            phi = _to_grid(b, c)
            phi = _phase(phi, eps, dt if i < n_steps - 1 else dt / 2)
        return f.with_coeffs(_from_grid(b, phi))


@dataclass
class Trajectory:
    """Ledger rows (t, mass, E, H1, Hs) plus optional snapshots."""

    s: float
    rows: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final: SpectralField | None = None

    def record(self, t: float, f: SpectralField, eps: int):
        cs = conserved(f, eps)
        self.rows.append(
            {
                "t": t,
                "mass": cs.mass,
                "E": cs.energy,
                "H1": sobolev_norm(f, 1.0),
                "Hs": sobolev_norm(f, self.s),
            }
        )

    def columns(self):
        return ["t", "mass", "E", "H1", "Hs"]


def evolve(
    f0: SpectralField,
    config: FlowConfig,
    t_final: float,
    record_every: int = 0,
    s: float = 2.0,
) -> Trajectory:
    """Run the split-step solver to ``t_final`` recording conserved quantities.

    ``record_every`` steps between ledger rows (0 records only the end points);
    ``config.snapshot_every`` keeps field copies at that cadence.
    """
    solver = SplitStepSolver(f0.basis, config)
    n_total = max(1, int(math.ceil(t_final / config.dt - 1e-9)))
    dt = t_final / n_total
    f = solver.prepare(f0)
    traj = Trajectory(s=s)
    traj.record(0.0, f, config.eps)
    if config.snapshot_every:
        traj.snapshots.append((0.0, f))
    chunk = record_every if record_every else n_total
    if config.snapshot_every:
        chunk = math.gcd(chunk, config.snapshot_every)
    done = 0
    while done < n_total:
        n = min(chunk, n_total - done)
        f = solver.advance(f, n, dt)
        done += n
        t = done * dt
        if (record_every and done % record_every == 0) or done == n_total:
            traj.record(t, f, config.eps)
        if config.snapshot_every and done % config.snapshot_every == 0:
            traj.snapshots.append((t, f))
    traj.final = f
    return traj
