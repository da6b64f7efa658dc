"""Spectral calculus on an eigenbasis: smooth cutoffs, Littlewood-Paley bands,
Besov-type norms and the heat-smoothed gradient operators Q_l.

The low-pass cutoff ``cutoff`` equals 1 on [0, 1] and 0 on [1.1, inf).
S_J = cutoff(2^-J sqrt(-Delta)), and the band multipliers are
psi_j(xi) = cutoff(2^-(j+1) xi) - cutoff(2^-j xi), so that
S_0 + sum_{j<J} Delta_j = S_J exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import EigenBasis, SpectralField, gradient, PhysicalField

__all__ = [
    "cutoff",
    "band_profile",
    "fat_band_profile",
    "DyadicBand",
    "dyadic_band",
    "apply_multiplier",
    "lp_decompose",
    "min_band_index",
    "besov_norm",
    "sobolev_norm",
    "log_besov_norm",
    "besov_weight",
    "q_operator",
    "d_operator",
    "random_band_field",
    "PLATEAU",
    "SUPPORT",
]

PLATEAU = 1.0
SUPPORT = 1.1


def _smooth_step(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def cutoff(xi) -> np.ndarray:
    """C-infinity cutoff: 1 on [0, 1], 0 on [1.1, inf), monotone in between."""
    xi = np.asarray(xi, dtype=float)
    a = _smooth_step(SUPPORT - xi)
    b = _smooth_step(xi - PLATEAU)
    return a / (a + b)


def band_profile(j: int) -> Callable:
    """psi_j as a function of the spectral parameter xi = sqrt(lambda)."""
    def psi(xi):
        return cutoff(np.asarray(xi) / 2.0 ** (j + 1)) - cutoff(np.asarray(xi) / 2.0**j)
    return psi


def fat_band_profile(x) -> np.ndarray:
    """Bump in the scaled variable x = 2^-j xi that equals 1 on supp psi_0 = (1, 2.2).

    Vanishes for x <= 0.5 and x >= 2.42.
    """
    x = np.asarray(x, dtype=float)
    return (1.0 - cutoff(2.0 * x)) * cutoff(x / 2.2)


@dataclass(frozen=True)
class DyadicBand:
    """Band j of a basis: member mode positions and psi_j at their frequencies."""

    j: int
    members: np.ndarray
    values: np.ndarray


def dyadic_band(basis: EigenBasis, j: int) -> DyadicBand:
    """Modes with psi_j(sqrt(lambda_n)) != 0; cached on the basis."""
    key = ("band", int(j))
    cache = basis._cache
    if key not in cache:
        vals = band_profile(j)(basis.frequencies)
        members = np.flatnonzero(vals != 0.0)
        members.setflags(write=False)
        v = vals[members]
        v.setflags(write=False)
        cache[key] = DyadicBand(int(j), members, v)
    return cache[key]


def apply_multiplier(f: SpectralField, profile: Callable, m: int | float = 0) -> SpectralField:
    """c_n -> profile(2^-m sqrt(lambda_n)) c_n."""
    mult = profile(f.basis.frequencies / 2.0**m)
    return f.with_coeffs(f.coeffs * mult)


def min_band_index(basis: EigenBasis) -> int:
    """Smallest J_max with 2^J_max >= (10/11) max sqrt(lambda)."""
    top = basis.frequencies.max() * (PLATEAU / SUPPORT)
    return max(0, int(np.ceil(np.log2(top))))


def lp_decompose(f: SpectralField, J_max: int | None = None) -> list[SpectralField]:
    """[S_0 f, Delta_0 f, ..., Delta_{J_max} f]; the pieces sum to f."""
    need = min_band_index(f.basis)
    if J_max is None:
        J_max = need
    if J_max < need:
        raise ValueError(f"J_max={J_max} does not cover the spectrum (need >= {need})")
    xi = f.basis.frequencies
    pieces = [f.with_coeffs(f.coeffs * cutoff(xi))]
    for j in range(J_max + 1):
        pieces.append(f.with_coeffs(f.coeffs * band_profile(j)(xi)))
    return pieces


def _band_norms(f: SpectralField) -> tuple[float, np.ndarray]:
    pieces = lp_decompose(f)
    return pieces[0].norm(), np.array([p.norm() for p in pieces[1:]])


def _lq(seq: np.ndarray, q: float) -> float:
    if np.isinf(q):
        return float(np.max(seq)) if seq.size else 0.0
    return float(np.sum(seq**q) ** (1.0 / q))


def besov_norm(f: SpectralField, s: float, q: float = 2) -> float:
    """B^{s,q}_2 norm: l^q over (S_0 f, 2^{js} Delta_j f) with S_0 as the j = -1 entry."""
    low, bands = _band_norms(f)
    j = np.arange(bands.size)
    return _lq(np.concatenate([[low], 2.0 ** (j * s) * bands]), q)


def log_besov_norm(f: SpectralField, s: float = 1.0, q: float = 1) -> float:
    """B^{s,q}_{2,l} norm with weights 2^{js} log^{1/2} j; j in {0, 1} use log 2."""
    low, bands = _band_norms(f)
    j = np.arange(bands.size)
    lw = 2.0 ** (j * s) * np.sqrt(np.log(np.maximum(j, 2)))
    return _lq(np.concatenate([[low], lw * bands]), q)


def besov_weight(xi: np.ndarray, s: float) -> np.ndarray:
    """Per-mode weight w with besov_norm(f, s, 2)^2 = sum w(xi_n) |c_n|^2."""
    xi = np.asarray(xi, dtype=float)
    J = max(0, int(np.ceil(np.log2(max(xi.max(), 1.0)))) + 1)
    w = cutoff(xi) ** 2
    for j in range(J + 1):
        w = w + 4.0 ** (j * s) * band_profile(j)(xi) ** 2
    return w


def sobolev_norm(f: SpectralField, s: float) -> float:
    """||(-Delta)^{s/2} f||_2, the Dirichlet-Laplacian H^s_0 norm."""
    return float(np.sqrt(np.sum(f.basis.eigenvalues**s * np.abs(f.coeffs) ** 2)))


def q_operator(f: SpectralField, l: int) -> list[PhysicalField]:
    """Q_l f = 2^-l grad exp(2^-2l Delta) f, sampled on the grid."""
    lam = f.basis.eigenvalues
    g = f.with_coeffs(f.coeffs * 2.0**-l * np.exp(-(4.0**-l) * lam))
    return gradient(g)


def d_operator(f: SpectralField, j: int) -> SpectralField:
    """D_j with 2^{-2j} Delta D_j u = u for u spectrally supported in band j."""
    def profile(x):
        x = np.asarray(x, dtype=float)
        return -fat_band_profile(x) / np.maximum(x, 1e-300) ** 2
    return apply_multiplier(f, profile, j)


def random_band_field(basis: EigenBasis, j: int, rng: np.random.Generator) -> SpectralField:
    """Unit-L2 field with iid complex Gaussian coefficients on the members of band j."""
    band = dyadic_band(basis, j)
    if band.members.size == 0:
        raise ValueError(f"band {j} has no modes in {basis!r}")
    c = np.zeros(basis.size, dtype=complex)
    k = band.members.size
    c[band.members] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    c /= np.linalg.norm(c)
    return SpectralField(basis, c)
