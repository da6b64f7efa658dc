"""Dirichlet eigenbases and Littlewood-Paley bands.

Builds the cube basis, draws a random field, splits it into dyadic bands and
compares Besov and Sobolev norms.  Run: python3 demos/01_spectral_basics.py
"""

import numpy as np

from dirichlet_nls.basis import DomainSpec, boundary_energy, build_basis, synthesize
from dirichlet_nls.spectral import besov_norm, log_besov_norm, lp_decompose, random_band_field, sobolev_norm

# %% Basis on [0, pi]^3 with 16 sine modes per axis, sampled on a 32-point grid.
basis = build_basis(DomainSpec("cube", 16))
print(basis, "lowest eigenvalues:", basis.eigenvalues[:6])

# %% A field with energy in bands 1 and 3.
rng = np.random.default_rng(0)
f = random_band_field(basis, 1, rng) + random_band_field(basis, 3, rng) * 0.3
print(f"||f||_2 = {f.norm():.4f}, grid norm = {np.sqrt(synthesize(f).norm_sq()):.4f}")

# %% Littlewood-Paley pieces: S_0 f, Delta_0 f, Delta_1 f, ...
pieces = lp_decompose(f)
for name, p in zip(["S_0"] + [f"Delta_{j}" for j in range(len(pieces) - 1)], pieces):
    print(f"{name:>8s}: {p.norm():.4f}")
print("reconstruction error:", np.linalg.norm(sum(p.coeffs for p in pieces) - f.coeffs))

# %% Norms.  The log-Besov norm dominates H^1 up to the log weight.
print(f"H^1 {sobolev_norm(f, 1):.3f}  B^1_2,2 {besov_norm(f, 1, 2):.3f}  "
      f"B^1_2,1,log {log_besov_norm(f):.3f}")
print(f"boundary flux int |d_n f|^2 = {boundary_energy(f):.3f}")
