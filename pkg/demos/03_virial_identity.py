"""The directional interaction functional and its first two time derivatives.

I(t) = int int rho(x - y) |u(t, x)|^2 |v(t, y)|^2 with rho(z) = g(omega . z),
where g(s) = |s| smoothed on |s| < 2^-k.  Finite differences of I along the
linear flow are compared with the momentum and Hessian formulas, including
the boundary flux terms.  Run: python3 demos/03_virial_identity.py
"""

import numpy as np

from dirichlet_nls.estimates import band_basis
from dirichlet_nls.spectral import random_band_field
from dirichlet_nls.virial import (
    DirectionalWeight,
    first_derivative_check,
    interaction_functional,
    second_derivative_terms,
    virial_second_derivative_check,
)

j, k = 3, 2
basis = band_basis("cube", j)
rng = np.random.default_rng(7)
u, v = random_band_field(basis, j, rng), random_band_field(basis, k, rng)
w = DirectionalWeight((1.0, 0.0, 0.0), k)

# %% I(t) along the free flow.
for t in np.linspace(0, 0.2, 5):
    print(f"I({t:.2f}) = {interaction_functional(u, v, w, t):.6f}")

# %% dI/dt: Richardson-extrapolated finite difference vs the momentum formula.
r = first_derivative_check(u, v, w, t=0.1)
print(f"finite difference {r['fd']:.12f}, formula {r['formula']:.12f}, residual {r['residual']:.1e}")

# %% d^2I/dt^2: interior Hessian term minus the two boundary flux terms.
terms = second_derivative_terms(u, v, w, 0.1)
print({key: round(float(np.real(val)), 6) for key, val in terms.items()})
rep = virial_second_derivative_check(u, v, w, [0.1])
print("residual %.2e, convergence order %.2f" % (rep.rows[0]["residual"], rep.rows[0]["order"]))
