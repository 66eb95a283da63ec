"""How close are the exact central moments to Gaussian ones as d grows?

For a pure state the error bound applies at every order; for mixed states
only orders up to the validity limit carry a bound.
"""

import numpy as np

from haarenergy import HamiltonianSpectrum, StateSpectrum, moment_report
from haarenergy.bounds import validity_p_max

rng = np.random.default_rng(0)

for d in (9, 16, 25, 36):
    h = HamiltonianSpectrum(rng.normal(size=d))
    print(f"\nd = {d}, pure state (validity limit for mixed states: p <= {validity_p_max(d)})")
    rep = moment_report(StateSpectrum.pure(d), h, p_max=6)
    print(" p        exact     gaussian     |diff|        bound")
    for r in rep.rows[1:]:
        print(f"{r.p:2d} {r.exact:12.4e} {r.gaussian:12.4e} {r.abs_diff:10.2e} {r.bound_rhs:12.4e}")

# A mixed state: the bound switches to the general form and stops at the limit.
d = 36
rho = StateSpectrum(rng.dirichlet(np.ones(d)))
h = HamiltonianSpectrum(rng.normal(size=d))
rep = moment_report(rho, h, p_max=6)
print(f"\nd = {d}, Dirichlet state")
for r in rep.rows[1:]:
    bound = "n/a" if r.bound_rhs is None else f"{r.bound_rhs:.4e}"
    print(f"{r.p:2d} exact {r.exact:.4e}  gaussian {r.gaussian:.4e}  bound {bound}")
