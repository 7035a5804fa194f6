"""
Radius of convergence and the n^(-3/2) return law
=================================================

Nearest-neighbour walk on Z2*Z2*Z2, then the same pipeline on F2.
"""
import math

import numpy as np

from treewalk import walks
from treewalk.curve import find_R, leading_constant, second_derivative, tangent_at_R
from treewalk.group_tree import IDENTITY
from treewalk.oracle import dp_isotropic, fit_asymptotics
from treewalk.xi_psi import build_psi

mu = walks.nn3()
system = build_psi(mu)
print(f"{len(system)} orbits")

# %%
# R is where the Perron root of the Jacobian reaches 1/R.
rad = find_R(system)
print("R      =", rad.R, " closed form", 3 / (2 * math.sqrt(2)))
print("R*rho  =", rad.R * rad.rho)
print("v_R    =", np.round(rad.point.J, 12))

# %%
# Second derivative of the curve along the tangent, then the constant C.
tan = tangent_at_R(system, rad)
r2 = second_derivative(system, rad, tan)
lc = leading_constant(system, IDENTITY, IDENTITY, rad, tan, r2)
print("r''    =", r2)
print("C      =", lc.C)

# %%
# Compare against exact return probabilities out to n = 10000.
p = dp_isotropic(mu, 10000)
fit = fit_asymptotics(p, d=2)
print(f"fit: R={fit.R:.7f} exponent={fit.exponent:.4f} C(pinned)={fit.C_pinned:.6f}")
for n in (10, 100, 1000, 10000):
    pred = lc.C * rad.R ** (-n) * n ** -1.5
    print(f"n={n:>5}  p_n={p[n]:.6e}  predicted={pred:.6e}  ratio={p[n] / pred:.5f}")

# %%
mu = walks.f2()
rad = find_R(build_psi(mu))
print("F2: R =", rad.R, " closed form", 2 / math.sqrt(3))
