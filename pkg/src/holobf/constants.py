# Frozen output of 'holobf.kernels.solve_lambda_constants'.
# 'holobf verify' re-solves the constants and fails if they drift.
"""Solved constants of the propagator relation E_T = lambda G_T.

With the conventions of 'holobf.kernels' (volume form dzbar^dz^dt, gauge
fix Q* = 4 i_dzbar d/dz + i_dt d/dt), the constant-coefficient operator

    lambda = c1 dzbar d/dt + c2 dt d/dz

maps the Gaussian form G_T = k_T dz to the propagator integrand E_T = Q*(k_T mu)
exactly when (c1, c2) = (1, -4).
"""

import sympy

LAMBDA_C1 = sympy.Integer(1)
LAMBDA_C2 = sympy.Integer(-4)

# Weights are reported without the orientation sign of the wheel, i.e. the
# top-form coefficient in the canonical generator order is integrated as is.
SIGN_CONVENTION = "canonical-word-top-coefficient; mu_V=dzbar^dz^dt; orientation sign dropped"
