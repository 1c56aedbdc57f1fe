"""Cone gamma function: product formula against direct cubature.

Run with ``python3 demos/gamma_check.py``.  Each row integrates
exp(-tr xi) times a generalized power over the cone and compares with the
closed form.
"""
import time

from conelp.jordan import half_line, lightcone, sym_cone
from conelp.quadrature import gamma_omega, gamma_omega_quad, laplace_power, laplace_power_quad

cases = [
    (half_line(), [(2.5,)]),
    (lightcone(3), [(2.0, 2.0), (1.5, 0.75)]),
    (lightcone(4), [(3.0, 2.0)]),
    (sym_cone(2), [(1.0, 1.0), (0.5, 1.5)]),
]

print(f"{'cone':<11} {'s':<14} {'closed form':>14} {'cubature':>14} {'rel err':>9} {'sec':>5}")
for cone, ss in cases:
    for s in ss:
        t0 = time.perf_counter()
        exact = gamma_omega(cone, s)
        quad = gamma_omega_quad(cone, s).value
        dt = time.perf_counter() - t0
        print(f"{cone.name:<11} {str(s):<14} {exact:14.10f} {quad:14.10f} "
              f"{abs(quad - exact) / exact:9.1e} {dt:5.1f}")

# the same integral with a general weight point y is Gamma_Omega(s) Delta_s(y^-1)
cone = lightcone(3)
y = [1.3, 0.4, -0.2]
exact = laplace_power(cone, y, (2.0, 1.5))
quad = laplace_power_quad(cone, y, (2.0, 1.5)).value
print(f"\nLaplace transform at y={y}: closed form {exact:.12f}, cubature {quad:.12f}")

# below the admissibility threshold the closed form refuses
try:
    gamma_omega(cone, (1.0, 0.5))
except ValueError as exc:
    print("s = (1, 0.5) on the 3-dimensional light cone:", exc)
