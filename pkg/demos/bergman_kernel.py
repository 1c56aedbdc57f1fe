"""Weighted Bergman kernel of the light-cone tube: closed form against cubature.

The closed form is a negative power of the determinant of (z - conj w)/i;
the cubature integrates the defining Fourier-Laplace integral over the cone.
"""
import numpy as np

from conelp.bergman import TubePoint, bergman_kernel, bergman_kernel_quad
from conelp.jordan import lightcone

cone = lightcone(3)
nu = 2.0
pairs = [
    (TubePoint.imaginary(cone, [1.0, 0.0, 0.0]), TubePoint.imaginary(cone, [1.0, 0.0, 0.0])),
    (TubePoint.imaginary(cone, [2.0, 0.5, 0.0]), TubePoint.imaginary(cone, [1.0, 0.0, 0.3])),
    (TubePoint([0.3, 0.1, 0.0], [1.0, 0.0, 0.0], cone), TubePoint.imaginary(cone, [1.0, 0.2, 0.0])),
]
for z, w in pairs:
    exact = bergman_kernel(cone, nu, z, w)
    quad = bergman_kernel_quad(cone, nu, z, w)
    print(f"z={np.round(z.z, 3)}  w={np.round(w.z, 3)}")
    print(f"    closed form {exact:.10f}\n    cubature    {quad:.10f}"
          f"    rel err {abs(quad - exact) / abs(exact):.1e}")
