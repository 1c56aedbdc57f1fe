"""Littlewood-Paley bank on the light cone: partition, reconstruction, norms.

Builds a (1/2, 2)-lattice of the shell 1 < eigenvalues < 8 in the
3-dimensional light cone, samples the smooth partition of unity on a 64^3
frequency grid and decomposes a few band-limited fields.  Takes about
20 s on one core.
"""
import numpy as np

from conelp.jordan import lightcone
from conelp.lattice import ShellRegion, generate_lattice, shell_box, verify_lattice
from conelp.lp import (besov_seminorm, build_filter_bank, family_spec, lp_blocks,
                       make_grid, partition_error)

cone = lightcone(3)
lat = generate_lattice(cone, ShellRegion(1.0, 8.0), delta=0.5, R=2.0, seed=0)
rep = verify_lattice(lat, samples=20_000)
print(f"lattice: {len(lat)} points, min distance {rep.min_distance:.4f}, "
      f"covering failures {rep.covering_failures}, overlap {rep.overlap}")

center, half = shell_box(cone, lat.region)
grid = make_grid(cone, np.abs(center) + half, 64)
bank = build_filter_bank(lat, grid)
part = partition_error(bank)
print(f"partition of unity: max |sum psi - 1| = {max(part['grid'], part['samples']):.2e}")

for k, member in enumerate(family_spec(bank, grid, seed=0)[:4]):
    f = member.sample(grid)
    blocks = lp_blocks(f, bank)
    total = sum(b.samples for b in blocks)
    err = np.linalg.norm(total - f.samples) / np.linalg.norm(f.samples)
    active = sum(np.abs(b.samples).max() > 1e-12 * np.abs(f.samples).max() for b in blocks)
    norm = besov_seminorm(f, bank, nu=0.5, p=2.0, q=2.0).value
    print(f"field {k}: {active:3d} active blocks, reconstruction error {err:.1e}, "
          f"seminorm(nu=1/2, p=q=2) {norm:.4e}")
