import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conelp import geometry as geo
from conelp.jordan import ConeDomainError, lightcone, parse_cone
from conelp.lattice import (Lattice, ShellRegion, dual_lattice, generate_lattice,
                            lightcone_grid, sample_region, shell_box, sphere_net,
                            verify_lattice, verify_nesting, whitney_assign,
                            whitney_cell_contains)


@pytest.fixture(scope="module", params=["lightcone3", "sym2"])
def lattice(request):
    return generate_lattice(parse_cone(request.param), ShellRegion(1.0, 8.0), seed=0)


def test_shell_region_validation():
    with pytest.raises(ConeDomainError):
        ShellRegion(2.0, 1.0)
    with pytest.raises(ConeDomainError):
        ShellRegion(0.0, 1.0)


def test_sample_region_inside_shell_and_box(cone):
    region = ShellRegion(0.5, 4.0)
    pts = sample_region(cone, region, 2000, rng=np.random.default_rng(0))
    assert np.all(region.contains(cone, pts))
    center, half = shell_box(cone, region)
    assert np.all(np.abs(pts - center) <= half + 1e-12)


def test_generated_lattice_passes_verification(lattice):
    rep = verify_lattice(lattice, samples=20_000, seed=3)
    assert rep.separation_ok and rep.min_distance >= 2 * lattice.delta
    assert rep.covering_failures == 0
    assert rep.ok
    assert 1 <= rep.overlap <= len(lattice)
    assert np.isfinite(rep.gamma)


def test_lattice_json_round_trip(lattice, tmp_path):
    path = tmp_path / "lat.json"
    lattice.save(path)
    back = Lattice.load(path)
    assert np.array_equal(back.points, lattice.points)
    assert (back.delta, back.R, back.region) == (lattice.delta, lattice.R, lattice.region)


def test_lattice_generation_is_deterministic():
    c = lightcone(3)
    a = generate_lattice(c, ShellRegion(1.0, 4.0), seed=5)
    b = generate_lattice(c, ShellRegion(1.0, 4.0), seed=5)
    assert np.array_equal(a.points, b.points)


def test_dual_lattice_pairing(lattice):
    dual = dual_lattice(lattice)
    cone = lattice.cone
    # (xi | xi^{-1}) = r exactly for every centre
    assert np.allclose(cone.inner(lattice.points, dual.points), cone.rank, rtol=1e-12)
    rng = np.random.default_rng(0)
    bounds = []
    for xi, eta in zip(lattice.points, dual.points):
        a = geo.sample_ball(cone, xi, lattice.radius, rng, 300)
        b = geo.sample_ball(cone, eta, dual.radius, rng, 300)
        pair = cone.inner(a, b)
        bounds.append((pair.min(), pair.max()))
    lo = min(b[0] for b in bounds)
    hi = max(b[1] for b in bounds)
    # a common interval for every j, since the pairing is invariant
    assert lo > 0 and hi / lo < 1e3
    theory = np.exp(2 * lattice.radius) * cone.rank
    assert hi <= theory and lo >= cone.rank / theory


def test_dual_lattice_is_a_lattice(lattice):
    dual = dual_lattice(lattice)
    rep = verify_lattice(dual, samples=20_000, seed=4)
    assert rep.separation_ok and rep.covering_failures == 0


def test_whitney_cells_tile_covered_region(lattice):
    cone = lattice.cone
    pts = sample_region(cone, lattice.region, 5000, rng=np.random.default_rng(7))
    inside = np.stack([geo.ball_contains(cone, c, lattice.radius, pts) for c in lattice.points],
                      axis=1)
    # membership of E_j = B_j minus earlier balls, computed independently
    earlier = np.cumsum(inside, axis=1) - inside
    cells = inside & (earlier == 0)
    covered = inside.any(axis=1)
    assert np.all(cells[covered].sum(axis=1) == 1)
    j = whitney_assign(lattice, pts)
    assert np.array_equal(j[covered], cells[covered].argmax(axis=1))
    assert np.all(j[~covered] == -1)


@settings(max_examples=10)
@given(dim=st.integers(2, 3), sep=st.floats(0.3, 1.0))
def test_sphere_net_is_separated_and_maximal(dim, sep):
    w = sphere_net(dim, sep, seed=0)
    assert np.allclose(np.linalg.norm(w, axis=1), 1.0)
    if len(w) > 1:
        d = np.linalg.norm(w[:, None] - w[None], axis=-1)
        np.fill_diagonal(d, np.inf)
        assert d.min() >= sep - 1e-12
    probe = np.random.default_rng(1).standard_normal((2000, dim))
    probe /= np.linalg.norm(probe, axis=1, keepdims=True)
    dist = np.linalg.norm(probe[:, None] - w[None], axis=-1).min(axis=1)
    assert dist.max() < sep * 1.05


def test_lightcone_grid_points_have_exact_determinant():
    g = lightcone_grid(3, ell_range=(-1, 2), j_max=4)
    c = lightcone(3)
    for ell, j, k, xi in g.points():
        assert c.is_interior(xi)
        assert c.det(xi) == pytest.approx(2.0 ** (2 * ell - 2 * j), rel=1e-13)
        assert whitney_cell_contains(g, ell, j, k, xi)
    with pytest.raises(IndexError):
        g.point(0, 5, 0)


def test_lightcone_grid_nesting_report():
    g = lightcone_grid(3, ell_range=(0, 2), j_max=3)
    rep = verify_nesting(g, samples=5000, seed=1)
    assert 0 < rep.eta1 < rep.eta2 < np.inf
    assert rep.scale_spread < 0.05
    assert 0.5 <= rep.j_ratio <= 2.0
