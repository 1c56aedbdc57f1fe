import numpy as np
import pytest
from hypothesis import given, strategies as st

from conelp import geometry as geo
from conelp.jordan import parse_cone

seeds = st.integers(0, 2**32 - 1)


def group_elements(cone, rng):
    out = [geo.GroupElement(cone.quad_matrix(cone.random_interior(rng)), cone),
           geo.rotation(cone, rng), geo.random_group_element(cone, rng)]
    if cone.kind == "lightcone":
        out.append(geo.boost(cone, rng.uniform(-2, 2), axis=1 + int(rng.integers(cone.dim - 1))))
    return out


def test_distance_invariance_thousand_pairs(cone, rng):
    x = cone.random_interior(rng, 1000)
    y = cone.random_interior(rng, 1000)
    d = geo.distance(cone, x, y)
    for g in group_elements(cone, rng):
        dg = geo.distance(cone, g.apply(x), g.apply(y))
        assert np.max(np.abs(dg - d)) < 1e-8


def test_inversion_is_isometry(cone, rng):
    x = cone.random_interior(rng, 1000)
    y = cone.random_interior(rng, 1000)
    d = geo.distance(cone, x, y)
    di = geo.distance(cone, cone.inverse(x), cone.inverse(y))
    assert np.max(np.abs(di - d)) < 1e-8


@given(seed=seeds, name=st.sampled_from(["lightcone3", "sym2", "sym3"]))
def test_distance_is_a_metric(seed, name):
    cone = parse_cone(name)
    rng = np.random.default_rng(seed)
    x, y, z = cone.random_interior(rng, 3)
    dxy, dyz, dxz = (geo.distance(cone, a, b) for a, b in ((x, y), (y, z), (x, z)))
    assert geo.distance(cone, x, x) == pytest.approx(0.0, abs=1e-7)
    assert dxy == pytest.approx(geo.distance(cone, y, x), rel=1e-10, abs=1e-12)
    assert dxz <= dxy + dyz + 1e-9


@given(seed=seeds, t=st.floats(0.01, 100.0))
def test_dilation_distance_closed_form(seed, t):
    cone = parse_cone("lightcone3")
    y = cone.random_interior(np.random.default_rng(seed))
    # d(y, t y) = sqrt(r) |log t|
    assert geo.distance(cone, y, t * y) == pytest.approx(np.sqrt(cone.rank) * abs(np.log(t)),
                                                         rel=1e-9, abs=1e-9)


def test_transporter_maps_identity(cone, rng):
    xi = cone.random_interior(rng)
    g = geo.transporter(cone, xi)
    assert np.allclose(g.apply(cone.identity), xi, rtol=1e-10)
    assert g.determinant_factor == pytest.approx(cone.det(xi), rel=1e-10)


def test_sample_ball_stays_in_ball(cone, rng):
    c = cone.random_interior(rng)
    pts = geo.sample_ball(cone, c, 0.75, rng, 500)
    assert np.all(geo.distance(cone, c, pts) < 0.75 + 1e-9)
    assert np.all(geo.ball_contains(cone, c, 0.75 + 1e-9, pts))


def test_minor_ratio_bound_finite(cone, rng):
    gamma = geo.minor_ratio_bound(cone, 1.0, rng, samples=2000)
    assert np.isfinite(gamma) and gamma >= 1.0


def test_pairing_ratio_bound_finite(cone, rng):
    gamma = geo.pairing_ratio_bound(cone, 1.0, rng, samples=2000)
    assert np.isfinite(gamma) and gamma >= 1.0


@given(seed=seeds, name=st.sampled_from(["lightcone3", "lightcone5", "sym2", "sym3", "halfline"]))
def test_operator_norm_sandwich(seed, name):
    cone = parse_cone(name)
    g = geo.random_group_element(cone, np.random.default_rng(seed))
    op = geo.operator_norm(g)
    ge = cone.norm(g.apply(cone.identity))
    assert op <= ge * (1 + 1e-8)
    assert ge <= np.sqrt(cone.rank) * op * (1 + 1e-8)


def test_ball_volume_independent_of_centre(cone, rng):
    vols = [geo.ball_volume_mc(cone, cone.random_interior(rng), 0.5, samples=200_000, seed=i)
            for i in range(4)]
    for a in vols:
        for b in vols:
            assert abs(a[0] - b[0]) <= 3 * np.hypot(a[1], b[1])


def test_ball_volume_scales_like_power_of_radius(cone):
    v = [geo.ball_volume_mc(cone, cone.identity, d, samples=100_000)[0] for d in (0.25, 0.5)]
    # small balls are nearly Euclidean: halving the radius divides the volume by ~2^n
    assert v[1] / v[0] == pytest.approx(2.0 ** cone.dim, rel=0.25)


def test_invariant_density_is_power_of_determinant(cone, rng):
    xi = cone.random_interior(rng, 10)
    assert np.allclose(geo.invariant_measure_density(cone, xi), cone.det(xi) ** (-cone.n_over_r))
