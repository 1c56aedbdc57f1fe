import numpy as np
import pytest
from hypothesis import given, strategies as st

from conelp.jordan import ConeDomainError, half_line, lightcone, parse_cone, sym_cone
from conelp import geometry as geo

seeds = st.integers(0, 2**32 - 1)
cone_names = st.sampled_from(["lightcone3", "lightcone5", "sym2", "sym3", "halfline"])


def frame_idempotents(cone):
    """Frame ``c_1, ..., c_r`` in coordinates."""
    if cone.kind == "lightcone":
        c1 = np.zeros(cone.dim)
        c1[:2] = [0.5, -0.5]
        c2 = np.zeros(cone.dim)
        c2[:2] = [0.5, 0.5]
        return [c1, c2]
    out = []
    for k in range(cone.size):
        M = np.zeros((cone.size, cone.size))
        M[k, k] = 1.0
        out.append(cone.from_matrix(M))
    return out


def test_parse_cone_names():
    assert parse_cone("lightcone3").dim == 3
    assert parse_cone("sym3").dim == 6
    assert parse_cone("halfline").rank == 1
    with pytest.raises(ValueError):
        parse_cone("cube4")


def test_identity_and_rank(cone):
    e = cone.identity
    assert cone.det(e) == pytest.approx(1.0)
    assert np.allclose(cone.minors(e), 1.0)
    assert cone.trace(e) == pytest.approx(cone.rank)
    assert np.allclose(cone.product(e, e), e)


def test_sylvester_criterion_agrees_with_spectrum(cone, rng):
    # points near the identity so both sides of the boundary occur
    x = cone.identity + 0.8 * rng.standard_normal((10_000, cone.dim))
    a = cone.is_interior(x)
    b = cone.is_interior_sylvester(x)
    assert 0 < a.sum() < len(a)
    assert np.array_equal(a, b)


@given(seed=seeds, name=cone_names)
def test_minor_homogeneity_under_frame_diagonal(seed, name):
    cone = parse_cone(name)
    rng = np.random.default_rng(seed)
    a_coef = np.exp(rng.uniform(-1, 1, cone.rank))
    a = sum(t * c for t, c in zip(a_coef, frame_idempotents(cone)))
    x = cone.random_interior(rng)
    lhs = cone.minors(cone.quad(a, x))
    rhs = np.cumprod(a_coef) ** 2 * cone.minors(x)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=0)


@given(seed=seeds, name=cone_names)
def test_determinant_under_automorphisms(seed, name):
    cone = parse_cone(name)
    rng = np.random.default_rng(seed)
    y = cone.random_interior(rng)
    a = cone.random_interior(rng)
    for g in (geo.GroupElement(cone.quad_matrix(a), cone), geo.rotation(cone, rng)):
        ge = g.apply(cone.identity)
        assert cone.det(g.apply(y)) == pytest.approx(cone.det(ge) * cone.det(y), rel=1e-10)


@given(seed=seeds, name=cone_names)
def test_trace_form(seed, name):
    cone = parse_cone(name)
    rng = np.random.default_rng(seed)
    x, y = cone.random_vector(rng, 2)
    lhs = cone.inner(x, y)
    rhs = cone.inner(cone.product(x, y), cone.identity)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), cone.norm(x) * cone.norm(y))


@given(seed=seeds, name=cone_names)
def test_inverse_power_against_rotated_minors(seed, name):
    cone = parse_cone(name)
    rng = np.random.default_rng(seed)
    y = cone.random_interior(rng)
    s = rng.uniform(-2, 2, cone.rank)
    lhs = cone.generalized_power(cone.inverse(y), s)
    rhs = 1.0 / cone.generalized_power_rotated(y, s[::-1])
    assert lhs == pytest.approx(rhs, rel=1e-9)


@given(seed=seeds, name=cone_names)
def test_spectral_round_trip_and_powers(seed, name):
    cone = parse_cone(name)
    rng = np.random.default_rng(seed)
    x = cone.random_interior(rng)
    lam, frame = cone.spectral(x)
    assert np.allclose(cone.from_spectral(lam, frame), x, rtol=1e-10, atol=1e-12)
    assert np.all(np.diff(lam) >= 0)
    assert np.allclose(cone.product(x, cone.inverse(x)), cone.identity, atol=1e-9)
    half = cone.power(x, 0.5)
    assert np.allclose(cone.product(half, half), x, rtol=1e-9, atol=1e-12)
    assert cone.det(x) == pytest.approx(np.prod(lam), rel=1e-10)


def test_quadratic_representation_maps_identity_to_square(cone, rng):
    a = cone.random_interior(rng)
    assert np.allclose(cone.quad(a, cone.identity), cone.product(a, a), rtol=1e-10)


def test_domain_errors():
    c = lightcone(3)
    with pytest.raises(ConeDomainError):
        c.check_interior([1.0, 1.0, 0.5])
    with pytest.raises(ConeDomainError):
        c.inverse([0.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        c.generalized_power(c.identity, [1.0, 2.0, 3.0])


def test_constructors_agree_with_names():
    assert lightcone(4).name == "lightcone4"
    assert sym_cone(2).name == "sym2"
    assert half_line().rank == 1
