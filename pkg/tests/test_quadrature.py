import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conelp.jordan import ConeDomainError, lightcone, parse_cone
from conelp.lattice import ShellRegion, generate_lattice
from conelp.quadrature import (QuadratureSpec, discretization_bounds, divergence_probe,
                               gamma_omega, gamma_omega_quad, gamma_threshold, i_alpha,
                               laplace_power, laplace_power_quad)

cheap = st.sampled_from(["lightcone3", "sym2", "halfline"])


def test_gamma_half_line_is_classical_gamma():
    c = parse_cone("halfline")
    for s in (0.5, 1.0, 2.5, 4.0, 7.0):
        assert gamma_omega(c, s) == pytest.approx(math.gamma(s), rel=1e-13)
        assert gamma_omega_quad(c, s).value == pytest.approx(math.gamma(s), rel=1e-6)


def test_gamma_lightcone5_one_case():
    c = parse_cone("lightcone5")
    s = (2.0, 2.5)
    assert gamma_omega_quad(c, s).value == pytest.approx(gamma_omega(c, s), rel=1e-6)


@given(name=cheap, data=st.data())
def test_gamma_identity_random_s(name, data):
    cone = parse_cone(name)
    s = gamma_threshold(cone) + np.array(
        [data.draw(st.floats(0.5, 4.0)) for _ in range(cone.rank)])
    quad = gamma_omega_quad(cone, s).value
    assert quad == pytest.approx(gamma_omega(cone, s), rel=1e-6)


@given(name=cheap, seed=st.integers(0, 2**32 - 1))
def test_laplace_transform_random(name, seed):
    cone = parse_cone(name)
    rng = np.random.default_rng(seed)
    y = cone.random_interior(rng, spread=0.5)
    s = gamma_threshold(cone) + rng.uniform(0.5, 2.5, cone.rank)
    quad = laplace_power_quad(cone, y, s).value
    assert quad == pytest.approx(laplace_power(cone, y, s), rel=1e-5)


def test_laplace_at_identity_is_gamma(cone):
    s = gamma_threshold(cone) + 1.5
    assert laplace_power(cone, cone.identity, s) == pytest.approx(gamma_omega(cone, s))


def test_gamma_domain_error():
    with pytest.raises(ConeDomainError):
        gamma_omega(lightcone(3), (1.0, 0.4))


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(scheme="monte-carlo")
    with pytest.raises(ValueError):
        QuadratureSpec(nodes=(4, 4))
    with pytest.raises(ValueError):
        QuadratureSpec(truncation=(1.0, -1.0))
    assert QuadratureSpec().node_counts(3) == (44, 8)


def test_polar_scheme_on_lightcone():
    c = lightcone(3)
    res = gamma_omega_quad(c, (2.0, 2.0), QuadratureSpec(scheme="polar"))
    assert res.value == pytest.approx(gamma_omega(c, (2.0, 2.0)), rel=1e-6)


@settings(max_examples=8)
@given(margin=st.floats(0.25, 1.0))
def test_log_lemma_threshold(margin):
    assert divergence_probe("log_lemma", {"alpha": 1 + margin}).converges
    assert not divergence_probe("log_lemma", {"alpha": 1 - margin}).converges


@settings(max_examples=6)
@given(margin=st.floats(0.25, 1.0), beta=st.floats(0.0, 1.0))
def test_two_factor_threshold(margin, beta):
    # convergence iff alpha - beta > 2n/r - 1 = 2 on the light cone
    up = divergence_probe("log2_lemma", {"alpha": 2 + beta + margin, "beta": beta})
    down = divergence_probe("log2_lemma", {"alpha": 2 + beta - margin, "beta": beta})
    assert up.converges and not down.converges


def test_critical_line_log_power():
    assert divergence_probe("log2_lemma", {"alpha": 2.0, "delta": 1.25}).converges
    assert not divergence_probe("log2_lemma", {"alpha": 2.0, "delta": 0.75}).converges


def test_i_alpha_probe_threshold():
    assert divergence_probe("i_alpha", {"alpha": 2.25, "n": 3}).converges
    assert not divergence_probe("i_alpha", {"alpha": 1.75, "n": 3}).converges


def test_i_alpha_below_threshold_raises():
    with pytest.raises(ConeDomainError):
        i_alpha(lightcone(3), 2.0)


@settings(max_examples=6)
@given(seed=st.integers(0, 2**32 - 1))
def test_i_alpha_depends_only_on_determinant(seed):
    c = lightcone(3)
    y = c.random_interior(np.random.default_rng(seed), spread=0.4)
    base = i_alpha(c, 3.0, panel_scale=3.0)
    assert i_alpha(c, 3.0, y) == pytest.approx(base * c.det(y) ** (1.5 - 3.0), rel=1e-6)


def test_probe_report_is_serialisable():
    d = divergence_probe("log_lemma", {"alpha": 0.5}).to_dict()
    assert d["verdict"] == "Diverges" and d["family"] == "log_lemma"
    assert len(d["log_values"]) == len(d["truncations"])


def test_discretization_bounds_sandwich():
    c = lightcone(3)
    lat = generate_lattice(c, ShellRegion(1.0, 4.0), seed=0)
    out = discretization_bounds(c, lat, (1.0, 1.0), 0.3 * c.identity, samples=50_000)
    assert out["lower"] <= out["middle"] <= out["upper"]
    assert np.isfinite(out["C"]) and out["gamma"] >= 1
