import math
import xml.etree.ElementTree as ET
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conelp import bergman as B
from conelp import lp
from conelp.jordan import ConeDomainError, lightcone, sym_cone

INF = math.inf
nus = st.fractions(min_value=Fraction(1, 2) + Fraction(1, 100), max_value=6)
ps = st.fractions(min_value=1, max_value=20)
qs = st.fractions(min_value=1, max_value=60)


def test_critical_index_examples():
    assert B.critical_indices(3, 2, Fraction(3, 2), 2).to_dict() == \
        {"q_nu": 4, "q_nu_p": 8, "q_tilde": "inf"}
    idx = B.critical_indices(3, 2, 2, 4)
    assert (idx.q_nu, idx.q_nu_p, idx.q_tilde) == (5, Fraction(20, 3), 20)
    assert B.critical_indices(1, 1, 1, 3) == B.CriticalIndices(INF, INF, INF)


def test_dual_exponent():
    assert B.dual_exponent(1) == INF
    assert B.dual_exponent(INF) == 1
    assert B.dual_exponent(2) == 2
    assert B.dual_exponent(Fraction(3, 2)) == 3
    with pytest.raises(ValueError):
        B.dual_exponent(Fraction(1, 2))


def test_weight_below_threshold_rejected():
    with pytest.raises(ConeDomainError):
        B.critical_indices(3, 2, Fraction(1, 2), 2)


@given(nu=nus, p=ps)
def test_q_equal_two_always_bounded(nu, p):
    assert B.classify_region(3, 2, nu, p, 2).verdict == "Bounded"


@given(nu=nus, p=ps, q=qs)
def test_verdict_depends_only_on_ratio(nu, p, q):
    base = B.classify_region(3, 2, nu, p, q)
    for k in (2, 3):
        assert B.classify_region(3 * k, 2 * k, nu, p, q) == base


@given(nu=nus, p=ps, q=qs, appendix=st.booleans())
def test_reason_tags_are_stable(nu, p, q, appendix):
    v = B.classify_region(3, 2, nu, p, q, appendix)
    assert v.reason in B.REASONS
    assert (v.verdict == "Open") == (v.reason == "open")
    assert v.appendix_extension_used == (v.reason == "bilinear-extension")


@settings(max_examples=40)
@given(nu=nus, p=ps, appendix=st.booleans())
def test_monotone_in_q(nu, p, appendix):
    grid = [Fraction(k, 8) for k in range(8, 8 * 40)]
    verdicts = [B.classify_region(3, 2, nu, p, q, appendix).verdict for q in grid]
    first_bounded = verdicts.index("Bounded")
    above = verdicts[first_bounded:]
    if "Unbounded" in above:
        k = above.index("Unbounded")
        assert all(v == "Unbounded" for v in above[k:])
    below = verdicts[:first_bounded][::-1]
    if "Unbounded" in below:
        k = below.index("Unbounded")
        assert all(v == "Unbounded" for v in below[k:])


def test_gap_interval_endpoints():
    nu = Fraction(2)
    q_nu = B.critical_indices(3, 2, nu, 2).q_nu
    lo, hi = 1 + q_nu, min(2 * q_nu, q_nu + 3)
    eps = Fraction(1, 10**6)
    assert B.classify_region(3, 2, nu, lo - eps, lo - eps).verdict == "Bounded"
    assert B.classify_region(3, 2, nu, lo, lo).verdict == "Open"
    assert B.classify_region(3, 2, nu, hi, hi).verdict == "Unbounded"


def test_q_tilde_counts_as_unbounded():
    v = B.classify_region(3, 2, 2, 4, 20)
    assert v.verdict == "Unbounded" and v.reason == "kernel-not-in-dual"


def test_appendix_extension():
    nu = Fraction(2)
    q_nu = B.critical_indices(3, 2, nu, 4).q_nu
    q = Fraction(27, 4)  # beyond q_{nu,4} = 20/3, below (4/3 + 1/24) q_nu = 55/8
    assert q < (Fraction(4, 3) + Fraction(1, 24)) * q_nu
    assert B.classify_region(3, 2, nu, 4, q).verdict == "Open"
    v = B.classify_region(3, 2, nu, 4, q, use_appendix=True)
    assert v.verdict == "Bounded" and v.appendix_extension_used


def test_region_outputs():
    rows = B.region_rows(3, 2, Fraction(3, 2), steps=12)
    assert len(rows) == 12 * 13
    text = B.region_csv(rows)
    assert text.splitlines()[0] == "inv_q,inv_p,verdict,reason"
    root = ET.fromstring(B.region_svg(3, 2, Fraction(3, 2), steps=12))
    assert root.tag.endswith("svg")


def test_kernel_membership_matches_oracle():
    for q, expected in ((10, True), (25, False)):
        assert B.kernel_membership(3, 2, 2, 4, q) is expected
        out = B.kernel_membership_oracle(3, 2, 2, 4, q)
        assert out["oracle"] is expected and out["agrees"]


PURE = [(2.0, [0.5, 0, 0], [0.5, 0, 0]), (1.0, [2.0, 1.0, 0.0], [1.0, 0.0, 0.0]),
        (3.0, [0.7, 0.0, 0.4], [0.6, -0.2, 0.1]), (0.75, [1.5, 0.5, -0.5], [0.5, 0.0, 0.1]),
        (1.5, [1.0, 0.3, 0.2], [0.5, 0.1, 0.0])]


@pytest.mark.parametrize("nu,yz,yw", PURE)
def test_kernel_pure_imaginary_lightcone(nu, yz, yw):
    c = lightcone(3)
    z, w = B.TubePoint.imaginary(c, yz), B.TubePoint.imaginary(c, yw)
    a = B.bergman_kernel(c, nu, z, w)
    b = B.bergman_kernel_quad(c, nu, z, w)
    assert abs(a - b) < 1e-5 * abs(a)


@pytest.mark.parametrize("nu,yz,yw", PURE)
def test_kernel_pure_imaginary_sym2(nu, yz, yw):
    c = sym_cone(2)
    # packed Sym2 coordinates; keep the same points positive definite
    to_sym = lambda y: [y[0] + y[1], y[0] - y[1], np.sqrt(2) * y[2]]
    z, w = B.TubePoint.imaginary(c, to_sym(yz)), B.TubePoint.imaginary(c, to_sym(yw))
    a = B.bergman_kernel(c, nu, z, w)
    b = B.bergman_kernel_quad(c, nu, z, w)
    assert abs(a - b) < 1e-5 * abs(a)


@given(seed=st.integers(0, 2**32 - 1), nu=st.floats(0.6, 4.0))
def test_kernel_hermitian_symmetry(seed, nu):
    c = lightcone(3)
    rng = np.random.default_rng(seed)
    z = B.TubePoint(rng.standard_normal(3), c.random_interior(rng), c)
    w = B.TubePoint(rng.standard_normal(3), c.random_interior(rng), c)
    a = B.bergman_kernel(c, nu, z, w)
    b = B.bergman_kernel(c, nu, w, z)
    assert abs(a - np.conj(b)) <= 1e-10 * abs(a)


@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.1, 10.0))
def test_kernel_homogeneity(seed, t):
    c = lightcone(3)
    nu = 1.5
    rng = np.random.default_rng(seed)
    z = B.TubePoint(rng.standard_normal(3), c.random_interior(rng), c)
    w = B.TubePoint(rng.standard_normal(3), c.random_interior(rng), c)
    zt = B.TubePoint(t * z.x, t * z.y, c)
    wt = B.TubePoint(t * w.x, t * w.y, c)
    scale = t ** (-c.rank * (nu + c.n_over_r))
    assert B.bergman_kernel(c, nu, zt, wt) == pytest.approx(scale * B.bergman_kernel(c, nu, z, w),
                                                            rel=1e-10)


@pytest.fixture(scope="module")
def spectrum():
    grid = lp.make_grid(lightcone(3), 4.0, 32)
    return lp.gaussian_spectrum_field(grid, [2.0, 0.0, 0.0], 0.1).to_frequency()


def test_fourier_laplace_slice_matches_pointwise(spectrum):
    c = spectrum.cone
    y = np.array([0.5, 0.1, 0.0])
    sl = B.fourier_laplace_slice(spectrum, y)
    pts = sl.points().reshape(-1, 3)
    vals = sl.samples.ravel()
    for i in (0, 1000, 20000):
        direct = B.fourier_laplace(spectrum, B.TubePoint(pts[i], y, c))
        assert abs(direct - vals[i]) <= 1e-10 * np.abs(vals).max()


def test_fourier_laplace_is_holomorphic(spectrum):
    c = spectrum.cone
    z = B.TubePoint([0.1, 0.2, -0.1], [1.0, 0.2, 0.1], c)
    assert B.cauchy_riemann_residual(spectrum, z) < 1e-6


def test_decay_along_ray(spectrum):
    out = B.decay_scan(spectrum, [1.0, 2.0, 4.0])
    assert out["abs_F"][0] > out["abs_F"][1] > out["abs_F"][2]


def test_fourier_laplace_rejects_boundary_spectrum():
    grid = lp.make_grid(lightcone(3), 4.0, 16)
    bad = lp.gaussian_spectrum_field(grid, [1.0, 1.0, 0.0], 0.3).to_frequency()
    with pytest.raises(ConeDomainError):
        B.fourier_laplace(bad, B.TubePoint.imaginary(lightcone(3), [1.0, 0.0, 0.0]))


def test_mixed_norm_weights(spectrum):
    ys = [np.array([1.0, 0, 0]), np.array([2.0, 0, 0])]
    slices = [B.fourier_laplace_slice(spectrum, y) for y in ys]
    m = B.mixed_norm(slices, ys, 0.5, 2.0, 2.0)
    direct = math.sqrt(sum(lightcone(3).det(y) ** 0.5 * lp.lp_norm(s, 2) ** 2
                           for s, y in zip(slices, ys)))
    assert m == pytest.approx(direct, rel=1e-12)
    with pytest.raises(ValueError):
        B.mixed_norm(slices[:1], ys, 0.5, 2.0, 2.0)


def test_counterexample_witness_and_negative_control():
    rep = B.counterexample_witness(n=3, nu=1.5, p=2.0)
    assert rep.verdicts == ("Diverges", "Converges")
    assert rep.q == pytest.approx(8.0)
    flip = B.counterexample_witness(n=3, nu=1.5, p=2.0, log_exponent=1.0)
    assert flip.verdicts[0] == "Converges"
