import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conelp import geometry as geo
from conelp import lp
from conelp.jordan import ConeDomainError, half_line, lightcone, sym_cone
from conelp.lattice import ShellRegion, generate_lattice, shell_box

FREQS = [[1.0, 0.5, 0.25], [0.75, 0.0, -0.5], [1.0, -0.25, 0.5], [0.5, 0.25, 0.0]]
AMPS = [1.0, 0.5j, -0.7, 0.3 + 0.2j]


@pytest.fixture(scope="module")
def waves():
    grid = lp.make_grid(lightcone(3), 1.0, 32)
    return lp.plane_wave_field(grid, FREQS, AMPS)


@pytest.fixture(scope="module")
def wide_bank():
    """Small grid, wide shell: plenty of centre pairs at distance >= 4."""
    c = lightcone(3)
    lat = generate_lattice(c, ShellRegion(0.5, 64.0), seed=0)
    center, half = shell_box(c, lat.region)
    grid = lp.make_grid(c, np.abs(center) + half, 32)
    return lat, grid, lp.build_filter_bank(lat, grid)


def test_fourier_round_trip(waves):
    back = waves.to_frequency().to_space()
    assert np.allclose(back.samples, waves.samples, atol=1e-12)
    assert np.allclose(back.origin, waves.origin)


def test_plancherel(waves):
    F = waves.to_frequency()
    lhs = lp.lp_norm(waves, 2) ** 2
    rhs = np.sum(np.abs(F.samples) ** 2) * F.cell_volume / (2 * np.pi) ** 3
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_save_load_round_trip(waves, tmp_path):
    waves.save(tmp_path / "w")
    back = lp.GridField.load(tmp_path / "w.bin")
    assert np.array_equal(back.samples, waves.samples)
    assert np.array_equal(back.spacing, waves.spacing)
    assert back.metadata() == waves.metadata()


def test_memory_cap():
    with pytest.raises(MemoryError):
        lp.make_grid(lightcone(3), 1.0, 512)


def test_aliasing_guard():
    grid = lp.make_grid(lightcone(3), 1.0, 16, guard=1.0)
    f = lp.plane_wave_field(grid, [[0.9, 0.1, 0.0]], [1.0])
    with pytest.raises(lp.AliasingError):
        lp.box_power(f, 1)


def test_dilation_scales_spectrum(waves):
    g = waves.dilate(2.0)
    assert np.array_equal(g.samples, waves.samples)
    assert np.allclose(g.spacing, waves.spacing / 2)
    lo, hi = waves.occupied_box()
    glo, ghi = g.occupied_box()
    assert np.allclose(glo, 2 * lo) and np.allclose(ghi, 2 * hi)


def test_bump_profile_shape():
    b = lp.BumpProfile(1.0, 2.0, 1.0)
    x = np.linspace(0, 3, 301)
    v = b(x)
    assert np.all(v[x <= 1.0] == 1.0)
    assert np.all(v[x >= 2.0] == 0.0)
    assert np.all(np.diff(v) <= 0)
    with pytest.raises(ValueError):
        lp.BumpProfile(2.0, 1.0)


def test_partition_of_unity(family):
    _, _, _, bank, _ = family
    err = lp.partition_error(bank, samples=10_000, seed=3)
    assert max(err["grid"], err["samples"]) < 1e-10
    assert err["covered_samples"] > 0


def test_reconstruction_first_fields(family):
    _, _, grid, bank, spec = family
    for member in spec[:3]:
        f = member.sample(grid)
        total = sum(b.samples for b in lp.lp_blocks(f, bank))
        assert np.linalg.norm(total - f.samples) / np.linalg.norm(f.samples) < 1e-8


def test_family_is_reproducible(family):
    _, _, grid, bank, spec = family
    again = lp.family_spec(bank, grid, seed=0)
    assert [m.to_dict() for m in again] == [m.to_dict() for m in spec]
    assert len(spec) == 10


def test_near_orthogonality(wide_bank):
    lat, grid, bank = wide_bank
    D = geo.pairwise_distance(lat.cone, lat.points, lat.points)
    far = np.argwhere(D >= 4)
    assert len(far) > 0
    rng = np.random.default_rng(0)
    # narrow spectrum around an interior point well inside the grid band
    f = lp.gaussian_spectrum_field(grid, lat.points[np.argmin(lat.points[:, 0])], 0.05)
    for i, j in far[rng.choice(len(far), 40, replace=False)]:
        assert np.max(np.abs(bank.psi_hat[i] * bank.psi_hat[j])) < 1e-12
        both = lp.apply_multiplier(lp.lp_project(f, bank, i), bank.psi_hat[j])
        assert np.max(np.abs(both.samples)) < 1e-12 * max(1.0, np.max(np.abs(f.samples)))


@settings(max_examples=15)
@given(beta=st.floats(-2.0, 2.0))
def test_box_power_round_trip(waves, beta):
    out = lp.box_power(lp.box_power(waves, beta), -beta)
    assert np.linalg.norm(out.samples - waves.samples) <= 1e-9 * np.linalg.norm(waves.samples)


@settings(max_examples=10)
@given(a=st.floats(-1.5, 1.5), b=st.floats(-1.5, 1.5))
def test_box_power_group_law(waves, a, b):
    lhs = lp.box_power(lp.box_power(waves, a), b)
    rhs = lp.box_power(waves, a + b)
    assert np.linalg.norm(lhs.samples - rhs.samples) <= 1e-9 * np.linalg.norm(rhs.samples)


def test_box_power_needs_interior_spectrum():
    grid = lp.make_grid(lightcone(3), 1.0, 16)
    f = lp.plane_wave_field(grid, [[0.5, 0.5, 0.0]], [1.0])  # on the boundary
    with pytest.raises(ConeDomainError):
        lp.box_power(f, -1)


@pytest.mark.parametrize("cone", [lightcone(3), sym_cone(2)])
def test_box_finite_differences_second_order(cone):
    errs = []
    for N in (16, 32):
        grid = lp.make_grid(cone, N / 16, N)  # fixed box, halved step
        f = lp.plane_wave_field(grid, FREQS, AMPS)
        a = lp.box_power(f, 1).samples
        b = lp.box_finite_difference(f).samples
        errs.append(np.linalg.norm(a - b) / np.linalg.norm(a))
    assert np.log2(errs[0] / errs[1]) >= 1.8


@pytest.mark.parametrize("cone,m", [(lightcone(3), 1), (lightcone(3), 2), (sym_cone(2), 1),
                                    (half_line(), 3)])
def test_bernstein_identity(cone, m):
    res = lp.bernstein_check(m, cone)
    assert res["ratio_variance"] < 1e-8
    assert res["rel_error"] < 1e-6
    assert res["expected"] == pytest.approx(lp.bernstein_polynomial(cone, m))


def test_bernstein_polynomial_values():
    assert lp.bernstein_polynomial(lightcone(3), 1) == pytest.approx(1.5)
    assert lp.bernstein_polynomial(lightcone(3), 2) == pytest.approx(5.0)
    assert lp.bernstein_polynomial(half_line(), 3) == pytest.approx(-3.0)


@settings(max_examples=10)
@given(tau=st.floats(-5, 5))
def test_unimodular_multiplier_preserves_norm(waves, tau):
    out = lp.mihlin_apply(waves, lambda lam: lam ** (1j * tau))
    assert lp.lp_norm(out, 2) == pytest.approx(lp.lp_norm(waves, 2), rel=1e-12)


def test_mihlin_power_equals_box_power(waves):
    a = lp.mihlin_apply(waves, lambda lam: lam ** 0.5).samples
    b = lp.box_power(waves, 0.5).samples
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(b).max())


@settings(max_examples=8)
@given(c=st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False,
                            allow_infinity=False),
       shift=st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)))
def test_besov_seminorm_homogeneous_and_translation_invariant(family, c, shift):
    _, _, grid, bank, spec = family
    f = spec[8].sample(grid)
    base = lp.besov_seminorm(f, bank, 0.5, 2.0, 2.0).value
    g = f.copy(samples=c * np.roll(f.samples, shift, axis=(0, 1, 2)))
    assert lp.besov_seminorm(g, bank, 0.5, 2.0, 2.0).value == pytest.approx(abs(c) * base,
                                                                            rel=1e-9)


def test_besov_ratio_across_parameters(family):
    _, _, grid, bank, spec = family
    vals = [lp.besov_seminorm(m.sample(grid), bank, 1.0, 4.0, 2.0).value for m in spec]
    assert all(np.isfinite(v) and v > 0 for v in vals)


def test_constant_probe_minkowski_branch(family):
    _, _, _, bank, _ = family
    rep = lp.lp_constant_probe(bank, p=3.0, s=1.0, trials=20, seed=1)
    assert max(r["max_ratio"] for r in rep.shells) <= 1 + 1e-9
    rep2 = lp.lp_constant_probe(bank, p=2.0, s=2.0, trials=20, seed=1)
    assert rep2.guaranteed_branch and rep2.bounded
    assert max(r["max_ratio"] for r in rep2.shells) <= np.sqrt(bank.overlap)


def test_grid_mismatch_rejected(family):
    _, _, grid, bank, _ = family
    other = lp.make_grid(grid.cone, 1.0, 32)
    with pytest.raises(ValueError):
        lp.lp_blocks(lp.plane_wave_field(other, FREQS, AMPS), bank)
