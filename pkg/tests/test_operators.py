import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radonlab.errors import BudgetError
from radonlab.expsum import avg_multiplier, odd_power_kernel, sing_multiplier
from radonlab.operators import (EnsembleSpec, GridFunction, delta_function,
                                embed, empirical_norm, ensemble,
                                ergodic_average, ergodic_singular,
                                grid_difference, pushforward_kernel,
                                radon_average, truncated_singular, union_box,
                                variation_curve, variation_growth_fit)
from radonlab.polymap import PolynomialMapping, ball, mapping_from_univariate

P_ID = mapping_from_univariate({1: 1})
P_SQ = mapping_from_univariate({2: 1})
P_CUBE_MIX = mapping_from_univariate({3: 1, 1: -2})
P_2D = PolynomialMapping(2, 2, ({(1, 0): 1}, {(0, 2): 1, (2, 0): 1}))
P_2D_TO_1 = PolynomialMapping(2, 1, ({(2, 0): 1, (0, 3): 1},))
KERNEL = odd_power_kernel(1.0)


def random_grid(rng, ndim, halfwidth):
    shape = tuple(2 * halfwidth + 1 for _ in range(ndim))
    vals = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    box = tuple((-halfwidth, halfwidth) for _ in range(ndim))
    return GridFunction(box, vals)


# -- grid plumbing ------------------------------------------------------------

def test_box_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        GridFunction(((0, 2),), np.zeros(2))


def test_empty_box_rejected():
    with pytest.raises(ValueError):
        GridFunction(((3, 1),), np.zeros(0))


def test_point_lookup_inside_and_outside():
    f = GridFunction(((-1, 1),), np.array([1.0, 2.0, 3.0]))
    assert f[-1] == 1.0
    assert f[(1,)] == 3.0
    assert f[5] == 0.0


def test_norms():
    f = GridFunction(((0, 2),), np.array([3.0, 4.0, 0.0]))
    assert f.norm(2) == pytest.approx(5.0)
    assert f.norm(1) == pytest.approx(7.0)
    assert f.norm(np.inf) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        f.norm(0)


def test_embed_requires_containment():
    f = delta_function(1)
    with pytest.raises(ValueError):
        embed(f, ((1, 3),))


# -- frozen operator examples ---------------------------------------------------

def test_average_of_delta_identity_map():
    out = radon_average(delta_function(1), P_ID, 1).output
    assert out.box == ((-1, 1),)
    np.testing.assert_allclose(out.values.real, [1 / 3, 1 / 3, 1 / 3],
                               atol=1e-15)


def test_average_of_delta_square_map_masses():
    # y in {-2..2}: images 4, 1, 0, 1, 4 -> mass 1/5 at 0, 2/5 at 1 and 4
    out = radon_average(delta_function(1), P_SQ, 2).output
    assert out.box == ((0, 4),)
    np.testing.assert_allclose(out.values.real, [0.2, 0.4, 0.0, 0.0, 0.4],
                               atol=1e-15)
    assert np.all(out.values.imag == 0.0)


def test_pushforward_kernel_masses():
    ker = pushforward_kernel(P_SQ, 2)
    assert ker.box == ((0, 4),)
    assert ker.lattice_size == 5
    np.testing.assert_allclose(ker.values, [0.2, 0.4, 0.0, 0.0, 0.4],
                               atol=1e-16)


def test_singular_of_delta_is_kernel():
    out = truncated_singular(delta_function(1), P_ID, 3, KERNEL).output
    assert out.box == ((-3, 3),)
    expected = [-1 / 3, -1 / 2, -1.0, 0.0, 1.0, 1 / 2, 1 / 3]
    np.testing.assert_allclose(out.values.real, expected, atol=1e-15)


def test_singular_parity_odd_kernel_even_input():
    f = GridFunction(((-3, 3),), np.array([1.0, 2.0, 3.0, 4.0, 3.0, 2.0,
                                           1.0]))
    out = truncated_singular(f, P_ID, 2, KERNEL).output
    vals = out.values.real
    np.testing.assert_allclose(vals, -vals[::-1], atol=1e-14)


# -- backend agreement -----------------------------------------------------------

@pytest.mark.parametrize("P,ndim", [(P_ID, 1), (P_SQ, 1), (P_CUBE_MIX, 1),
                                    (P_2D_TO_1, 1)])
def test_direct_vs_fft_average(rng, P, ndim):
    # f lives on the target lattice Z^{d0}, not the source Z^k.
    f = random_grid(rng, ndim, 6)
    for N in (1, 2, 5):
        a = radon_average(f, P, N, backend="direct").output
        b = radon_average(f, P, N, backend="fft").output
        assert a.box == b.box
        scale = np.abs(a.values).max()
        assert grid_difference(a, b) <= 1e-10 * max(scale, 1.0)


def test_direct_vs_fft_2d_output(rng):
    f = random_grid(rng, 2, 3)
    a = radon_average(f, P_2D, 4, backend="direct").output
    b = radon_average(f, P_2D, 4, backend="fft").output
    assert grid_difference(a, b) <= 1e-10


def test_direct_vs_fft_singular(rng):
    f = random_grid(rng, 1, 8)
    for N in (2, 7):
        a = truncated_singular(f, P_SQ, N, KERNEL, backend="direct").output
        b = truncated_singular(f, P_SQ, N, KERNEL, backend="fft").output
        assert grid_difference(a, b) <= 1e-10


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        radon_average(delta_function(1), P_ID, 1, backend="magic")


# -- shift-system realization ------------------------------------------------------

def test_ergodic_average_bitwise_1d(rng):
    for P in (P_ID, P_SQ, P_CUBE_MIX):
        f = random_grid(rng, 1, 5)
        direct = radon_average(f, P, 4, backend="direct").output
        orbit = ergodic_average(f, P, 4)
        assert direct.box == orbit.box
        assert np.array_equal(direct.values, orbit.values)


def test_ergodic_average_bitwise_2d(rng):
    f = random_grid(rng, 2, 3)
    direct = radon_average(f, P_2D, 3, backend="direct").output
    orbit = ergodic_average(f, P_2D, 3)
    assert direct.box == orbit.box
    assert np.array_equal(direct.values, orbit.values)


def test_ergodic_singular_bitwise(rng):
    f = random_grid(rng, 1, 5)
    direct = truncated_singular(f, P_SQ, 5, KERNEL, backend="direct").output
    orbit = ergodic_singular(f, P_SQ, 5, KERNEL)
    assert direct.box == orbit.box
    assert np.array_equal(direct.values, orbit.values)


def test_ergodic_matches_average_of_delta():
    direct = radon_average(delta_function(1), P_ID, 1).output
    orbit = ergodic_average(delta_function(1), P_ID, 1)
    assert np.array_equal(direct.values, orbit.values)


# -- structural invariants ----------------------------------------------------------

def test_linearity(rng):
    f = random_grid(rng, 1, 6)
    g = random_grid(rng, 1, 6)
    alpha, beta = 1.7 - 0.3j, -0.4 + 2.1j
    combo = GridFunction(f.box, alpha * f.values + beta * g.values)
    lhs = radon_average(combo, P_SQ, 3).output
    rhs_f = radon_average(f, P_SQ, 3).output
    rhs_g = radon_average(g, P_SQ, 3).output
    rhs = alpha * rhs_f.values + beta * rhs_g.values
    assert np.abs(lhs.values - rhs).max() <= 1e-12 * np.abs(rhs).max()


def test_translation_equivariance_exact(rng):
    f = random_grid(rng, 1, 6)
    shifted_in = radon_average(f.translate([9]), P_SQ, 3).output
    shifted_out = radon_average(f, P_SQ, 3).output.translate([9])
    assert shifted_in.box == shifted_out.box
    assert np.array_equal(shifted_in.values, shifted_out.values)


def test_mass_preservation(rng):
    for ndim, P in ((1, P_SQ), (2, P_2D)):
        f = random_grid(rng, ndim, 4)
        for N in (1, 3):
            out = radon_average(f, P, N).output
            assert abs(out.mass() - f.mass()) <= 1e-12 * abs(f.mass() + 1)


def test_multiplier_consistency(rng):
    # Fourier transform of the pushforward kernel vs the direct phase sum.
    for P in (P_SQ, P_CUBE_MIX):
        ker = pushforward_kernel(P, 5)
        for xi in (0.0, 0.173, -0.42):
            direct = avg_multiplier(5, [xi], P, ball(1))
            assert abs(ker.multiplier_at([xi]) - direct) <= 1e-10


def test_singular_multiplier_consistency():
    ker = pushforward_kernel(P_SQ, 6, kernel=KERNEL)
    direct = sing_multiplier(6, [0.31], P_SQ, KERNEL, ball(1))
    assert abs(ker.multiplier_at([0.31]) - direct) <= 1e-10


def test_memory_budget_refusal():
    with pytest.raises(BudgetError) as info:
        radon_average(delta_function(1), mapping_from_univariate({5: 1}),
                      2000)
    assert info.value.estimate > 10 ** 16


def test_invalid_truncation_radius():
    with pytest.raises(ValueError):
        radon_average(delta_function(1), P_ID, 0)


# -- variation curves -----------------------------------------------------------------

def test_variation_singleton_is_zero():
    out = variation_curve(delta_function(1), P_ID, 3.0, [1], 2.0)
    assert out["norm"] == 0.0
    assert out["lepingle_regime"]
    assert np.all(out["variation"].values == 0.0)


def test_variation_two_term_value():
    # At x = 0 the averages are 1/3 then 1/5, so V_r(0) = 2/15 for every r.
    for r in (2.0, 2.5, 4.0):
        out = variation_curve(delta_function(1), P_ID, r, [1, 2], 2.0)
        assert abs(out["variation"][0] - 2 / 15) <= 1e-15


def test_variation_ratio_monotone_in_r(rng):
    f = random_grid(rng, 1, 10)
    ratios = [variation_curve(f, P_SQ, r, [1, 2, 4, 8], 2.0)["ratio"]
              for r in (2.1, 2.5, 3.0, 4.0)]
    for a, b in zip(ratios, ratios[1:]):
        assert b <= a + 1e-12


def test_variation_ratio_homogeneous(rng):
    f = random_grid(rng, 1, 8)
    g = GridFunction(f.box, 2.0 * f.values)
    r1 = variation_curve(f, P_SQ, 3.0, [1, 3, 5], 2.0)["ratio"]
    r2 = variation_curve(g, P_SQ, 3.0, [1, 3, 5], 2.0)["ratio"]
    assert r1 == pytest.approx(r2, rel=1e-12)


def test_variation_requires_kernel_for_singular():
    with pytest.raises(ValueError):
        variation_curve(delta_function(1), P_ID, 3.0, [1, 2], 2.0,
                        which="singular")


def test_variation_rejects_duplicates():
    with pytest.raises(ValueError):
        variation_curve(delta_function(1), P_ID, 3.0, [2, 2], 2.0)


def test_variation_singular_curve_runs(rng):
    # An odd mapping: pushing the odd kernel through an even one (x^2)
    # cancels every weight and the curve is identically zero.
    f = random_grid(rng, 1, 6)
    out = variation_curve(f, P_CUBE_MIX, 3.0, [1, 2, 4], 2.0,
                          which="singular", kernel=KERNEL)
    assert out["norm"] > 0.0
    assert math.isfinite(out["ratio"])


# -- ensembles and empirical norms ------------------------------------------------------

def test_ensemble_deterministic_and_typed():
    spec = EnsembleSpec(ndim=1, halfwidth=8, size=6, seed=11)
    first = [g.values.copy() for g in ensemble(spec)]
    second = [g.values.copy() for g in ensemble(spec)]
    assert len(first) == 6
    for a, b in zip(first, second):
        assert np.array_equal(a, b)
    # spike inputs hold a single unit mass
    assert np.abs(first[0]).sum() == pytest.approx(1.0)
    # rademacher fields are unimodular
    assert np.all(np.abs(first[2]) == 1.0)


def test_empirical_norm_reports_finite_max(rng):
    spec = EnsembleSpec(ndim=1, halfwidth=16, size=6, seed=3)
    stats = empirical_norm(2.0, 3.0, spec, P_SQ, [1, 2, 4, 8])
    assert stats["max_ratio"] == pytest.approx(max(stats["ratios"]))
    assert 0 < stats["max_ratio"] < 10


def test_growth_fit_scaled_constant_bounded():
    spec = EnsembleSpec(ndim=1, halfwidth=12, size=4, seed=5)
    fit = variation_growth_fit(2.0, [2.1, 2.5, 3.0], spec, P_SQ,
                               [1, 2, 4, 8])
    assert 0 < fit["fitted_constant"] < 10
    assert all(row["scaled"] <= fit["fitted_constant"] + 1e-15
               for row in fit["rows"])


def test_growth_fit_rejects_low_r():
    spec = EnsembleSpec(ndim=1, halfwidth=4, size=1, seed=1)
    with pytest.raises(ValueError):
        variation_growth_fit(2.0, [2.0], spec, P_SQ, [1, 2])


# -- randomized cross-checks ---------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 8))
def test_backends_agree_property(seed, n):
    rng = np.random.default_rng(seed)
    f = random_grid(rng, 1, 5)
    a = radon_average(f, P_SQ, n, backend="direct").output
    b = radon_average(f, P_SQ, n, backend="fft").output
    assert grid_difference(a, b) <= 1e-10 * max(np.abs(a.values).max(), 1.0)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_ergodic_identification_property(seed):
    rng = np.random.default_rng(seed)
    f = random_grid(rng, 1, 4)
    direct = radon_average(f, P_CUBE_MIX, 3, backend="direct").output
    orbit = ergodic_average(f, P_CUBE_MIX, 3)
    assert np.array_equal(direct.values, orbit.values)
