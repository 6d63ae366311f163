import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from radonlab import variation as vr
from radonlab.errors import BudgetError

finite_complex = st.complex_numbers(max_magnitude=10, allow_nan=False,
                                    allow_infinity=False)
seqs = st.lists(finite_complex, min_size=1, max_size=10)
rs = st.sampled_from([1.0, 1.5, 2.0, 3.0, 10.0])


# frozen example values --------------------------------------------------

def test_vr_up_down_r2():
    assert vr.vr_exact([0, 1, 0], 2).value == pytest.approx(np.sqrt(2), abs=1e-14)


def test_vr_total_variation_r1():
    assert vr.vr_exact([0, 1, 0, 1], 1).value == pytest.approx(3.0, abs=1e-14)


def test_vr_singleton_and_constant():
    assert vr.vr_exact([7.0], 2).value == 0.0
    assert vr.vr_exact([3, 3, 3], 2).value == 0.0


def test_witness_reproduces_value():
    rng = np.random.default_rng(3)
    a = rng.normal(size=9) + 1j * rng.normal(size=9)
    for r in (1.0, 2.0, 3.5):
        res = vr.vr_exact(a, r)
        idx = [int(l) for l in res.witness]
        re_eval = (np.abs(np.diff(a[idx])) ** r).sum() ** (1 / r) if len(idx) > 1 else 0.0
        assert re_eval == pytest.approx(res.value, rel=1e-12)


def test_vr_long_dyadic_labels():
    a = np.arange(1.0, 9.0)
    assert vr.vr_long(a, 2, labels=a) == pytest.approx(7.0)


def test_vr_long_short_two_point():
    s = vr.SeqSample(np.array([0.0, 1.0]), np.array([2.0, 3.0]))
    assert vr.vr_long(s, 2) == 0.0
    assert vr.vr_short(s, 2) == pytest.approx(1.0)


def test_oscillation_examples():
    assert vr.oscillation([0, 1, 0, 1, 0], (0, 2, 4), 2) == pytest.approx(np.sqrt(2))
    assert vr.oscillation([0, 3, 1], (0, 2), 1) == pytest.approx(3.0)


def test_oscillation_bad_block_count():
    with pytest.raises(ValueError):
        vr.oscillation([0, 1, 0], (0, 2), 2)


def test_jump_examples():
    assert vr.jump_count([0, 1, 0, 1], 0.5) == 4
    assert vr.jump_count([5, 5, 5], 2.0) == 1
    assert vr.jump_count([0, 2, 0], 3.0) == 1


def test_jump_needs_chain_dp_not_fixed_start_greedy():
    # the best chain does not contain the first element
    a = [2.5, 0.0, 5.0, 0.0, 5.0]
    assert vr.jump_count(a, 4.9) == 4
    assert vr.jump_count_bruteforce(a, 4.9) == 4


def test_dyadic_level_square_bound_example():
    lhs, rhs = vr.dyadic_level_square_bound(np.arange(5.0), 2)
    assert lhs == pytest.approx(4.0)
    assert rhs == pytest.approx(np.sqrt(2) * (2.0 + np.sqrt(8.0) + 4.0))


def test_dyadic_level_requires_power_of_two_plus_one():
    with pytest.raises(ValueError):
        vr.dyadic_level_square_bound(np.arange(4.0), 2)


def test_even_partition_examples():
    assert vr.even_partition(0, 8, 4) == (0, 2, 4, 6, 8)
    assert vr.even_partition(0, 7, 3) == (0, 2, 5, 7)


def test_even_partition_rejects_h_above_span():
    with pytest.raises(ValueError):
        vr.even_partition(0, 3, 5)


@given(st.integers(-40, 40), st.integers(1, 80), st.integers(1, 80))
def test_even_partition_gap_law(u, span, h):
    if h > span:
        h = span
    v = u + span
    knots = vr.even_partition(u, v, h)
    assert knots[0] == u and knots[-1] == v
    gaps = {b - a for a, b in zip(knots, knots[1:])}
    assert gaps <= {span // h, -(-span // h)}


def test_family_variation_bound_spikes():
    # f_j = j * delta_0: U_2 = 4, V_2 = 1, bound = 4, lhs = V_2(0..4) = 4
    F = np.arange(5.0)[:, None]
    out = vr.family_variation_bound(F, 2, 2)
    assert out["U"] == pytest.approx(4.0)
    assert out["V"] == pytest.approx(1.0)
    assert out["bound"] == pytest.approx(4.0)
    assert out["lhs"] == pytest.approx(4.0)


def test_mixed_variation_example():
    out = vr.mixed_variation_bound([0, 1, 0], (1, 2), 2, labels=[1, 1.5, 2])
    assert out["lhs"] == pytest.approx(np.sqrt(2))
    assert out["rhs"] == pytest.approx(1.0)
    assert out["ratio"] == pytest.approx(np.sqrt(2))


# oracle equivalence and properties --------------------------------------

@given(seqs, rs)
def test_dp_matches_bruteforce(a, r):
    dp = vr.vr_exact(a, r).value
    brute = vr.vr_bruteforce(a, r).value
    assert dp == pytest.approx(brute, rel=1e-12, abs=1e-12)


def test_batch_matches_scalar(rng):
    vals = rng.normal(size=(40, 9)) + 1j * rng.normal(size=(40, 9))
    for r in (1.0, 2.0, 3.0):
        batch = vr.vr_exact_batch(vals, r)
        singles = [vr.vr_exact(v, r).value for v in vals]
        assert np.allclose(batch, singles, rtol=1e-13)
        bbatch = vr.vr_bruteforce_batch(vals, r)
        assert np.allclose(bbatch, singles, rtol=1e-12)


def test_bruteforce_budget():
    with pytest.raises(BudgetError):
        vr.vr_bruteforce(np.zeros(17), 2)


@given(seqs, rs, finite_complex, st.floats(0.25, 4))
def test_affine_invariance(a, r, shift, scale):
    base = vr.vr_exact(a, r).value
    moved = vr.vr_exact(scale * np.asarray(a, dtype=complex) + shift, r).value
    assert moved == pytest.approx(scale * base, rel=1e-9, abs=1e-9)


@given(seqs)
def test_monotone_nonincreasing_in_r(a):
    values = [vr.vr_exact(a, r).value for r in (1.0, 1.5, 2.0, 3.0, 10.0)]
    for lo, hi in zip(values, values[1:]):
        assert hi <= lo + 1e-9


@given(seqs, rs, st.integers(0, 9), st.integers(0, 9))
def test_restriction_monotone(a, r, i, j):
    lo, hi = sorted((min(i, len(a) - 1), min(j, len(a) - 1)))
    sub = a[lo:hi + 1]
    if not sub:
        sub = a[:1]
    assert vr.vr_exact(sub, r).value <= vr.vr_exact(a, r).value + 1e-12


@given(seqs, rs)
def test_sup_bound_factor_two(a, r):
    lhs, rhs = vr.sup_bound_check(a, r)
    assert lhs <= rhs + 1e-9


@given(seqs, rs, st.integers(0, 10))
def test_split_bound_factor_two(a, r, w):
    lhs, rhs = vr.split_bound_check(a, r, float(w))
    assert lhs <= rhs + 1e-9


@given(seqs, st.sampled_from([2.0, 3.0, 10.0]))
def test_l2_bound_factor_two(a, r):
    lhs, rhs = vr.l2_bound_check(a, r)
    assert lhs <= rhs + 1e-9


@given(seqs, st.floats(0.05, 5), rs)
def test_jump_variation_inequality(a, lam, r):
    lhs, rhs = vr.jump_variation_check(a, lam, r)
    assert lhs <= rhs + 1e-9


@given(st.lists(finite_complex, min_size=5, max_size=12),
       st.sampled_from([2.0, 3.0, 10.0]))
def test_oscillation_holder(a, r):
    n = len(a)
    lac = [0, n // 2, n - 1] if n // 2 not in (0, n - 1) else [0, n - 1]
    J = len(lac) - 1
    lhs, rhs = vr.oscillation_holder_check(a, lac, J, r)
    assert lhs <= rhs + 1e-9


def test_long_short_domination_contiguous(rng):
    # V_r <= 2 (V^L + V^S) on full ranges 1..n; ratio above 4 would be a bug
    worst = 0.0
    for _ in range(300):
        n = int(rng.integers(2, 33))
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        lab = np.arange(1, n + 1, dtype=float)
        r = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
        full, lo, sh = vr.long_short_split(vr.SeqSample(a, lab), r)
        if lo + sh > 0:
            worst = max(worst, full / (lo + sh))
        else:
            assert full == 0.0
    assert worst <= 2.0 + 1e-9


def test_jump_dp_matches_bruteforce(rng):
    for _ in range(120):
        n = int(rng.integers(1, 10))
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        lam = float(rng.uniform(0.05, 3.0))
        assert vr.jump_count(a, lam) == vr.jump_count_bruteforce(a, lam)


def test_jump_batch_matches_scalar(rng):
    for _ in range(25):
        batch = rng.normal(size=(8, 7)) + 1j * rng.normal(size=(8, 7))
        lam = float(rng.uniform(0.05, 2.0))
        got = vr.jump_count_batch(batch, lam)
        want = [vr.jump_count(row, lam) for row in batch]
        assert got.tolist() == want
    with pytest.raises(ValueError):
        vr.jump_count_batch(np.zeros((2, 3)), -0.5)


def test_dyadic_level_bound_random(rng):
    for s in (1, 2, 3, 4):
        for _ in range(50):
            a = rng.choice([-1.0, 1.0], size=2 ** s + 1)
            for r in (2.0, 3.0):
                lhs, rhs = vr.dyadic_level_square_bound(a, r)
                assert lhs <= rhs + 1e-9


def test_partition_variation_bound_reports(rng):
    a = rng.normal(size=17) + 1j * rng.normal(size=17)
    out = vr.partition_variation_bound(a, 0, 16, 4, 2, 2)
    assert out["knots"] == (0, 4, 8, 12, 16)
    assert out["vr"] >= 0 and out["block_bound"] >= 0
    # the block bound dominates up to a modest absolute factor
    assert out["vr"] <= 4.0 * out["block_bound"] + 1e-9


def test_mixed_variation_fitted_constant(rng):
    # fitted constant over random real-label samples stays modest
    # (the splitting argument gives sqrt(6) ~ 2.45 for r = 2)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(3, 25))
        labels = np.sort(rng.uniform(0.5, 10.0, size=n))
        labels += np.arange(n) * 1e-6  # enforce strict increase
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        n_break = int(rng.integers(0, min(4, n - 1)))
        inner = sorted(rng.choice(np.arange(1, n - 1), size=n_break,
                                  replace=False)) if n_break else []
        w = labels[[0, *inner, n - 1]]
        out = vr.mixed_variation_bound(vr.SeqSample(a, labels), w, 2.0)
        if np.isfinite(out["ratio"]):
            worst = max(worst, out["ratio"])
    assert worst < np.sqrt(6.0) + 1e-9


def test_mixed_variation_rejects_off_label_breakpoints():
    with pytest.raises(ValueError):
        vr.mixed_variation_bound([0, 1, 0], (1, 1.7, 2), 2, labels=[1, 1.5, 2])
