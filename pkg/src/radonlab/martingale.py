"""Dyadic martingales on the unit cube, jump experiments, and the
continuous averaging operator with its derivative formula.

Fields are cell-constant on the finest dyadic grid of [0, 1)^m, so
every coarser conditional expectation is an exact block average and the
filtration identities can be checked in exact rational arithmetic when
the inputs are rationals (object arrays of Fraction).  All norms are
integral norms with the cell measure 2^{-mL}.

The variational and jump experiments report fitted constants: the
inequalities behind them carry implicit constants, so the module
asserts structure (monotonicity, exact identities, finiteness) and
leaves magnitudes to the experiment reports.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .variation import jump_count_batch, vr_exact_batch, vr_value

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class DyadicField:
    """Cell-constant function on the finest dyadic grid of [0, 1)^m.

    values has shape (2^L,) * m; object dtype carries exact rationals,
    anything numeric is held as complex.
    """

    m: int
    L: int
    values: np.ndarray

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need m >= 1")
        if self.L < 0:
            raise ValueError("need L >= 0")
        v = np.asarray(self.values)
        if v.dtype != object:
            v = v.astype(complex)
        want = (2 ** self.L,) * self.m
        if v.shape != want:
            raise ValueError(f"values must have shape {want}, "
                             f"got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def cells(self) -> int:
        return 2 ** (self.m * self.L)

    @property
    def cell_measure(self) -> float:
        return 2.0 ** (-self.m * self.L)

    def norm(self, p: float) -> float:
        """Integral L^p norm on [0, 1)^m; p = inf gives the sup."""
        if self.values.dtype == object:
            v = np.abs(self.values.astype(complex))
        else:
            v = np.abs(self.values)
        if p == math.inf:
            return float(v.max())
        if p < 1:
            raise ValueError("need p >= 1")
        return float((self.cell_measure
                      * math.fsum((v ** p).ravel())) ** (1.0 / p))


def measure_where(f: DyadicField, mask: np.ndarray) -> float:
    """Lebesgue measure of the union of cells flagged by mask."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != f.values.shape:
        raise ValueError("mask shape mismatch")
    return float(f.cell_measure * int(mask.sum()))


def cell_measure_exact(m: int, k: int) -> Fraction:
    """Measure of one level-k dyadic cube in [0, 1)^m."""
    return Fraction(1, 2 ** (m * k))


def doubling_constant(m: int, depth: int = 10) -> int:
    """Parent-to-child measure ratio; 2^m for standard dyadic cubes."""
    ratios = {cell_measure_exact(m, k) / cell_measure_exact(m, k + 1)
              for k in range(depth)}
    if len(ratios) != 1:
        raise AssertionError("dyadic cube measures are not uniform")
    r = next(iter(ratios))
    if r.denominator != 1:
        raise AssertionError("doubling ratio is not an integer")
    return int(r)


def haar_field(L: int) -> DyadicField:
    """1 on [0, 1/2), -1 on [1/2, 1): the first Haar function."""
    if L < 1:
        raise ValueError("need L >= 1 to resolve the half cells")
    n = 2 ** L
    vals = np.ones(n, dtype=complex)
    vals[n // 2:] = -1.0
    return DyadicField(1, L, vals)


# -- conditional expectations -----------------------------------------------------

def _block_average(v: np.ndarray, m: int, factor: int) -> np.ndarray:
    if factor == 1:
        return v.copy()
    shaped = v.reshape(tuple(x for n in v.shape
                             for x in (n // factor, factor)))
    axes = tuple(range(1, 2 * m, 2))
    if v.dtype == object:
        out = shaped
        for ax in sorted(axes, reverse=True):
            out = out.sum(axis=ax)
        return out * Fraction(1, factor ** m)
    return shaped.mean(axis=axes)


def _expand(coarse: np.ndarray, factor: int) -> np.ndarray:
    out = coarse
    for ax in range(out.ndim):
        out = np.repeat(out, factor, axis=ax)
    return out


def conditional_expectation(f: DyadicField, k: int) -> DyadicField:
    """Average over level-k dyadic cubes, returned on the finest grid.

    Exact when the field carries rationals (object dtype): block sums
    divide by the exact cell count, so the tower property is an
    identity rather than an approximation.
    """
    if not 0 <= k <= f.L:
        raise ValueError(f"level must lie in [0, {f.L}]")
    factor = 2 ** (f.L - k)
    coarse = _block_average(f.values, f.m, factor)
    return DyadicField(f.m, f.L, _expand(coarse, factor))


def martingale_levels(f: DyadicField) -> tuple[DyadicField, ...]:
    """E_0 f, ..., E_L f."""
    return tuple(conditional_expectation(f, k) for k in range(f.L + 1))


def martingale_differences(f: DyadicField) -> tuple[DyadicField, ...]:
    """D_k = E_k f - E_{k-1} f for k = 1..L; zero mean on parent cells."""
    levels = martingale_levels(f)
    return tuple(DyadicField(f.m, f.L, levels[k].values
                             - levels[k - 1].values)
                 for k in range(1, f.L + 1))


def square_function(f: DyadicField) -> DyadicField:
    vals = np.zeros(f.values.shape, dtype=float)
    for d in martingale_differences(f):
        vals += np.abs(d.values.astype(complex)) ** 2
    return DyadicField(f.m, f.L, np.sqrt(vals))


def maximal_function(f: DyadicField) -> DyadicField:
    vals = np.zeros(f.values.shape, dtype=float)
    for e in martingale_levels(f):
        vals = np.maximum(vals, np.abs(e.values.astype(complex)))
    return DyadicField(f.m, f.L, vals)


def square_and_maximal(f: DyadicField) -> tuple[DyadicField, DyadicField]:
    return square_function(f), maximal_function(f)


def _level_stack(f: DyadicField) -> np.ndarray:
    """(cells, L + 1) array of the per-cell level sequences."""
    return np.stack([e.values.astype(complex).ravel()
                     for e in martingale_levels(f)], axis=1)


# -- jumps and variation over the filtration ----------------------------------------

def martingale_jump(f: DyadicField, lam: float) -> DyadicField:
    """Per-point chain length J_lambda over the level sequence.

    Counts chain points (constant field gives 1 everywhere); the jump
    count entering the companion norm and the inequalities is this
    minus one.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    counts = jump_count_batch(_level_stack(f), lam)
    return DyadicField(f.m, f.L,
                       counts.reshape(f.values.shape).astype(complex))


def jump_norm(f: DyadicField, lam: float, p: float) -> float:
    """Companion norm ||lambda sqrt(J_lambda - 1)||_p."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    j = martingale_jump(f, lam)
    jumps = np.real(j.values) - 1.0
    return DyadicField(f.m, f.L,
                       lam * np.sqrt(jumps).astype(complex)).norm(p)


def variation_field(f: DyadicField, r: float) -> DyadicField:
    """Pointwise V_r of the level sequence."""
    vr = vr_exact_batch(_level_stack(f), r)
    return DyadicField(f.m, f.L,
                       vr.reshape(f.values.shape).astype(complex))


def lepingle_ratio(f: DyadicField, p: float, r: float,
                   allow_small_r: bool = False) -> float:
    """||V_r(E_k f : k)||_p / ||f||_p; the Lepingle regime wants r > 2."""
    if r <= 2 and not allow_small_r:
        raise ValueError("Lepingle regime needs r > 2; "
                         "pass allow_small_r=True to explore")
    if r <= 2:
        warnings.warn("r <= 2 leaves the regime where the variation "
                      "norm is bounded", stacklevel=2)
    denom = f.norm(p)
    if denom == 0.0:
        return 0.0
    return variation_field(f, r).norm(p) / denom


def ratio_sweep(fields, p: float, r_grid) -> dict:
    """Max Lepingle ratio per r, with the r/(r - 2) growth factored out.

    fitted_constant is the largest ratio * (r - 2) / r over the grid; a
    bounded fit as r decreases toward 2 is the behavior the inequality
    predicts.  Reported, never asserted against a target value.
    """
    r_grid = [float(r) for r in r_grid]
    if any(r <= 2 for r in r_grid):
        raise ValueError("sweep grid must stay in the regime r > 2")
    fields = list(fields)
    rows = []
    for r in sorted(r_grid, reverse=True):
        worst = max(lepingle_ratio(f, p, r) for f in fields)
        rows.append({"r": r, "max_ratio": worst,
                     "scaled": worst * (r - 2) / r})
    return {"rows": rows, "p": p,
            "fitted_constant": max(row["scaled"] for row in rows)}


def good_lambda_check(f: DyadicField, lam: float, q: float,
                      r: float) -> dict:
    """Both sides of the variation/square-function set comparison.

    lhs: measure of {V_r(E_k f) > lambda and Mf < lambda / 2}.
    rhs: measure of {Sf > lambda} plus
         lambda^{-q} (r - 2)^{-q/2} * integral of Sf^q over {Sf <= lambda}.
    The comparison constant is implicit; the ratio is reported and only
    finiteness is asserted by the experiment suite.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if q < 2:
        raise ValueError("need q >= 2")
    if r <= 2:
        raise ValueError("need r > 2")
    vr = np.real(variation_field(f, r).values)
    s = np.real(square_function(f).values)
    mx = np.real(maximal_function(f).values)
    lhs = measure_where(f, (vr > lam) & (mx < lam / 2))
    exceed = measure_where(f, s > lam)
    below = s[s <= lam]
    integral = float(f.cell_measure * math.fsum(below ** q))
    tail = lam ** (-q) * (r - 2) ** (-q / 2) * integral
    rhs = exceed + tail
    if lhs == 0.0:
        ratio = 0.0
    elif rhs == 0.0:
        ratio = math.inf
    else:
        ratio = lhs / rhs
    return {"lhs_measure": lhs, "rhs_measure": rhs,
            "rhs_square_measure": exceed, "rhs_tail_term": tail,
            "ratio": ratio, "lam": lam, "q": q, "r": r}


# -- random field ensembles ----------------------------------------------------------

@dataclass(frozen=True)
class FieldEnsembleSpec:
    """Random dyadic fields cycling spikes, bumps, and sign fields."""

    m: int
    L: int
    size: int
    seed: int
    kinds: tuple[str, ...] = ("spike", "bump", "rademacher")


def field_ensemble(spec: FieldEnsembleSpec):
    rng = np.random.default_rng(spec.seed)
    n = 2 ** spec.L
    shape = (n,) * spec.m
    centers = (np.arange(n) + 0.5) / n
    grid = np.stack(np.meshgrid(*[centers] * spec.m, indexing="ij"),
                    axis=-1)
    for i in range(spec.size):
        kind = spec.kinds[i % len(spec.kinds)]
        if kind == "spike":
            vals = np.zeros(shape, dtype=complex)
            at = tuple(int(rng.integers(0, n)) for _ in range(spec.m))
            vals[at] = 1.0
        elif kind == "bump":
            center = rng.uniform(0.25, 0.75, size=spec.m)
            width = rng.uniform(0.05, 0.25)
            d2 = ((grid - center) ** 2).sum(axis=-1)
            vals = np.exp(-d2 / (2 * width ** 2)).astype(complex)
        elif kind == "rademacher":
            vals = rng.choice([-1.0, 1.0], size=shape).astype(complex)
        else:
            raise ValueError(f"unknown ensemble kind {kind!r}")
        yield DyadicField(spec.m, spec.L, vals)


# -- continuous averages and the derivative formula -----------------------------------

@dataclass(frozen=True)
class RealMapping:
    """Q: R^k -> R^d with real coefficients and Q(0) = 0.

    The continuous operators only need k, d, and eval_real, so integer
    lattice mappings work here unchanged; this class admits the real
    coefficients they reject.
    """

    k: int
    d: int
    coeffs: tuple[dict, ...]

    def __post_init__(self):
        if self.k < 1 or self.d < 1 or len(self.coeffs) != self.d:
            raise ValueError("inconsistent dimensions")
        for comp in self.coeffs:
            for g, c in comp.items():
                if len(g) != self.k or any(e < 0 for e in g):
                    raise ValueError(f"bad multi-index {g}")
                if not any(g) and c != 0:
                    raise ValueError("constant term: Q(0) != 0")

    def eval_real(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape[:-1] + (self.d,))
        for i, comp in enumerate(self.coeffs):
            for g, c in comp.items():
                if not c:
                    continue
                acc = np.full(y.shape[:-1], float(c))
                for j, e in enumerate(g):
                    if e:
                        acc = acc * y[..., j] ** e
                out[..., i] += acc
        return out


def _body_points(Q, t: float, radial: int, angular: int):
    """Midpoint nodes and weights for |G_t|^{-1} * integral over G_t.

    k = 1 uses the interval (-t, t); k = 2 the disc of radius t in
    polar coordinates (midpoint in radius, uniform midpoint in angle,
    which is trapezoid-accurate on the periodic circle).
    """
    if Q.k == 1:
        h = 2 * t / radial
        r = -t + h * (np.arange(radial) + 0.5)
        return r[:, None], np.full(radial, h / (2 * t))
    if Q.k == 2:
        hr = t / radial
        ha = 2 * math.pi / angular
        rr = hr * (np.arange(radial) + 0.5)
        aa = ha * (np.arange(angular) + 0.5)
        r, a = np.meshgrid(rr, aa, indexing="ij")
        pts = np.stack([r * np.cos(a), r * np.sin(a)],
                       axis=-1).reshape(-1, 2)
        w = (r * hr * ha / (math.pi * t * t)).reshape(-1)
        return pts, w
    raise ValueError("only k <= 2 bodies are realized")


def continuous_average(f, t: float, Q, x, radial: int = 128,
                       angular: int = 128) -> np.ndarray:
    """|G_t|^{-1} * integral over G_t of f(x - Q(y)) dy.

    f is a vectorized callable on points of shape (n, d); x has shape
    (d,) or (npts, d).  Midpoint quadrature with one Richardson step
    (the caller picks the resolution; discontinuous f wants cell
    boundaries aligned with its jumps).
    """
    if t <= 0:
        raise ValueError("need t > 0")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != Q.d:
        raise ValueError("evaluation points must live in R^d")

    def quad(radial_n, angular_n):
        ys, w = _body_points(Q, t, radial_n, angular_n)
        images = np.asarray(Q.eval_real(ys), dtype=float)
        pts = (x[:, None, :] - images[None, :, :]).reshape(-1, Q.d)
        vals = np.asarray(f(pts), dtype=complex).reshape(len(x), len(w))
        return vals @ w

    crude = quad(radial, angular)
    fine = quad(2 * radial, 2 * angular)
    out = (4.0 * fine - crude) / 3.0
    return out if out.shape[0] > 1 else out[0]


def ddt_average(f, t: float, Q, x, radial: int = 128,
                angular: int = 128) -> np.ndarray:
    """Derivative of t -> continuous_average via the two-term formula.

    d/dt M_t f(x) = -(k / t) M_t f(x) + boundary term: the average of
    f(x - Q(t * omega)) over the unit sphere directions, weighted by
    t^{k-1} r(omega)^k / (t^k |G|).
    """
    if t <= 0:
        raise ValueError("need t > 0")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    bulk = np.atleast_1d(continuous_average(f, t, Q, x, radial, angular))
    if Q.k == 1:
        ends = np.asarray(Q.eval_real(np.array([[t], [-t]])), dtype=float)
        pts = (x[:, None, :] - ends[None, :, :]).reshape(-1, Q.d)
        vals = np.asarray(f(pts), dtype=complex).reshape(len(x), 2)
        boundary = vals.sum(axis=1) / (2 * t)
    elif Q.k == 2:
        ha = 2 * math.pi / angular
        aa = ha * (np.arange(angular) + 0.5)
        ring = t * np.stack([np.cos(aa), np.sin(aa)], axis=-1)
        images = np.asarray(Q.eval_real(ring), dtype=float)
        pts = (x[:, None, :] - images[None, :, :]).reshape(-1, Q.d)
        vals = np.asarray(f(pts), dtype=complex).reshape(len(x), angular)
        boundary = vals.sum(axis=1) * ha / (math.pi * t)
    else:
        raise ValueError("only k <= 2 bodies are realized")
    out = -(Q.k / t) * bulk + boundary
    return out if out.shape[0] > 1 else out[0]


def derivative_consistency(f, t: float, Q, x, dt: float = 1e-4,
                           radial: int = 128,
                           angular: int = 128) -> dict:
    """Two-term derivative against a centered difference quotient."""
    formula = np.atleast_1d(ddt_average(f, t, Q, x, radial, angular))
    hi = np.atleast_1d(continuous_average(f, t + dt, Q, x, radial,
                                          angular))
    lo = np.atleast_1d(continuous_average(f, t - dt, Q, x, radial,
                                          angular))
    centered = (hi - lo) / (2 * dt)
    scale = max(float(np.abs(formula).max()), 1e-30)
    rel = float(np.abs(formula - centered).max()) / scale
    return {"formula": formula, "centered": centered,
            "relative_error": rel}


def sampled_variation_bound(a, da, u: float, v: float, h: int,
                            r: float, dense: int = 512) -> dict:
    """Continuous V_r against the sampled-values-plus-derivative bound.

    lhs: V_r of a over a dense uniform sample of [u, v).
    rhs: (sum_j |a(s_j)|^r)^{1/r}
         + (sum_j (integral of |a'| over [s_j, s_{j+1}])^r)^{1/r}
    on the equispaced breakpoints s_j = u + (v - u) j / h.  The bound
    carries an implicit constant, so the ratio is reported as fitted.
    """
    if not u < v:
        raise ValueError("need u < v")
    if h < 1:
        raise ValueError("need h >= 1")
    ts = np.linspace(u, v, dense, endpoint=False)
    lhs = vr_value(np.asarray(a(ts), dtype=complex), r)
    s = u + (v - u) * np.arange(h + 1) / h
    term_samples = float((np.abs(np.asarray(a(s), dtype=complex)) ** r)
                         .sum() ** (1.0 / r))
    pieces = []
    for j in range(h):
        mid = 0.5 * (s[j] + s[j + 1])
        half = 0.5 * (s[j + 1] - s[j])
        nodes = mid + half * _GL_NODES
        pieces.append(half * float((_GL_WEIGHTS
                                    * np.abs(da(nodes))).sum()))
    term_derivative = float((np.asarray(pieces) ** r)
                            .sum() ** (1.0 / r))
    rhs = term_samples + term_derivative
    return {"lhs": lhs, "rhs": rhs,
            "term_samples": term_samples,
            "term_derivative": term_derivative,
            "ratio": lhs / rhs if rhs > 0 else 0.0,
            "h": h, "r": r}
