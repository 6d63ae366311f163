"""Discrete averaging and singular operators on finitely supported data.

A GridFunction is a dense complex array over an integer box, implicitly
zero outside.  The averaging operator M_N f(x) = |B_N|^{-1} sum f(x - P(y))
and the truncated singular T_N f(x) = sum_{y != 0} f(x - P(y)) K(y) are
convolutions with the pushforward of the lattice ball under the mapping.

Two backends: "direct" accumulates weighted translates of f, one lattice
point at a time in lexicographic order; "fft" histograms the pushforward
kernel and convolves with zero padding to the full linear size, so the
cyclic product is exactly the linear one.  The shift-system realization
(composed single-axis translations) performs the identical sequence of
float operations as the direct backend and therefore matches it bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError
from .expsum import CZKernelSpec
from .polymap import ConvexBody, PolynomialMapping, ball, lattice_points
from .variation import vr_exact_batch

MEMORY_BUDGET_ELEMENTS = 80_000_000


@dataclass
class GridFunction:
    """Complex values over an inclusive integer box, zero outside."""

    box: tuple[tuple[int, int], ...]
    values: np.ndarray

    def __post_init__(self):
        self.box = tuple((int(lo), int(hi)) for lo, hi in self.box)
        self.values = np.asarray(self.values, dtype=complex)
        if any(hi < lo for lo, hi in self.box):
            raise ValueError("empty box")
        shape = tuple(hi - lo + 1 for lo, hi in self.box)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not "
                             f"match box shape {shape}")

    @property
    def ndim(self) -> int:
        return len(self.box)

    def __getitem__(self, point) -> complex:
        if np.isscalar(point):
            point = (point,)
        idx = []
        for (lo, hi), c in zip(self.box, point):
            if not lo <= c <= hi:
                return 0j
            idx.append(int(c) - lo)
        return complex(self.values[tuple(idx)])

    def translate(self, delta) -> GridFunction:
        """(T_z f)(x) = f(x - z): pure relabeling of the box."""
        new_box = tuple((lo + int(d), hi + int(d))
                        for (lo, hi), d in zip(self.box, delta))
        return GridFunction(new_box, self.values.copy())

    def mass(self) -> complex:
        return complex(self.values.sum())

    def norm(self, p: float) -> float:
        """l^p norm against counting measure, compensated summation."""
        if np.isinf(p):
            return float(np.abs(self.values).max())
        if p <= 0:
            raise ValueError("need p > 0")
        return float(math.fsum(np.abs(self.values).ravel() ** p)) ** (1 / p)

    def same_box(self, other: GridFunction) -> bool:
        return self.box == other.box


def delta_function(ndim: int, at=None) -> GridFunction:
    at = tuple(int(c) for c in at) if at is not None else (0,) * ndim
    box = tuple((c, c) for c in at)
    return GridFunction(box, np.ones((1,) * ndim))


def embed(f: GridFunction, box) -> GridFunction:
    """Copy f into a containing box, zero-filled elsewhere."""
    box = tuple((int(lo), int(hi)) for lo, hi in box)
    for (lo, hi), (flo, fhi) in zip(box, f.box):
        if lo > flo or hi < fhi:
            raise ValueError("target box does not contain the support box")
    shape = tuple(hi - lo + 1 for lo, hi in box)
    _check_elements(math.prod(shape))
    out = np.zeros(shape, dtype=complex)
    sl = tuple(slice(flo - lo, fhi - lo + 1)
               for (lo, _), (flo, fhi) in zip(box, f.box))
    out[sl] = f.values
    return GridFunction(box, out)


def union_box(*fs: GridFunction):
    return tuple((min(f.box[j][0] for f in fs), max(f.box[j][1] for f in fs))
                 for j in range(fs[0].ndim))


def grid_difference(a: GridFunction, b: GridFunction) -> float:
    """sup |a - b| over the union of the two boxes."""
    u = union_box(a, b)
    return float(np.abs(embed(a, u).values - embed(b, u).values).max())


def _check_elements(n: int, budget: int = MEMORY_BUDGET_ELEMENTS):
    if n > budget:
        raise BudgetError(f"output grid would hold {n} elements "
                          f"(budget {budget})", estimate=n)


# -- pushforward kernel --------------------------------------------------------

@dataclass(frozen=True)
class PushforwardKernel:
    """Convolution kernel kappa(z) = total weight of {y in B_N: P(y) = z}.

    For the average the weight is 1/|B_N| per point; for the singular
    version it is K(y) with the origin removed.  Collisions between
    lattice points accumulate, matching the defining sum.
    """

    box: tuple[tuple[int, int], ...]
    values: np.ndarray
    N: int
    lattice_size: int

    def as_grid(self) -> GridFunction:
        return GridFunction(self.box, self.values.astype(complex))

    def multiplier_at(self, xi) -> complex:
        """Fourier transform sum_z kappa(z) e(z . xi)."""
        xi = np.asarray(xi, dtype=float)
        coords = [np.arange(lo, hi + 1) for lo, hi in self.box]
        mesh = np.meshgrid(*coords, indexing="ij")
        phase = sum(x * m for x, m in zip(xi, mesh))
        return complex((self.values * np.exp(2j * np.pi * phase)).sum())


def _ball_images(P: PolynomialMapping, N: int, body: ConvexBody | None,
                 kernel: CZKernelSpec | None):
    """Lattice points, their images under P, and per-point weights."""
    body = body or ball(P.k)
    pts = lattice_points(body, N)
    if kernel is not None:
        pts = pts[np.any(pts != 0, axis=1)]
        if len(pts) == 0:
            raise ValueError("truncation ball holds only the origin")
        weights = np.asarray(kernel.eval_many(pts), dtype=float)
    else:
        if len(pts) == 0:
            raise ValueError("empty truncation ball")
        weights = np.full(len(pts), 1.0 / len(pts))
    # Object dtype: exact Python-int images, so the memory-budget check
    # below sees true extents even when they overflow fixed-width ints.
    images = P.eval_many(pts)
    return images, weights


def pushforward_kernel(P: PolynomialMapping, N: int,
                       body: ConvexBody | None = None,
                       kernel: CZKernelSpec | None = None,
                       budget: int = MEMORY_BUDGET_ELEMENTS) -> PushforwardKernel:
    images, weights = _ball_images(P, N, body, kernel)
    los = images.min(axis=0)
    his = images.max(axis=0)
    shape = tuple(int(h - l + 1) for l, h in zip(los, his))
    _check_elements(math.prod(shape), budget)
    vals = np.zeros(shape)
    np.add.at(vals,
              tuple((images[:, j] - los[j]).astype(np.intp)
                    for j in range(P.d0)),
              weights)
    return PushforwardKernel(tuple((int(l), int(h))
                                   for l, h in zip(los, his)),
                             vals, N, len(images))


# -- the two backends ----------------------------------------------------------

@dataclass(frozen=True)
class OperatorResult:
    output: GridFunction
    backend: str
    N: int


def _result_box(f: GridFunction, los, his):
    return tuple((flo + int(lo), fhi + int(hi))
                 for (flo, fhi), lo, hi in zip(f.box, los, his))


def _accumulate_translates(f: GridFunction, images, weights) -> GridFunction:
    """out += w_i * (f translated by images[i]), in the given row order."""
    los = images.min(axis=0)
    his = images.max(axis=0)
    out_box = _result_box(f, los, his)
    shape = tuple(hi - lo + 1 for lo, hi in out_box)
    _check_elements(math.prod(shape))
    out = np.zeros(shape, dtype=complex)
    f_shape = f.values.shape
    for i in range(len(images)):
        sl = tuple(slice(int(images[i, j] - los[j]),
                         int(images[i, j] - los[j]) + f_shape[j])
                   for j in range(len(f_shape)))
        out[sl] += weights[i] * f.values
    return GridFunction(out_box, out)


def _convolve_fft(f: GridFunction, ker: PushforwardKernel) -> GridFunction:
    out_box = tuple((flo + klo, fhi + khi)
                    for (flo, fhi), (klo, khi) in zip(f.box, ker.box))
    full = tuple(fs + ks - 1
                 for fs, ks in zip(f.values.shape, ker.values.shape))
    _check_elements(2 * math.prod(full))
    axes = tuple(range(len(full)))
    F = np.fft.fftn(f.values, s=full, axes=axes)
    G = np.fft.fftn(ker.values, s=full, axes=axes)
    return GridFunction(out_box, np.fft.ifftn(F * G, axes=axes))


def radon_average(f: GridFunction, P: PolynomialMapping, N: int,
                  body: ConvexBody | None = None,
                  backend: str = "direct") -> OperatorResult:
    """M_N f(x) = |B_N|^{-1} sum_{y in B_N} f(x - P(y))."""
    if N < 1:
        raise ValueError("need N >= 1")
    if backend == "direct":
        images, weights = _ball_images(P, N, body, None)
        out = _accumulate_translates(f, images, weights)
    elif backend == "fft":
        out = _convolve_fft(f, pushforward_kernel(P, N, body))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return OperatorResult(out, backend, N)


def truncated_singular(f: GridFunction, P: PolynomialMapping, N: int,
                       kernel: CZKernelSpec,
                       body: ConvexBody | None = None,
                       backend: str = "direct") -> OperatorResult:
    """T_N f(x) = sum_{y in B_N, y != 0} f(x - P(y)) K(y)."""
    if N < 1:
        raise ValueError("need N >= 1")
    if backend == "direct":
        images, weights = _ball_images(P, N, body, kernel)
        out = _accumulate_translates(f, images, weights)
    elif backend == "fft":
        out = _convolve_fft(f, pushforward_kernel(P, N, body, kernel=kernel))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return OperatorResult(out, backend, N)


# -- shift-system realization ----------------------------------------------------

def _shift_axis(f: GridFunction, axis: int, amount: int) -> GridFunction:
    """One commuting coordinate shift S_axis^amount (box relabeling)."""
    new_box = tuple((lo + amount, hi + amount) if j == axis else (lo, hi)
                    for j, (lo, hi) in enumerate(f.box))
    return GridFunction(new_box, f.values)


def _orbit_accumulate(f: GridFunction, images, weights) -> GridFunction:
    """Average of f over the orbit of composed shifts.

    Walks the lattice points in the same order as the direct backend and
    performs the same multiply-and-add per point, so the output is
    bitwise equal to it; the translate is realized by composing
    single-axis shifts rather than by index arithmetic.
    """
    los = images.min(axis=0)
    his = images.max(axis=0)
    out_box = _result_box(f, los, his)
    shape = tuple(hi - lo + 1 for lo, hi in out_box)
    _check_elements(math.prod(shape))
    out = np.zeros(shape, dtype=complex)
    for i in range(len(images)):
        shifted = f
        for axis in range(f.ndim):
            shifted = _shift_axis(shifted, axis, int(images[i, axis]))
        sl = tuple(slice(blo - olo, blo - olo + (bhi - blo + 1))
                   for (blo, bhi), (olo, _) in zip(shifted.box, out_box))
        out[sl] += weights[i] * shifted.values
    return GridFunction(out_box, out)


def ergodic_average(f: GridFunction, P: PolynomialMapping, N: int,
                    body: ConvexBody | None = None) -> GridFunction:
    """The averaging operator on the shift system X = Z^{d0}.

    With commuting coordinate shifts S_j, the orbit average
    |B_N|^{-1} sum_{y in B_N} f(S_1^{P_1(y)} ... S_{d0}^{P_{d0}(y)} x)
    is the lattice average itself; built literally from composed shifts.
    """
    images, weights = _ball_images(P, N, body, None)
    return _orbit_accumulate(f, images, weights)


def ergodic_singular(f: GridFunction, P: PolynomialMapping, N: int,
                     kernel: CZKernelSpec,
                     body: ConvexBody | None = None) -> GridFunction:
    """Shift-system realization of the truncated singular operator."""
    images, weights = _ball_images(P, N, body, kernel)
    return _orbit_accumulate(f, images, weights)


# -- variation curves across truncations -----------------------------------------

def variation_curve(f: GridFunction, P: PolynomialMapping, r: float,
                    N_set, p: float, which: str = "average",
                    kernel: CZKernelSpec | None = None,
                    body: ConvexBody | None = None,
                    backend: str = "fft") -> dict:
    """Pointwise V_r across the truncation family, then the l^p norm.

    which = "average" uses M_N, which = "singular" uses T_N (kernel
    required).  A singleton N_set gives the zero field.  The ratio
    ||V_r||_p / ||f||_p is the quantity the boundedness statements
    control for r > 2 (recorded in `lepingle_regime`).
    """
    N_set = sorted(int(n) for n in N_set)
    if not N_set:
        raise ValueError("need at least one truncation")
    if len(N_set) != len(set(N_set)):
        raise ValueError("duplicate truncation radii")
    outs = []
    for n in N_set:
        if which == "average":
            outs.append(radon_average(f, P, n, body, backend).output)
        elif which == "singular":
            if kernel is None:
                raise ValueError("singular curve needs a kernel")
            outs.append(truncated_singular(f, P, n, kernel, body,
                                           backend).output)
        else:
            raise ValueError(f"unknown operator family {which!r}")
    u = union_box(*outs)
    stack = np.stack([embed(o, u).values.ravel() for o in outs], axis=1)
    var = vr_exact_batch(stack, r)
    var_grid = GridFunction(
        u, var.reshape(tuple(hi - lo + 1 for lo, hi in u)).astype(complex))
    num = var_grid.norm(p)
    den = f.norm(p)
    return {"variation": var_grid, "norm": num, "input_norm": den,
            "ratio": num / den if den > 0 else float("inf"),
            "lepingle_regime": r > 2, "N_set": N_set}


# -- ensembles and empirical norms ------------------------------------------------

@dataclass(frozen=True)
class EnsembleSpec:
    """Random test inputs cycling through delta spikes, Gaussian-profile
    bumps, and Rademacher sign fields on a centered box."""

    ndim: int
    halfwidth: int
    size: int
    seed: int
    kinds: tuple[str, ...] = ("spike", "bump", "rademacher")


def ensemble(spec: EnsembleSpec):
    rng = np.random.default_rng(spec.seed)
    box = tuple((-spec.halfwidth, spec.halfwidth)
                for _ in range(spec.ndim))
    shape = tuple(2 * spec.halfwidth + 1 for _ in range(spec.ndim))
    axes = [np.arange(-spec.halfwidth, spec.halfwidth + 1)] * spec.ndim
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    for i in range(spec.size):
        kind = spec.kinds[i % len(spec.kinds)]
        if kind == "spike":
            vals = np.zeros(shape, dtype=complex)
            at = tuple(int(rng.integers(0, s)) for s in shape)
            vals[at] = 1.0
        elif kind == "bump":
            center = rng.uniform(-spec.halfwidth / 2, spec.halfwidth / 2,
                                 size=spec.ndim)
            width = rng.uniform(1.0, max(2.0, spec.halfwidth / 3))
            d2 = ((grid - center) ** 2).sum(axis=-1)
            vals = np.exp(-d2 / (2 * width ** 2)).astype(complex)
        elif kind == "rademacher":
            vals = rng.choice([-1.0, 1.0], size=shape).astype(complex)
        else:
            raise ValueError(f"unknown ensemble kind {kind!r}")
        yield GridFunction(box, vals)


def empirical_norm(p: float, r: float, spec: EnsembleSpec,
                   P: PolynomialMapping, N_set, which: str = "average",
                   kernel: CZKernelSpec | None = None) -> dict:
    """Max of ||V_r(op_N f : N)||_p / ||f||_p over the ensemble."""
    worst, per_input = 0.0, []
    for f in ensemble(spec):
        out = variation_curve(f, P, r, N_set, p, which=which, kernel=kernel)
        per_input.append(out["ratio"])
        worst = max(worst, out["ratio"])
    return {"max_ratio": worst, "ratios": per_input, "p": p, "r": r}


def variation_growth_fit(p: float, r_grid, spec: EnsembleSpec,
                         P: PolynomialMapping, N_set,
                         which: str = "average",
                         kernel: CZKernelSpec | None = None) -> dict:
    """Check ratio(r) <= C_p r/(r-2) as r decreases toward 2.

    Reports per-r max ratios and the fitted C_p = max_r ratio(r)(r-2)/r.
    """
    rows = []
    fitted = 0.0
    for r in r_grid:
        if r <= 2:
            raise ValueError("growth fit needs r > 2")
        stats = empirical_norm(p, r, spec, P, N_set, which, kernel)
        scaled = stats["max_ratio"] * (r - 2.0) / r
        fitted = max(fitted, scaled)
        rows.append({"r": float(r), "max_ratio": stats["max_ratio"],
                     "scaled": scaled})
    return {"rows": rows, "fitted_constant": fitted, "p": p}
