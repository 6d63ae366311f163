"""r-variation seminorms and their companion functionals.

The r-variation of a finite sequence is the supremum over increasing
subsequences of the l^r norm of consecutive differences.  The exact value
is a longest-path dynamic program (the objective is additive along a
chain); a subset-enumeration brute force serves as an independent oracle
for short sequences.  The rest of the module packages the bookkeeping
inequalities used downstream: sup bounds, splitting, the l^2 domination,
long/short dyadic splitting, oscillation sums, jump counts, block
partitions, and the norm bound for families of functions.

Convention for jump counts: `jump_count` returns the number of POINTS in a
longest chain whose consecutive gaps exceed lambda strictly (a constant
sequence counts 1).  The number of jumps along that chain is one less, and
that is the quantity every inequality here uses; checks state this
explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError

BRUTEFORCE_LIMIT = 16


@dataclass(frozen=True)
class SeqSample:
    """A finite complex sequence with strictly increasing real labels."""

    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=complex))
        object.__setattr__(self, "labels",
                           np.asarray(self.labels, dtype=float))
        if self.values.ndim != 1 or self.labels.shape != self.values.shape:
            raise ValueError("values and labels must be 1-d and aligned")
        if self.values.size == 0:
            raise ValueError("empty sequence")
        if np.any(np.diff(self.labels) <= 0):
            raise ValueError("labels must be strictly increasing")

    def __len__(self) -> int:
        return self.values.size


def as_sample(a, labels=None) -> SeqSample:
    if isinstance(a, SeqSample):
        return a
    v = np.asarray(a, dtype=complex)
    if labels is None:
        labels = np.arange(v.size, dtype=float)
    return SeqSample(v, labels)


@dataclass(frozen=True)
class VariationResult:
    value: float
    witness: tuple
    method: str


def _check_r(r: float):
    if not (r >= 1):
        raise ValueError(f"need r >= 1, got {r}")


def vr_exact(a, r: float, labels=None) -> VariationResult:
    """Exact r-variation with a maximizing chain of labels.

    DP over chain ends: B[j] = max_{i<j} B[i] + |a_j - a_i|^r, answer
    (max_j B[j])^{1/r}.  O(n^2).  The witness re-evaluates to the value.
    """
    _check_r(r)
    s = as_sample(a, labels)
    v = s.values
    n = len(s)
    if n == 1:
        return VariationResult(0.0, (float(s.labels[0]),), "dp")
    best = np.zeros(n)
    prev = np.full(n, -1, dtype=int)
    for j in range(1, n):
        gains = best[:j] + np.abs(v[j] - v[:j]) ** r
        i = int(np.argmax(gains))
        if gains[i] > 0:
            best[j] = gains[i]
            prev[j] = i
    end = int(np.argmax(best))
    if best[end] == 0:
        return VariationResult(0.0, (float(s.labels[0]),), "dp")
    chain = []
    j = end
    while j >= 0:
        chain.append(j)
        j = prev[j]
    chain.reverse()
    return VariationResult(float(best[end] ** (1.0 / r)),
                           tuple(float(s.labels[i]) for i in chain), "dp")


def vr_value(a, r: float, labels=None) -> float:
    return vr_exact(a, r, labels).value


def vr_exact_batch(values: np.ndarray, r: float) -> np.ndarray:
    """Batched DP: values is (m, n); returns the m variation values.

    Same recursion as vr_exact, vectorized over the batch axis; no witness.
    """
    _check_r(r)
    v = np.atleast_2d(np.asarray(values, dtype=complex))
    m, n = v.shape
    if n == 1:
        return np.zeros(m)
    pd = np.abs(v[:, :, None] - v[:, None, :]) ** r  # (m, i, j)
    best = np.zeros((m, n))
    for j in range(1, n):
        best[:, j] = (best[:, :j] + pd[:, :j, j]).max(axis=1)
    return best.max(axis=1) ** (1.0 / r)


def vr_bruteforce(a, r: float, labels=None) -> VariationResult:
    """Oracle: enumerate every subsequence (n <= 16).

    Gray-order mask DP: the chain sum of a mask extends the chain sum of
    the mask without its top bit, so each of the 2^n masks costs O(1).
    """
    _check_r(r)
    s = as_sample(a, labels)
    v = s.values
    n = len(s)
    if n > BRUTEFORCE_LIMIT:
        raise BudgetError(f"brute force limited to n <= {BRUTEFORCE_LIMIT}",
                          estimate=2 ** n)
    if n == 1:
        return VariationResult(0.0, (float(s.labels[0]),), "bruteforce")
    pd = np.abs(v[None, :] - v[:, None]) ** r
    top = [0] * (1 << n)      # highest set bit index
    second = [0] * (1 << n)   # second-highest set bit index
    chain_sum = [0.0] * (1 << n)
    best_val, best_mask = 0.0, 1
    for mask in range(1, 1 << n):
        h = mask.bit_length() - 1
        rest = mask ^ (1 << h)
        top[mask] = h
        if rest:
            second[mask] = top[rest]
            chain_sum[mask] = chain_sum[rest] + pd[top[rest], h]
        if chain_sum[mask] > best_val:
            best_val, best_mask = chain_sum[mask], mask
    witness = tuple(float(s.labels[i]) for i in range(n)
                    if best_mask >> i & 1)
    if best_val == 0.0:
        witness = (float(s.labels[0]),)
    return VariationResult(float(best_val ** (1.0 / r)), witness,
                           "bruteforce")


def vr_bruteforce_batch(values: np.ndarray, r: float) -> np.ndarray:
    """Oracle, batched over (m, n) values with the mask DP vectorized."""
    _check_r(r)
    v = np.atleast_2d(np.asarray(values, dtype=complex))
    m, n = v.shape
    if n > BRUTEFORCE_LIMIT:
        raise BudgetError(f"brute force limited to n <= {BRUTEFORCE_LIMIT}",
                          estimate=2 ** n)
    if n == 1:
        return np.zeros(m)
    pd = np.abs(v[:, :, None] - v[:, None, :]) ** r
    chain = np.zeros((m, 1 << n))
    best = np.zeros(m)
    for mask in range(3, 1 << n):
        h = mask.bit_length() - 1
        rest = mask ^ (1 << h)
        if rest == 0:
            continue
        prev_top = rest.bit_length() - 1
        chain[:, mask] = chain[:, rest] + pd[:, prev_top, h]
        np.maximum(best, chain[:, mask], out=best)
    return best ** (1.0 / r)


def _require_integer_labels(s: SeqSample) -> np.ndarray:
    lab = s.labels
    ilab = np.round(lab).astype(np.int64)
    if np.any(np.abs(lab - ilab) > 0) or np.any(ilab < 1):
        raise ValueError("long/short variation needs positive integer labels")
    return ilab


def vr_long(a, r: float, labels=None) -> float:
    """Variation along the powers of two present among the labels."""
    s = as_sample(a, labels)
    ilab = _require_integer_labels(s)
    dyadic = (ilab & (ilab - 1)) == 0  # powers of two (labels >= 1)
    if dyadic.sum() <= 1:
        return 0.0
    return vr_value(s.values[dyadic], r)


def vr_short(a, r: float, labels=None) -> float:
    """l^r sum over dyadic blocks [2^n, 2^{n+1}) of within-block variation."""
    _check_r(r)
    s = as_sample(a, labels)
    ilab = _require_integer_labels(s)
    block = np.floor(np.log2(ilab)).astype(int)
    total = 0.0
    for b in np.unique(block):
        sel = block == b
        if sel.sum() > 1:
            total += vr_value(s.values[sel], r) ** r
    return total ** (1.0 / r)


def long_short_split(a, r: float, labels=None) -> tuple[float, float, float]:
    """(V_r, V_r^long, V_r^short); V_r <= 2 (long + short) on full ranges."""
    s = as_sample(a, labels)
    return (vr_value(s.values, r), vr_long(s, r), vr_short(s, r))


def sup_bound_check(a, r: float) -> tuple[float, float]:
    """sup_j |a_j| <= 2 V_r + min_{j0} |a_{j0}| (worst anchor).

    Returns (lhs, rhs).
    """
    s = as_sample(a)
    mags = np.abs(s.values)
    vr = vr_value(s.values, r)
    return float(mags.max()), float(2.0 * vr + mags.min())


def split_bound_check(a, r: float, w_label: float,
                      labels=None) -> tuple[float, float]:
    """V_r(all) <= 2 sup|a| + V_r(labels < w) + V_r(labels >= w).

    Returns (lhs, rhs).
    """
    s = as_sample(a, labels)
    left = s.labels < w_label
    lhs = vr_value(s.values, r)
    parts = 0.0
    if left.sum() > 1:
        parts += vr_value(s.values[left], r)
    if (~left).sum() > 1:
        parts += vr_value(s.values[~left], r)
    return lhs, float(2.0 * np.abs(s.values).max() + parts)


def l2_bound_check(a, r: float) -> tuple[float, float]:
    """For r >= 2: V_r <= 2 (sum |a_j|^2)^{1/2}.  Returns (lhs, rhs)."""
    if r < 2:
        raise ValueError("the l^2 bound needs r >= 2")
    s = as_sample(a)
    return (vr_value(s.values, r),
            float(2.0 * np.sqrt((np.abs(s.values) ** 2).sum())))


def oscillation(a, lacunary, J: int, labels=None) -> float:
    """O_J = (sum_{j<=J} sup_{n_j < n <= n_{j+1}} |a_n - a_{n_j}|^2)^{1/2}.

    `lacunary` lists the anchor labels n_1 < n_2 < ...; J consecutive gaps
    are used, so J must not exceed len(lacunary) - 1.
    """
    s = as_sample(a, labels)
    lac = np.asarray(lacunary, dtype=float)
    if lac.ndim != 1 or lac.size < 2 or np.any(np.diff(lac) <= 0):
        raise ValueError("lacunary anchors must be strictly increasing")
    if J < 1 or J > lac.size - 1:
        raise ValueError(f"J={J} exceeds available lacunary gaps")
    if lac[0] < s.labels[0] or lac[J] > s.labels[-1]:
        raise ValueError("lacunary anchors outside the label range")
    total = 0.0
    for j in range(J):
        anchor = s.values[np.searchsorted(s.labels, lac[j])]
        if not np.isclose(s.labels[np.searchsorted(s.labels, lac[j])],
                          lac[j]):
            raise ValueError(f"anchor {lac[j]} is not a label")
        inside = (s.labels > lac[j]) & (s.labels <= lac[j + 1])
        if inside.any():
            total += float(np.max(np.abs(s.values[inside] - anchor)) ** 2)
    return total ** 0.5


def oscillation_holder_check(a, lacunary, J: int, r: float) -> tuple[float, float]:
    """O_J <= J^{1/2 - 1/r} V_r for r >= 2.  Returns (lhs, rhs)."""
    if r < 2:
        raise ValueError("the oscillation bound needs r >= 2")
    s = as_sample(a)
    return (oscillation(s, lacunary, J),
            float(J ** (0.5 - 1.0 / r) * vr_value(s.values, r)))


def jump_count(a, lam: float) -> int:
    """Points in a longest chain with consecutive gaps strictly above lam.

    Longest-path DP (ties |gap| == lam do not count).  A constant sequence
    yields 1: a single point has no constraint.  The jump count used by the
    inequalities is this value minus one.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    s = as_sample(a)
    v = s.values
    n = len(s)
    length = np.ones(n, dtype=int)
    for j in range(1, n):
        ok = np.abs(v[j] - v[:j]) > lam
        if ok.any():
            length[j] = 1 + length[:j][ok].max()
    return int(length.max())


def jump_count_bruteforce(a, lam: float) -> int:
    """Oracle: longest valid chain by subset enumeration (n <= 16)."""
    s = as_sample(a)
    v = s.values
    n = len(s)
    if n > BRUTEFORCE_LIMIT:
        raise BudgetError(f"brute force limited to n <= {BRUTEFORCE_LIMIT}",
                          estimate=2 ** n)
    best = 1
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        if len(idx) <= best:
            continue
        if all(abs(v[idx[t + 1]] - v[idx[t]]) > lam
               for t in range(len(idx) - 1)):
            best = len(idx)
    return best


def jump_count_batch(values: np.ndarray, lam: float) -> np.ndarray:
    """Batched longest-chain DP: values is (m, n); returns m point counts.

    Same recursion as jump_count, vectorized over the batch axis.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    v = np.atleast_2d(np.asarray(values, dtype=complex))
    m, n = v.shape
    length = np.ones((m, n), dtype=int)
    for j in range(1, n):
        ok = np.abs(v[:, j, None] - v[:, :j]) > lam
        # rows with no valid predecessor keep length 1 (max of zeros)
        length[:, j] = 1 + np.where(ok, length[:, :j], 0).max(axis=1)
    return length.max(axis=1)


def jump_variation_check(a, lam: float, r: float) -> tuple[float, float]:
    """(jump_count - 1) <= lam^{-r} V_r^r.  Returns (lhs, rhs)."""
    _check_r(r)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    s = as_sample(a)
    return (float(jump_count(s, lam) - 1),
            float(lam ** (-r) * vr_value(s.values, r) ** r))


def dyadic_level_square_bound(a, r: float) -> tuple[float, float]:
    """V_r vs sqrt(2) * sum over strides 2^i of the l^2 of stride differences.

    For a sequence of length 2^s + 1 and r >= 2:
      V_r <= sqrt(2) sum_{i=0}^{s} ( sum_j |a_{(j+1)2^i} - a_{j 2^i}|^2 )^{1/2}.
    Returns (lhs, rhs).
    """
    if r < 2:
        raise ValueError("the dyadic level bound needs r >= 2")
    s = as_sample(a)
    n = len(s) - 1
    if n < 1 or n & (n - 1):
        raise ValueError("length must be 2^s + 1")
    v = s.values
    rhs = 0.0
    stride = 1
    while stride <= n:
        diffs = v[stride::stride] - v[:-stride:stride]
        rhs += float(np.sqrt((np.abs(diffs) ** 2).sum()))
        stride *= 2
    return vr_value(v, r), float(np.sqrt(2.0) * rhs)


def even_partition(u: int, v: int, h: int) -> tuple[int, ...]:
    """h+1 integer knots from u to v with near-equal gaps.

    t_j = u + round(j (v-u) / h), rounding half up; consecutive gaps take
    only the values floor((v-u)/h) and ceil((v-u)/h).
    """
    if not (isinstance(u, int) and isinstance(v, int) and isinstance(h, int)):
        raise ValueError("u, v, h must be integers")
    if v <= u or h < 1 or h > v - u:
        raise ValueError("need u < v and 1 <= h <= v - u")
    span = v - u
    # round-half-up via floor(x + 1/2), done in exact integer arithmetic
    return tuple(u + (2 * j * span + h) // (2 * h) for j in range(h + 1))


def partition_variation_bound(a, u: int, v: int, h: int, r: float,
                              p: float) -> dict:
    """Both partition bounds for a sequence labeled u..v, plus V_r.

    knots: the even partition t_0..t_h.
    block_bound: (sum_j |a_{t_j}|^r)^{1/r}
                 + (sum_j (sum_{k in block j} |a_{k+1}-a_k|)^r)^{1/r}.
    holder_bound: h^{1/r-1/p} (sum_j |a_{t_j}|^p)^{1/p}
                  + h^{1/r-1} (v-u)^{1-1/p} (sum_k |a_{k+1}-a_k|^p)^{1/p}.
    The block bound dominates V_r up to an absolute factor; the ratio is
    reported, not asserted against an unquantified constant.
    """
    _check_r(r)
    if p < 1:
        raise ValueError("need p >= 1")
    s = as_sample(a)
    ilab = np.round(s.labels).astype(np.int64)
    if np.any(np.abs(s.labels - ilab) > 0):
        raise ValueError("partition bounds need integer labels")
    lab_index = {int(l): i for i, l in enumerate(ilab)}
    if any(j not in lab_index for j in range(u, v + 1)):
        raise ValueError("labels must cover u..v")
    vals = s.values
    knots = even_partition(u, v, h)
    at_knots = np.array([vals[lab_index[t]] for t in knots])
    steps = np.array([abs(vals[lab_index[k + 1]] - vals[lab_index[k]])
                      for k in range(u, v)])
    block_l1 = np.array([
        steps[knots[j] - u: knots[j + 1] - u].sum() for j in range(h)])
    block_bound = ((np.abs(at_knots) ** r).sum() ** (1 / r)
                   + (block_l1 ** r).sum() ** (1 / r))
    holder_bound = (h ** (1 / r - 1 / p)
                    * (np.abs(at_knots) ** p).sum() ** (1 / p)
                    + h ** (1 / r - 1) * (v - u) ** (1 - 1 / p)
                    * (steps ** p).sum() ** (1 / p))
    span = slice(lab_index[u], lab_index[v] + 1)
    return {
        "knots": knots,
        "vr": vr_value(vals[span], r),
        "block_bound": float(block_bound),
        "holder_bound": float(holder_bound),
    }


def family_variation_bound(fields: np.ndarray, p: float, r: float) -> dict:
    """Norm bound for the variation of a finite family of functions.

    `fields` is (n_funcs, n_points): function f_j sampled on a common
    (counting-measure) grid, j = u..v in order.  Computes
    lhs  = || V_r(f_j(x) : j) ||_p over x,
    bound = max(U_p, (v-u)^{1/r} U_p^{1-1/r} V_p^{1/r}) with
    U_p = max_j ||f_j||_p and V_p = max_j ||f_{j+1} - f_j||_p.
    """
    _check_r(r)
    if p < 1:
        raise ValueError("need p >= 1")
    F = np.atleast_2d(np.asarray(fields, dtype=complex))
    nf = F.shape[0]
    if nf < 2:
        raise ValueError("need at least two functions")

    def lp(x):
        if np.isinf(p):
            return float(np.abs(x).max())
        return float((np.abs(x) ** p).sum() ** (1 / p))

    U = max(lp(F[j]) for j in range(nf))
    V = max(lp(F[j + 1] - F[j]) for j in range(nf - 1))
    span = nf - 1
    pointwise = vr_exact_batch(F.T, r)
    lhs = lp(pointwise)
    bound = max(U, span ** (1 / r) * U ** (1 - 1 / r) * V ** (1 / r))
    return {"lhs": lhs, "bound": float(bound), "U": U, "V": V,
            "suggested_h": int(np.ceil(span * V / (4 * U))) if U > 0 else 0}


def mixed_variation_bound(a, w, r: float, labels=None) -> dict:
    """Real-label variation against breakpoint skeleton plus block l^2.

    rhs = V_r(a at breakpoints) +
          (sum_k V_r(a restricted to [w_k, w_{k+1}))^2)^{1/2},
    all blocks half-open (the last label is covered by the skeleton).
    Each breakpoint must itself be a label (the skeleton evaluates the
    sequence there), and the breakpoints must span the label range.  The
    constant in lhs <= C rhs is fitted, never asserted.
    """
    _check_r(r)
    s = as_sample(a, labels)
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 2 or np.any(np.diff(w) <= 0):
        raise ValueError("breakpoints must be strictly increasing")
    if w[0] > s.labels[0] or w[-1] < s.labels[-1]:
        raise ValueError("breakpoints must cover the label range")
    lhs = vr_value(s.values, r)
    skel_idx = []
    for wk in w:
        i = np.searchsorted(s.labels, wk)
        if i < len(s) and np.isclose(s.labels[i], wk):
            skel_idx.append(i)
        else:
            raise ValueError(f"breakpoint {wk} is not a label")
    skeleton = (vr_value(s.values[skel_idx], r) if len(skel_idx) > 1 else 0.0)
    blocks = 0.0
    for k in range(w.size - 1):
        sel = (s.labels >= w[k]) & (s.labels < w[k + 1])
        if sel.sum() > 1:
            blocks += vr_value(s.values[sel], r) ** 2
    rhs = skeleton + blocks ** 0.5
    return {"lhs": lhs, "rhs": float(rhs),
            "ratio": float(lhs / rhs) if rhs > 0 else
            (0.0 if lhs == 0 else float("inf"))}
