"""Size estimation for unknown finite sets in a partial order.

Two related estimators over an abstract order oracle:

* Up-sets.  If the sampled set T is an up-set (whenever it contains x
  it contains everything above x), then the count N_n of sample points
  dominated by another sample point, scaled as N_n/n, estimates the
  mass of the up-closure of the sample; and n * |closure| / N_n
  estimates |T|.

* Convex sets.  If T is order-convex (contains everything sandwiched
  between two of its elements), the analogous count uses points with
  both a dominating and a dominated companion in the sample, and the
  closure is the order-convex hull.

Both counts are leave-one-out estimators: point i is a member of the
region built from the others exactly when a witness (one for up-sets,
a pair for convex sets) exists among the remaining points.

The built-in posets cover the classical specializations: equality only
(label collision counting, the birthday regime), reversed naturals
(sample-maximum estimation, the serial-number regime), the reversed
componentwise product order (staircase shapes), and ancestry in the
infinite rooted tree (subtrees and subforests).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Antichain",
    "ReversedNaturals",
    "ProductOrder",
    "TreeAncestor",
    "upset_dominated_count",
    "upset_closure_size",
    "estimate_upset_size",
    "upset_mse_bound",
    "convex_sandwiched_count",
    "convex_closure_size",
    "estimate_convex_size",
    "poset_convex_mse_bound",
]

_GRID_CELL_CAP = 2_000_000


class Antichain:
    """No two distinct elements comparable: x is below y iff x == y."""

    @staticmethod
    def leq(x, y) -> bool:
        return x == y

    @staticmethod
    def upset_closure_size(sample) -> int:
        return len(set(sample))

    @staticmethod
    def convex_closure_size(sample) -> int:
        # Sandwiching forces equality, so the convex hull is the
        # sample's distinct values.
        return len(set(sample))


class ReversedNaturals:
    """Positive integers ordered backwards: x is below y iff y <= x.

    Up-sets are initial segments {1..k}; the up-closure of a sample is
    {1..max}, so no ground-set enumeration is ever needed.
    """

    @staticmethod
    def leq(x, y) -> bool:
        return y <= x

    @staticmethod
    def upset_closure_size(sample) -> int:
        return int(max(sample))

    @staticmethod
    def convex_closure_size(sample) -> int:
        return int(max(sample)) - int(min(sample)) + 1


class ProductOrder:
    """Tuples of positive integers, reversed componentwise.

    x is below y iff y_i <= x_i for every coordinate.  Up-sets are the
    staircase shapes (unions of boxes anchored at (1, ..., 1)).
    """

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d must be a positive integer")
        self.d = int(d)

    def _check(self, x):
        if len(x) != self.d:
            raise ValueError(f"element {x!r} does not have {self.d} coordinates")
        return tuple(int(v) for v in x)

    def leq(self, x, y) -> bool:
        x, y = self._check(x), self._check(y)
        return all(yv <= xv for xv, yv in zip(x, y))

    def upset_closure_size(self, sample) -> int:
        pts = [self._check(x) for x in sample]
        if not pts:
            raise ValueError("empty sample")
        if any(min(p) < 1 for p in pts):
            raise ValueError("coordinates must be positive integers")
        if self.d == 2:
            # Union of boxes [1..a] x [1..b]: sum of suffix-running
            # column heights.
            max_a = max(p[0] for p in pts)
            best = [0] * (max_a + 1)
            for a, b in pts:
                if b > best[a]:
                    best[a] = b
            total, running = 0, 0
            for a in range(max_a, 0, -1):
                running = max(running, best[a])
                total += running
            return total
        return self._grid_count(pts, upper=True, lower=False)

    def convex_closure_size(self, sample) -> int:
        pts = [self._check(x) for x in sample]
        if not pts:
            raise ValueError("empty sample")
        return self._grid_count(pts, upper=True, lower=True)

    def _grid_count(self, pts, upper: bool, lower: bool) -> int:
        maxs = [max(p[i] for p in pts) for i in range(self.d)]
        cells = 1
        for m in maxs:
            cells *= m
        if cells > _GRID_CELL_CAP:
            raise ValueError("closure enumeration grid too large")
        shape = tuple(maxs)
        cover_up = np.zeros(shape, dtype=bool)  # z <= some sample point
        for p in pts:
            cover_up[tuple(slice(0, v) for v in p)] = True
        if not lower:
            return int(cover_up.sum())
        cover_down = np.zeros(shape, dtype=bool)  # z >= some sample point
        for p in pts:
            cover_down[tuple(slice(v - 1, None) for v in p)] = True
        return int((cover_up & cover_down).sum())


class TreeAncestor:
    """Nodes of the infinite rooted tree, ordered by ancestry.

    Elements are paths from the root, encoded as tuples of child
    indices (the empty tuple is the root).  x is below y iff y is x
    itself or an ancestor of x, so the set of elements above x is the
    finite chain of x's prefixes.
    """

    @staticmethod
    def _check(x):
        return tuple(x)

    @staticmethod
    def leq(x, y) -> bool:
        x, y = tuple(x), tuple(y)
        return len(y) <= len(x) and x[: len(y)] == y

    @staticmethod
    def upset_closure_size(sample) -> int:
        nodes = set()
        for x in sample:
            x = tuple(x)
            for k in range(len(x) + 1):
                nodes.add(x[:k])
        if not nodes:
            raise ValueError("empty sample")
        return len(nodes)

    @staticmethod
    def convex_closure_size(sample) -> int:
        points = {tuple(x) for x in sample}
        if not points:
            raise ValueError("empty sample")
        candidates = set()
        for x in points:
            for k in range(len(x) + 1):
                candidates.add(x[:k])
        # A candidate is a prefix of some sample node, hence has a
        # sampled descendant-or-self; keep those that also have a
        # sampled ancestor-or-self.
        count = 0
        for z in candidates:
            if any(z[: len(s)] == s for s in points if len(s) <= len(z)):
                count += 1
        return count


def _leq_fn(oracle):
    leq = getattr(oracle, "leq", oracle)
    if not callable(leq):
        raise TypeError("order oracle must be callable or expose a leq method")
    return leq


def upset_dominated_count(sample, oracle) -> int:
    """#{i : some other sample point is below sample[i]}."""
    sample = list(sample)
    leq = _leq_fn(oracle)
    count = 0
    for i, x in enumerate(sample):
        for j, y in enumerate(sample):
            if j != i and leq(y, x):
                count += 1
                break
    return count


def upset_closure_size(sample, oracle) -> int:
    """Size of the union of everything above some sample point."""
    sample = list(sample)
    if not sample:
        raise ValueError("empty sample")
    fn = getattr(oracle, "upset_closure_size", None)
    if fn is None:
        raise TypeError("oracle does not support up-closure enumeration")
    return int(fn(sample))


def estimate_upset_size(sample, oracle) -> float:
    """n * |up-closure of sample| / N_n.

    For the equality-only order this reduces exactly to
    n * distinct / (number of collided points); for reversed naturals,
    to max scaled by n/(n-1) when the maximum is unique, and to max
    otherwise.
    """
    sample = list(sample)
    n = len(sample)
    dominated = upset_dominated_count(sample, oracle)
    if dominated == 0:
        raise ValueError("no dominated points; estimate undefined")
    return n * upset_closure_size(sample, oracle) / dominated


def upset_mse_bound(n: int) -> float:
    """(8/e + 1/2)/n: MSE bound for N_n/n against the up-closure mass."""
    if n < 3:
        raise ValueError("bound requires n >= 3")
    return (8.0 / math.e + 0.5) / n


def convex_sandwiched_count(sample, oracle) -> int:
    """#{i : sample[i] has both a dominated and a dominating companion}.

    The two witnesses are quantified independently over the other
    indices, so a single duplicate supplies both at once (equality
    chains count).
    """
    sample = list(sample)
    leq = _leq_fn(oracle)
    n = len(sample)
    count = 0
    for i, x in enumerate(sample):
        below = any(leq(sample[j], x) for j in range(n) if j != i)
        if not below:
            continue
        above = any(leq(x, sample[k]) for k in range(n) if k != i)
        if above:
            count += 1
    return count


def convex_closure_size(sample, oracle) -> int:
    """Size of the order-convex hull of the sample."""
    sample = list(sample)
    if not sample:
        raise ValueError("empty sample")
    fn = getattr(oracle, "convex_closure_size", None)
    if fn is None:
        raise TypeError("oracle does not support convex-closure enumeration")
    return int(fn(sample))


def estimate_convex_size(sample, oracle) -> float:
    """n * |order-convex hull of sample| / (sandwiched count)."""
    sample = list(sample)
    n = len(sample)
    sandwiched = convex_sandwiched_count(sample, oracle)
    if sandwiched == 0:
        raise ValueError("no sandwiched points; estimate undefined")
    return n * convex_closure_size(sample, oracle) / sandwiched


def poset_convex_mse_bound(n: int) -> float:
    """(16/e + 1/2)/n: MSE bound for the sandwiched fraction."""
    if n < 3:
        raise ValueError("bound requires n >= 3")
    return (16.0 / math.e + 0.5) / n
