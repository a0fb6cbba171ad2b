"""Bowen metric, separated sets and entropy growth estimates.

Orbits of every grid point are tabulated once in fixed point (int64), so
``rho_n`` between grid points is a max over integer column differences.
Tent and doubling tables are exact.  Rotation tables add the same rounded
angle to every point, which keeps them exactly isometric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from .algebraic import QuadraticIrrational
from .dyadic import Circle, Dyadic, GridPoint, as_fraction, axis_distance, grid_index_range
from .discretize import _approx_orbit, _exact_orbit, _predicted_exact_bits, working_precision
from .errors import ResourceLimit, ValidationError
from .systems import SystemSpec, exact_capable, lipschitz_bound

__all__ = [
    "bowen_distance",
    "OrbitTable",
    "orbit_table",
    "greedy_separated_set",
    "exact_max_separated",
    "SeparatedSetReport",
    "EntropyReport",
    "entropy_estimate",
    "min_sample_precision",
    "DEFAULT_MAX_POINTS",
]

DEFAULT_MAX_POINTS = 1 << 20
_TABLE_BITS = 60


def bowen_distance(spec: SystemSpec, x, y, n: int, w: Optional[int] = None) -> Dyadic:
    """``max_{0 <= j < n} d(T^j x, T^j y)``.

    Exact for dyadic points of systems with exact rational steps (when ``w``
    is omitted and the numbers stay small); otherwise both orbits run in
    fixed point at precision ``w`` and the result is the exact distance
    between those approximations.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    axis = spec.space.axes[0]
    u, v = spec.space.normalize(x)[0], spec.space.normalize(y)[0]
    if w is None and exact_capable(spec):
        p = max(_dprec(u), _dprec(v))
        if _predicted_exact_bits(spec, p, n) <= 1 << 16:
            best = Fraction(0)
            for _ in range(n):
                best = max(best, axis_distance(axis, u, v))
                u, v = _exact_orbit(spec, u, 1), _exact_orbit(spec, v, 1)
            return _to_dyadic(best)
    if w is None:
        w = working_precision(lipschitz_bound(spec), n, 32)
    p = max(_dprec(u), _dprec(v))
    W = max(w, p)
    a = _fixed(u, W)
    b = _fixed(v, W)
    best = Fraction(0)
    for j in range(n):
        best = max(best, axis_distance(axis, Fraction(a, 1 << W), Fraction(b, 1 << W)))
        if j + 1 < n:
            a, b = _approx_orbit(spec, a, W, 1), _approx_orbit(spec, b, W, 1)
    return _to_dyadic(best)


def _dprec(x: Fraction) -> int:
    d = x.denominator
    if d & (d - 1):
        raise ValidationError(f"{x} is not a dyadic point")
    return d.bit_length() - 1


def _fixed(x: Fraction, W: int) -> int:
    return x.numerator << (W - _dprec(x))


def _to_dyadic(x: Fraction) -> Dyadic:
    try:
        return Dyadic.from_value(x)
    except ValueError:
        return Dyadic(math.ceil(x * (1 << 64)), 64)


@dataclass
class OrbitTable:
    """Orbits of all precision-``r`` grid points, ``n`` columns at fixed-point precision ``W``."""

    spec: SystemSpec
    r: int
    W: int
    first_index: int
    data: np.ndarray  # shape (points, n)
    circle: bool
    exact: bool

    @property
    def points(self) -> int:
        return self.data.shape[0]

    def grid_point(self, i: int) -> GridPoint:
        return GridPoint((self.first_index + i,), self.r)

    def diffs(self, rows: np.ndarray, i: int, n: int) -> np.ndarray:
        """``rho_n`` (integer, scale ``2**W``) from point ``i`` to each of ``rows``."""
        d = np.abs(self.data[rows, :n] - self.data[i, :n])
        if self.circle:
            d = np.minimum(d, (1 << self.W) - d)
        return d.max(axis=1)

    def eps_units(self, eps: Fraction) -> int:
        """Smallest integer ``k`` with ``k * 2**-W >= eps``."""
        return math.ceil(eps * (1 << self.W))


def orbit_table(spec: SystemSpec, n: int, r: int, *, max_points: int = DEFAULT_MAX_POINTS) -> OrbitTable:
    if spec.dim != 1:
        raise ValidationError("entropy tools handle one-dimensional systems")
    axis = spec.space.axes[0]
    lo, hi = grid_index_range(axis, r)
    P = hi - lo + 1
    if P > max_points:
        raise ResourceLimit(f"grid has {P} points, cap is {max_points}")
    circle = isinstance(axis, Circle)
    idx = np.arange(lo, hi + 1, dtype=np.int64)
    kind = spec.kind
    if kind in ("doubling", "tent") and r <= _TABLE_BITS:
        W, exact = r, True
        N = np.int64(1) << W
        cols = [idx.copy()]
        m = idx.copy()
        for _ in range(n - 1):
            m = m * 2
            if kind == "doubling":
                m = m & (N - 1)
            else:
                m = np.where(m > N, 2 * N - m, m)
            cols.append(m.copy())
    elif kind == "rotation":
        W, exact = _TABLE_BITS, isinstance(spec.alpha, Fraction) and _is_grid(spec.alpha, r)
        a = spec.alpha
        A = a.nearest_scaled(W) if isinstance(a, QuadraticIrrational) else round(a * (1 << W))
        mask = (1 << W) - 1
        base = idx << np.int64(W - r)
        cols = [(base + np.int64((j * A) & mask)) & np.int64(mask) for j in range(n)]
    else:
        w = working_precision(lipschitz_bound(spec), n, r + 2)
        W = min(w, _TABLE_BITS)
        exact = False
        cols = [[] for _ in range(n)]
        for m in range(lo, hi + 1):
            M = m << (w - r) if w >= r else m
            for j in range(n):
                cols[j].append(_shift_round(M, w - W))
                if j + 1 < n:
                    M = _approx_orbit(spec, M, w, 1)
        cols = [np.array(c, dtype=np.int64) for c in cols]
    data = np.stack(cols, axis=1) if n else np.zeros((P, 0), dtype=np.int64)
    return OrbitTable(spec, r, W, lo, np.ascontiguousarray(data), circle, exact)


def _is_grid(a: Fraction, r: int) -> bool:
    return (a * (1 << r)).denominator == 1


def _shift_round(M: int, k: int) -> int:
    if k <= 0:
        return M << -k
    return (M + (1 << (k - 1))) >> k


def greedy_separated_set(
    spec: SystemSpec,
    n: int,
    eps,
    r: int,
    *,
    table: Optional[OrbitTable] = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> list:
    """Scan the precision-``r`` grid in order and keep points ``rho_n``-separated by at least ``eps``.

    Returns the admitted ``GridPoint``s, a maximal ``(n, eps)``-separated
    subset of the grid.  Only admitted points within ``eps`` in the base
    coordinate need checking, since ``rho_n`` dominates that distance.
    """
    idx = _greedy_indices(spec, n, as_fraction(eps), r, table, max_points)
    lo = grid_index_range(spec.space.axes[0], r)[0]
    return [GridPoint((lo + int(i),), r) for i in idx]


def _greedy_indices(spec, n, eps: Fraction, r, table, max_points) -> np.ndarray:
    if n < 1:
        raise ValidationError("n must be >= 1")
    if eps <= 0:
        raise ValidationError("eps must be positive")
    tab = table if table is not None and table.data.shape[1] >= n else orbit_table(spec, n, r, max_points=max_points)
    P = tab.points
    e = tab.eps_units(eps)
    # base-coordinate window in grid steps: points >= eps apart are separated already
    win = math.ceil(eps * (1 << r))
    adm = np.empty(P, dtype=np.int64)
    k = 0
    for i in range(P):
        j0 = int(np.searchsorted(adm[:k], i - win + 1)) if k else 0
        rows = adm[j0:k]
        if tab.circle and i + win - 1 >= P and k:
            j1 = int(np.searchsorted(adm[:k], i + win - P))
            rows = np.concatenate([adm[: min(j1, j0)], rows])
        if rows.size and tab.diffs(rows, i, n).min() < e:
            continue
        adm[k] = i
        k += 1
    return adm[:k].copy()


def exact_max_separated(
    spec: SystemSpec, n: int, eps, r: int, *, table: Optional[OrbitTable] = None, max_points: int = 64
) -> int:
    """Maximum size of an ``(n, eps)``-separated subset of the grid, by maximum clique search.

    Points are vertices; two are joined when ``rho_n >= eps``, so separated
    sets are cliques.  Limited to small grids.
    """
    eps = as_fraction(eps)
    tab = table if table is not None and table.data.shape[1] >= n else orbit_table(spec, n, r)
    P = tab.points
    if P > max_points:
        raise ResourceLimit(f"exact search limited to {max_points} points, grid has {P}")
    e = tab.eps_units(eps)
    G = nx.Graph()
    G.add_nodes_from(range(P))
    allr = np.arange(P)
    for i in range(P):
        d = tab.diffs(allr, i, n)
        G.add_edges_from((i, int(j)) for j in np.nonzero(d >= e)[0] if j > i)
    _, size = nx.max_weight_clique(G, weight=None)
    return int(size)


@dataclass
class SeparatedSetReport:
    system: str
    n: int
    eps: Fraction
    r: int
    count: int
    ratio: Optional[float] = None
    slope: Optional[float] = None


@dataclass
class EntropyReport:
    rows: list = field(default_factory=list)
    slope_tail: Optional[float] = None
    undersampled: bool = False

    @property
    def counts(self) -> list:
        return [row.count for row in self.rows]

    def tail_ratios(self) -> list:
        half = _tail_start(len(self.rows))
        return [row.ratio for row in self.rows[half:] if row.ratio is not None]

    def to_csv(self) -> str:
        lines = ["n,count,ratio,slope_tail"]
        slope = "" if self.slope_tail is None else f"{self.slope_tail:.6f}"
        for row in self.rows:
            ratio = "" if row.ratio is None else f"{row.ratio:.6f}"
            lines.append(f"{row.n},{row.count},{ratio},{slope}")
        return "\n".join(lines) + "\n"


def _tail_start(m: int) -> int:
    return m // 2


def min_sample_precision(spec: SystemSpec, n: int, eps) -> int:
    """``ceil(log2(1/eps)) + n * ceil(log2 L)``: the grid resolution that avoids undercounting."""
    eps = as_fraction(eps)
    L = lipschitz_bound(spec).to_fraction()
    lg = 0 if L <= 1 else math.ceil(math.log2(L))
    return math.ceil(math.log2(1 / eps)) + n * lg


def entropy_estimate(
    spec: SystemSpec, n_range: Sequence[int], eps, r: int, *, max_points: int = DEFAULT_MAX_POINTS
) -> EntropyReport:
    """Greedy separated-set counts over ``n_range`` and the least-squares slope of ``log2 count`` over its top half."""
    eps = as_fraction(eps)
    ns = sorted(set(n_range))
    rep = EntropyReport()
    if not ns:
        return rep
    tab = orbit_table(spec, max(ns), r, max_points=max_points)
    prev = None
    for n in ns:
        cnt = len(_greedy_indices(spec, n, eps, r, tab, max_points))
        ratio = None if prev is None else cnt / prev
        rep.rows.append(SeparatedSetReport(spec.id, n, eps, r, cnt, ratio))
        prev = cnt
    tail = rep.rows[_tail_start(len(rep.rows)):]
    if len(tail) >= 2:
        x = np.array([row.n for row in tail], dtype=float)
        y = np.log2(np.array([row.count for row in tail], dtype=float))
        rep.slope_tail = float(np.polyfit(x, y, 1)[0])
    elif len(rep.rows) >= 2:
        rep.slope_tail = 0.0
    for row in rep.rows:
        row.slope = rep.slope_tail
    rep.undersampled = r < min_sample_precision(spec, ns[-1], eps)
    return rep
