"""Finite compact sets in R^n and the metric constructions built on them.

A :class:`CompactSet` is a nonempty finite point cloud kept in canonical
(lexicographic, deduplicated) order, so set equality is array equality.
Everything here is exact brute force over the finite samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from svcalc import _kernels


class DimensionError(ValueError):
    """Raised when point or set dimensions do not agree."""


@dataclass(frozen=True)
class Tolerances:
    proj_tie_tol: float = 1e-9
    dedup_tol: float = 1e-12

    def __post_init__(self):
        if self.proj_tie_tol < 0 or self.dedup_tol < 0:
            raise ValueError("tolerances must be nonnegative")


DEFAULT_TOL = Tolerances()


def _canonical(points: np.ndarray, dedup_tol: float) -> np.ndarray:
    order = np.lexsort(points.T[::-1])
    pts = points[order]
    if pts.shape[0] < 2:
        return pts
    if pts.shape[1] == 1:
        # sorted 1-d: neighbours are the only candidates
        keep = np.ones(pts.shape[0], dtype=bool)
        keep[1:] = np.diff(pts[:, 0]) > dedup_tol
        return pts[keep]
    if dedup_tol == 0.0:
        keep = np.ones(pts.shape[0], dtype=bool)
        keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
        return pts[keep]
    # greedy: drop any point within dedup_tol of an earlier kept point
    close = cKDTree(pts).query_pairs(r=dedup_tol, output_type="ndarray")
    if close.size == 0:
        return pts
    neighbours: dict[int, list[int]] = {}
    for i, j in close:
        lo, hi = (i, j) if i < j else (j, i)
        neighbours.setdefault(hi, []).append(lo)
    keep = np.ones(pts.shape[0], dtype=bool)
    for k in range(pts.shape[0]):
        for lo in neighbours.get(k, ()):
            if keep[lo]:
                keep[k] = False
                break
    return pts[keep]


class CompactSet:
    """Nonempty finite subset of R^n in canonical lexicographic order."""

    __slots__ = ("_points",)

    def __init__(self, points, dedup_tol: float = DEFAULT_TOL.dedup_tol):
        arr = np.array(points, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("a CompactSet needs at least one point of dimension >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("CompactSet points must be finite")
        if dedup_tol < 0:
            raise ValueError("dedup_tol must be nonnegative")
        # + 0.0 folds -0.0 into 0.0
        arr = _canonical(arr + 0.0, dedup_tol)
        arr.flags.writeable = False
        self._points = arr

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "CompactSet":
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        arr.flags.writeable = False
        obj._points = arr
        return obj

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def __len__(self) -> int:
        return self._points.shape[0]

    def __iter__(self):
        return iter(self._points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompactSet):
            return NotImplemented
        return np.array_equal(self._points, other._points)

    def __hash__(self):
        return hash(self._points.tobytes())

    def __repr__(self) -> str:
        if self.dim == 1:
            body = ", ".join(repr(float(v)) for v in self._points[:8, 0])
        else:
            body = ", ".join(str(tuple(float(c) for c in p)) for p in self._points[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"CompactSet({{{body}{more}}}, n={self.dim}, size={len(self)})"

    def tolist(self) -> list[list[float]]:
        return self._points.tolist()


def as_set(obj, dedup_tol: float = DEFAULT_TOL.dedup_tol) -> CompactSet:
    if isinstance(obj, CompactSet):
        return obj
    return CompactSet(obj, dedup_tol=dedup_tol)


def _as_point(x, dim: int | None = None) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if p.ndim != 1:
        raise ValueError("a point must be a 1-d coordinate vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    if dim is not None and p.shape[0] != dim:
        raise DimensionError(f"point has dimension {p.shape[0]}, expected {dim}")
    return p


def _check_dims(*sets: CompactSet) -> int:
    dims = {s.dim for s in sets}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def union(sets: Iterable[CompactSet], dedup_tol: float = DEFAULT_TOL.dedup_tol) -> CompactSet:
    sets = list(sets)
    _check_dims(*sets)
    return CompactSet(np.vstack([s.points for s in sets]), dedup_tol=dedup_tol)


# ---------------------------------------------------------------------------
# distances and projections
# ---------------------------------------------------------------------------


def dist_point_set(x, A: CompactSet) -> float:
    p = _as_point(x, A.dim)
    return float(np.sqrt(((A.points - p) ** 2).sum(axis=1)).min())


def proj_point_set(x, A: CompactSet, tol: Tolerances = DEFAULT_TOL) -> CompactSet:
    """All points of ``A`` within ``proj_tie_tol`` of the minimal distance to ``x``."""
    p = _as_point(x, A.dim)
    d = np.sqrt(((A.points - p) ** 2).sum(axis=1))
    return CompactSet._trusted(A.points[d <= d.min() + tol.proj_tie_tol])


def set_norm(A: CompactSet) -> float:
    return float(np.sqrt((A.points**2).sum(axis=1)).max())


def scale_translate(A: CompactSet, lam: float, t=None, tol: Tolerances = DEFAULT_TOL) -> CompactSet:
    """``{lam*a + t : a in A}``."""
    shift = np.zeros(A.dim) if t is None else _as_point(t, A.dim)
    return CompactSet(lam * A.points + shift, dedup_tol=tol.dedup_tol)


# ---------------------------------------------------------------------------
# metric pairs and Hausdorff distance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricPairSet:
    """Metric pairs of ``(A, B)`` as index arrays into the canonical point lists.

    ``first[k]``/``second[k]`` are the coordinates of the k-th pair; pairs are
    sorted by ``(ia, ib)`` which is lexicographic in ``(a, b)`` because both
    sets are canonical.
    """

    A: CompactSet
    B: CompactSet
    ia: np.ndarray
    ib: np.ndarray

    @property
    def first(self) -> np.ndarray:
        return self.A.points[self.ia]

    @property
    def second(self) -> np.ndarray:
        return self.B.points[self.ib]

    def __len__(self) -> int:
        return self.ia.shape[0]

    def lengths(self) -> np.ndarray:
        return np.sqrt(((self.first - self.second) ** 2).sum(axis=1))

    def tolist(self) -> list[list[list[float]]]:
        return [[a, b] for a, b in zip(self.first.tolist(), self.second.tolist())]


def metric_pairs(A: CompactSet, B: CompactSet, tol: Tolerances = DEFAULT_TOL) -> MetricPairSet:
    _check_dims(A, B)
    ia, ib = _kernels.pair_indices(A.points, B.points, tol.proj_tie_tol)
    order = np.lexsort((ib, ia))
    return MetricPairSet(A, B, ia[order], ib[order])


def hausdorff_via_pairs(A: CompactSet, B: CompactSet, tol: Tolerances = DEFAULT_TOL) -> float:
    """Hausdorff distance as the longest metric pair."""
    return float(metric_pairs(A, B, tol).lengths().max())


def hausdorff_direct(A: CompactSet, B: CompactSet) -> float:
    """Classical Hausdorff distance, max of the two directed distances.

    Deliberately independent of the pair kernels; used as a cross-check.
    """
    _check_dims(A, B)
    D = cdist(A.points, B.points)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def hausdorff(A: CompactSet, B: CompactSet) -> float:
    """Fast Hausdorff distance through the nearest-distance kernel."""
    _check_dims(A, B)
    if len(A) == 1 and len(B) == 1:
        return float(np.sqrt(((A.points[0] - B.points[0]) ** 2).sum()))
    return float(max(_kernels.nearest_dist(A.points, B.points).max(), _kernels.nearest_dist(B.points, A.points).max()))


def metric_difference(A: CompactSet, B: CompactSet, tol: Tolerances = DEFAULT_TOL) -> CompactSet:
    """``A (-) B = {a - b : (a, b) metric pair}``."""
    pairs = metric_pairs(A, B, tol)
    return CompactSet(pairs.first - pairs.second, dedup_tol=tol.dedup_tol)


def metric_chains(sets: Sequence[CompactSet], tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """All metric chains through ``sets`` as an array of shape ``(k, m+1, n)``.

    Chains are enumerated depth-first along the pair adjacency of consecutive
    sets, so only tuples that are chains are ever built.
    """
    if len(sets) == 0:
        raise ValueError("metric_chains needs at least one set")
    n = _check_dims(*sets)
    if len(sets) == 1:
        return sets[0].points[:, None, :].copy()
    adjacency = []
    for left, right in zip(sets[:-1], sets[1:]):
        pairs = metric_pairs(left, right, tol)
        starts = np.searchsorted(pairs.ia, np.arange(len(left) + 1))
        adjacency.append((pairs.ib, starts))

    chains: list[tuple[int, ...]] = []

    def extend(prefix: list[int]):
        depth = len(prefix) - 1
        if depth == len(adjacency):
            chains.append(tuple(prefix))
            return
        ib, starts = adjacency[depth]
        i = prefix[-1]
        for j in ib[starts[i] : starts[i + 1]]:
            prefix.append(int(j))
            extend(prefix)
            prefix.pop()

    for i0 in range(len(sets[0])):
        extend([i0])

    idx = np.array(chains, dtype=np.int64)
    out = np.empty((idx.shape[0], len(sets), n))
    for k, s in enumerate(sets):
        out[:, k, :] = s.points[idx[:, k]]
    return out


def metric_linear_combination(
    weights: Sequence[float], sets: Sequence[CompactSet], tol: Tolerances = DEFAULT_TOL
) -> CompactSet:
    if len(weights) != len(sets):
        raise ValueError(f"{len(weights)} weights for {len(sets)} sets")
    chains = metric_chains(sets, tol)
    combo = np.einsum("k,ckn->cn", np.asarray(weights, dtype=np.float64), chains)
    return CompactSet(combo, dedup_tol=tol.dedup_tol)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def to_json(A: CompactSet) -> str:
    return json.dumps(A.tolist())


def from_json(text: str, dedup_tol: float = DEFAULT_TOL.dedup_tol) -> CompactSet:
    data = json.loads(text)
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ValueError("expected a JSON array of arrays of numbers")
    return CompactSet(data, dedup_tol=dedup_tol)


def to_text(A: CompactSet) -> str:
    return "".join(" ".join(repr(float(c)) for c in p) + "\n" for p in A.points)


def from_text(text: str, dedup_tol: float = DEFAULT_TOL.dedup_tol) -> CompactSet:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    return CompactSet([[float(c) for c in r] for r in rows], dedup_tol=dedup_tol)
