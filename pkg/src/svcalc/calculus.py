"""Metric divided differences and one-sided metric derivatives.

Divided differences are computed between ``eval(F, x0)`` and the aligned
sample ``eval_aligned(F, x, x0)``, so points that ``F(x)`` shares with
``F(x0)`` are represented by the very same floats and pair with themselves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from svcalc.set_core import (
    DEFAULT_TOL,
    CompactSet,
    Tolerances,
    hausdorff,
    metric_difference,
    metric_pairs,
    union,
)
from svcalc.svf import SetValuedFunction, default_resolution, eval, eval_aligned

SIDES = ("right", "left")


class AnchorError(ValueError):
    """Anchor is not a point of the sampled ``F(x0)``."""


class ConvergenceError(RuntimeError):
    """Operation needs a converged derivative field."""


def _sign(side: str) -> float:
    if side == "right":
        return 1.0
    if side == "left":
        return -1.0
    raise ValueError(f"side must be 'right' or 'left', got {side!r}")


@dataclass(frozen=True)
class HLadder:
    """Geometric step ladder ``h_k = h0 * ratio**k``, ``k = 0..count-1``."""

    h0: float = 0.25
    ratio: float = 0.5
    count: int = 12
    floor: float = 1e-6

    def __post_init__(self):
        if not self.h0 > 0:
            raise ValueError("h0 must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.count < 1:
            raise ValueError("count must be a positive integer")
        if not self.floor > 0:
            raise ValueError("floor must be positive")
        if self.steps[-1] < self.floor:
            raise ValueError(f"ladder step {self.steps[-1]:.3g} falls below the floor {self.floor:.3g}")

    @property
    def steps(self) -> np.ndarray:
        return self.h0 * self.ratio ** np.arange(self.count)

    def check(self, F: SetValuedFunction, x0: float, side: str) -> None:
        sigma = _sign(side)
        for h in self.steps:
            F.check_probe(x0, x0 + sigma * h)


DEFAULT_LADDER = HLadder()


def _anchor_index(A: CompactSet, y0, tol: Tolerances) -> int:
    y = np.atleast_1d(np.asarray(y0, dtype=np.float64))
    if y.shape != (A.dim,):
        raise AnchorError(f"anchor has shape {y.shape}, expected ({A.dim},)")
    d = np.sqrt(((A.points - y) ** 2).sum(axis=1))
    i = int(d.argmin())
    if d[i] > max(tol.dedup_tol, tol.proj_tie_tol):
        raise AnchorError(f"{y.tolist()} is not a point of the sampled F(x0)")
    return i


def anchored_groups(A: CompactSet, B: CompactSet, dx: float, tol: Tolerances = DEFAULT_TOL) -> list[CompactSet]:
    """Anchored divided differences for every point of ``A`` at once.

    Entry ``i`` is ``{(b - A[i]) / dx : (A[i], b) metric pair of (A, B)}``.
    """
    pairs = metric_pairs(A, B, tol)
    quotients = (pairs.second - pairs.first) / dx
    starts = np.searchsorted(pairs.ia, np.arange(len(A) + 1))
    return [CompactSet(quotients[starts[i] : starts[i + 1]], dedup_tol=tol.dedup_tol) for i in range(len(A))]


def _samples(F, x0, x, resolution, tol):
    if x == x0:
        raise ValueError("divided differences need x != x0")
    F.check_probe(x0, x)
    if resolution is None:
        resolution = default_resolution()
    return eval(F, x0, resolution, tol), eval_aligned(F, x, x0, resolution, tol)


def anchored_dd(
    F: SetValuedFunction,
    x0: float,
    x: float,
    y0,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> CompactSet:
    """``[x0, x] F |_{y0}``: quotients ``(y - y0)/(x - x0)`` over metric pairs ``(y0, y)``."""
    A, B = _samples(F, x0, x, resolution, tol)
    i = _anchor_index(A, y0, tol)
    pairs = metric_pairs(A, B, tol)
    sel = pairs.ia == i
    return CompactSet((pairs.second[sel] - A.points[i]) / (x - x0), dedup_tol=tol.dedup_tol)


def full_dd(
    F: SetValuedFunction,
    x0: float,
    x: float,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
    check: bool = True,
) -> CompactSet:
    """``[x0, x] F = (F(x) (-) F(x0)) / (x - x0)``.

    With ``check`` the result is compared against the union of the anchored
    divided differences and a ``RuntimeError`` is raised if they disagree.
    """
    A, B = _samples(F, x0, x, resolution, tol)
    diff = metric_difference(B, A, tol)
    result = CompactSet(diff.points / (x - x0), dedup_tol=tol.dedup_tol)
    if check:
        other = union(anchored_groups(A, B, x - x0, tol), dedup_tol=tol.dedup_tol)
        gap = hausdorff(result, other)
        if gap > 1e-9 * max(1.0, float(np.abs(result.points).max())):
            raise RuntimeError(f"full divided difference disagrees with anchored union by {gap:.3g}")
    return result


@dataclass
class DerivativeField:
    """Anchored one-sided derivative estimates at ``x0``.

    ``residuals[i, k]`` is the Hausdorff distance between the anchored divided
    differences of anchor ``i`` at ladder rungs ``k`` and ``k + 1``.
    """

    x0: float
    side: str
    anchors: CompactSet
    derivatives: list[CompactSet]
    residuals: np.ndarray
    steps: np.ndarray
    conv_tol: float
    anchor_converged: np.ndarray = field(repr=False)

    @property
    def converged(self) -> bool:
        return bool(np.all(self.anchor_converged))

    def final_residual(self) -> float:
        """Largest residual over anchors between the last two rungs (0 for a one-rung ladder)."""
        if self.residuals.shape[1] == 0:
            return 0.0
        return float(self.residuals[:, -1].max())

    def unconverged_anchors(self) -> np.ndarray:
        return self.anchors.points[~self.anchor_converged]

    def derivative_at(self, y0, tol: Tolerances = DEFAULT_TOL) -> CompactSet:
        return self.derivatives[_anchor_index(self.anchors, y0, tol)]

    def to_dict(self) -> dict:
        return {
            "x0": self.x0,
            "side": self.side,
            "anchors": [
                {"y": y.tolist(), "derivative_points": d.tolist(), "residuals": r.tolist()}
                for y, d, r in zip(self.anchors.points, self.derivatives, self.residuals)
            ],
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def default_conv_tol(F: SetValuedFunction, x0: float, resolution: int, ladder: HLadder) -> float:
    """``max(1e-6, 4 * length(F(x0)) / resolution, 8 * h_min)``.

    The ``h_min`` term admits the O(h) Cauchy residual of a smooth anchor at
    the finest rung.
    """
    length = F.image(x0).length
    return max(1e-6, 4.0 * length / resolution, 8.0 * float(ladder.steps[-1]))


def one_sided_derivative(
    F: SetValuedFunction,
    x0: float,
    side: str = "right",
    ladder: HLadder = DEFAULT_LADDER,
    conv_tol: float | None = None,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> DerivativeField:
    """Estimate ``D_{+/-} F(x0)|_y`` for every sampled anchor ``y``.

    The anchored divided differences are tracked down the ladder; an anchor
    converges when the Cauchy residual between the last two rungs is within
    ``conv_tol``.
    The estimate is the finest-rung divided difference.
    """
    sigma = _sign(side)
    if resolution is None:
        resolution = default_resolution()
    ladder.check(F, x0, side)
    if conv_tol is None:
        conv_tol = default_conv_tol(F, x0, resolution, ladder)
    A = eval(F, x0, resolution, tol)
    previous = None
    residuals = np.zeros((len(A), ladder.count - 1))
    for k, h in enumerate(ladder.steps):
        x = x0 + sigma * h
        groups = anchored_groups(A, eval_aligned(F, x, x0, resolution, tol), x - x0, tol)
        if previous is not None:
            residuals[:, k - 1] = [hausdorff(p, g) for p, g in zip(previous, groups)]
        previous = groups
    anchor_converged = residuals[:, -1] <= conv_tol if residuals.shape[1] else np.ones(len(A), dtype=bool)
    return DerivativeField(
        x0=float(x0),
        side=side,
        anchors=A,
        derivatives=previous,
        residuals=residuals,
        steps=ladder.steps,
        conv_tol=float(conv_tol),
        anchor_converged=anchor_converged,
    )


def derivative_union(field: DerivativeField, tol: Tolerances = DEFAULT_TOL) -> CompactSet:
    """``D_{+/-} F(x0)``: union of the anchored derivative sets."""
    if not field.converged:
        raise ConvergenceError(
            f"{(~field.anchor_converged).sum()} of {len(field.anchors)} anchors did not converge at x0={field.x0}"
        )
    return union(field.derivatives, dedup_tol=tol.dedup_tol)


def deviation_profile(
    F: SetValuedFunction,
    x0: float,
    side: str,
    h: float,
    field: DerivativeField,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Per-anchor ``haus([x0, x0 +/- h] F|_y, D F(x0)|_y)``."""
    sigma = _sign(side)
    if resolution is None:
        resolution = default_resolution()
    A = eval(F, x0, resolution, tol)
    if A != field.anchors or side != field.side or x0 != field.x0:
        raise AnchorError("derivative field was computed for a different x0, side or sampling")
    x = x0 + sigma * h
    F.check_probe(x0, x)
    groups = anchored_groups(A, eval_aligned(F, x, x0, resolution, tol), x - x0, tol)
    return np.array([hausdorff(g, d) for g, d in zip(groups, field.derivatives)])


def uniform_deviation(
    F: SetValuedFunction,
    x0: float,
    side: str,
    h: float,
    field: DerivativeField,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """``sup_y haus([x0, x0 +/- h] F|_y, D F(x0)|_y)`` over the sampled anchors."""
    return float(deviation_profile(F, x0, side, h, field, resolution, tol).max())
