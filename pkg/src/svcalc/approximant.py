"""Local metric linear approximants and empirical approximation orders."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from svcalc.calculus import (
    DEFAULT_LADDER,
    ConvergenceError,
    DerivativeField,
    HLadder,
    _sign,
    one_sided_derivative,
    uniform_deviation,
)
from svcalc.set_core import DEFAULT_TOL, CompactSet, Tolerances, hausdorff_via_pairs
from svcalc.svf import SetValuedFunction, default_resolution, eval, eval_aligned


class InsufficientDataError(ValueError):
    """Fewer than three usable rungs above the noise floor."""


@dataclass
class LocalLinearApproximant:
    """``L F`` at ``x0``: ``{y} + (x - x0) D F(x0)|_y`` unioned over anchors.

    The right field is used for ``x >= x0`` and the left field for ``x < x0``;
    either may be ``None`` when only one side was built.
    """

    x0: float
    F_at_x0: CompactSet
    right_field: DerivativeField | None
    left_field: DerivativeField | None
    resolution: int
    tol: Tolerances = DEFAULT_TOL

    def field_for(self, x: float) -> DerivativeField:
        fld = self.right_field if x >= self.x0 else self.left_field
        if fld is None:
            side = "right" if x >= self.x0 else "left"
            raise ValueError(f"approximant has no {side} branch at x={x}")
        return fld


def build_approximant(
    F: SetValuedFunction,
    x0: float,
    ladder: HLadder = DEFAULT_LADDER,
    conv_tol: float | None = None,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
    sides: tuple[str, ...] = ("right", "left"),
) -> LocalLinearApproximant:
    """Estimate the requested one-sided derivatives and assemble the approximant.

    Raises :class:`ConvergenceError` if any requested side fails to converge.
    """
    if resolution is None:
        resolution = default_resolution()
    fields = {}
    for side in sides:
        fld = one_sided_derivative(F, x0, side, ladder, conv_tol, resolution, tol)
        if not fld.converged:
            raise ConvergenceError(
                f"{side} derivative of {F.name} at x0={x0} did not converge "
                f"({(~fld.anchor_converged).sum()} anchors above conv_tol={fld.conv_tol:.3g})"
            )
        fields[side] = fld
    return LocalLinearApproximant(
        x0=float(x0),
        F_at_x0=eval(F, x0, resolution, tol),
        right_field=fields.get("right"),
        left_field=fields.get("left"),
        resolution=resolution,
        tol=tol,
    )


def approximant_anchored(L: LocalLinearApproximant, y0, x: float) -> CompactSet:
    y = np.atleast_1d(np.asarray(y0, dtype=np.float64))
    fld = L.field_for(x)
    D = fld.derivative_at(y, L.tol)
    if x == L.x0:
        return CompactSet(y[None, :], dedup_tol=L.tol.dedup_tol)
    return CompactSet(y + (x - L.x0) * D.points, dedup_tol=L.tol.dedup_tol)


def approximant_eval(L: LocalLinearApproximant, x: float) -> CompactSet:
    if x == L.x0:
        return L.F_at_x0
    fld = L.field_for(x)
    dx = x - L.x0
    pts = np.vstack([y + dx * D.points for y, D in zip(fld.anchors.points, fld.derivatives)])
    return CompactSet(pts, dedup_tol=L.tol.dedup_tol)


@dataclass
class ErrorCurve:
    x0: float
    side: str
    h: np.ndarray
    err: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("h,err\n")
        for h, e in zip(self.h, self.err):
            buf.write(f"{h:.17g},{e:.17g}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"x0": self.x0, "side": self.side, "h": self.h.tolist(), "err": self.err.tolist()}


def error_curve(
    F: SetValuedFunction,
    L: LocalLinearApproximant,
    ladder: HLadder = DEFAULT_LADDER,
    side: str = "right",
    resolution: int | None = None,
    tol: Tolerances | None = None,
) -> ErrorCurve:
    """``haus(F(x0 +/- h), L F(x0 +/- h))`` down the ladder.

    ``side="both"`` records the larger of the two one-sided errors per rung.
    """
    sides = ("right", "left") if side == "both" else (side,)
    if resolution is None:
        resolution = L.resolution
    tol = L.tol if tol is None else tol
    for s in sides:
        ladder.check(F, L.x0, s)
    errs = np.zeros(ladder.count)
    for k, h in enumerate(ladder.steps):
        for s in sides:
            x = L.x0 + _sign(s) * h
            Fx = eval_aligned(F, x, L.x0, resolution, tol)
            errs[k] = max(errs[k], hausdorff_via_pairs(Fx, approximant_eval(L, x), tol))
    return ErrorCurve(L.x0, side, ladder.steps.copy(), errs)


@dataclass
class OrderFit:
    """Least-squares line through ``(log h, log err)``.

    ``exact`` marks a curve that is entirely at or below the noise floor; its
    slope is ``inf``.
    """

    slope: float
    intercept: float
    rms_residual: float
    rungs_used: int
    h_range: tuple[float, float]
    exact: bool = False

    def to_dict(self) -> dict:
        return {
            "slope": None if self.exact else self.slope,
            "intercept": None if self.exact else self.intercept,
            "rms_residual": self.rms_residual,
            "rungs_used": self.rungs_used,
            "h_range": list(self.h_range),
            "exact": self.exact,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def fit_order(curve: ErrorCurve, noise_floor=0.0) -> OrderFit:
    """Empirical order of ``curve``; rungs with ``err <= noise_floor`` are dropped.

    ``noise_floor`` is a scalar or one value per rung.
    """
    h = np.asarray(curve.h, dtype=np.float64)
    err = np.asarray(curve.err, dtype=np.float64)
    floor = np.broadcast_to(np.asarray(noise_floor, dtype=np.float64), err.shape)
    use = err > floor
    if not use.any():
        return OrderFit(math.inf, math.nan, 0.0, 0, (float(h.min()), float(h.max())), exact=True)
    if use.sum() < 3:
        raise InsufficientDataError(f"only {int(use.sum())} rungs above the noise floor; need 3")
    lh, le = np.log(h[use]), np.log(err[use])
    slope, intercept = np.polyfit(lh, le, 1)
    resid = le - (slope * lh + intercept)
    return OrderFit(
        float(slope),
        float(intercept),
        float(np.sqrt(np.mean(resid**2))),
        int(use.sum()),
        (float(h[use].min()), float(h[use].max())),
    )


def derivative_uncertainty(F: SetValuedFunction, L_or_fields, resolution: int) -> float:
    """Resolution of a derivative estimate: ``max(4 * length(F(x0)) / N, 2 * final residual)``."""
    if isinstance(L_or_fields, LocalLinearApproximant):
        fields = [f for f in (L_or_fields.right_field, L_or_fields.left_field) if f is not None]
    elif isinstance(L_or_fields, DerivativeField):
        fields = [L_or_fields]
    else:
        fields = list(L_or_fields)
    x0 = fields[0].x0
    grid = 4.0 * F.image(x0).length / resolution
    return max([grid] + [2.0 * f.final_residual() for f in fields])


def error_noise_floor(F: SetValuedFunction, L: LocalLinearApproximant, steps) -> np.ndarray:
    """Per-rung floor ``c * h`` below which approximation errors are not resolved."""
    return derivative_uncertainty(F, L, L.resolution) * np.asarray(steps, dtype=np.float64)


def little_o_ratios(curve: ErrorCurve, noise_floor=0.0) -> np.ndarray:
    """``err(h)/h`` per rung, with errors at or below the floor counted as zero."""
    err = np.where(curve.err > noise_floor, curve.err, 0.0)
    return err / curve.h


def is_little_o(curve: ErrorCurve, noise_floor=0.0, last: int = 4) -> bool:
    """True when ``err(h)/h`` is non-increasing over the last ``last`` rungs."""
    r = little_o_ratios(curve, noise_floor)[-last:]
    return bool(np.all(np.diff(r) <= 0.0))


def deviation_curve(
    F: SetValuedFunction,
    field: DerivativeField,
    ladder: HLadder = DEFAULT_LADDER,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> ErrorCurve:
    """``sup_y haus([x0, x0 +/- h] F|_y, D F(x0)|_y)`` down the ladder."""
    dev = [uniform_deviation(F, field.x0, field.side, h, field, resolution, tol) for h in ladder.steps]
    return ErrorCurve(field.x0, field.side, ladder.steps.copy(), np.asarray(dev))


def alpha_analysis(
    F: SetValuedFunction,
    x0: float,
    side: str = "right",
    ladder: HLadder = DEFAULT_LADDER,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
    conv_tol: float | None = None,
    noise_floor: float | None = None,
) -> tuple[DerivativeField, ErrorCurve, float, OrderFit]:
    """Derivative field, deviation curve, noise floor and fit behind :func:`alpha_probe`."""
    if resolution is None:
        resolution = default_resolution()
    field = one_sided_derivative(F, x0, side, ladder, conv_tol, resolution, tol)
    if not field.converged:
        raise ConvergenceError(f"{side} derivative of {F.name} at x0={x0} did not converge")
    curve = deviation_curve(F, field, ladder, resolution, tol)
    if noise_floor is None:
        noise_floor = derivative_uncertainty(F, field, resolution)
    return field, curve, noise_floor, fit_order(curve, noise_floor)


def alpha_probe(
    F: SetValuedFunction,
    x0: float,
    side: str = "right",
    ladder: HLadder = DEFAULT_LADDER,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
    conv_tol: float | None = None,
    noise_floor: float | None = None,
) -> OrderFit:
    """Fitted exponent ``alpha`` in ``sup_y haus(dd|_y, D|_y) <= L h^alpha``.

    Deviations at or below the derivative's own uncertainty (see
    :func:`derivative_uncertainty`) are left out of the fit.
    """
    return alpha_analysis(F, x0, side, ladder, resolution, tol, conv_tol, noise_floor)[3]
