"""Set-valued functions of one real variable and the example gallery.

A :class:`SetValuedFunction` maps ``x`` in an open interval to an
:class:`Image`: a finite union of closed intervals (in R^1) and isolated
points (in R^n). Images are turned into :class:`CompactSet` samples by
:func:`eval` (plain equispaced sampling) or :func:`eval_aligned` (sampling
that reuses the grid of a reference point ``x0``, used for divided
differences).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from svcalc.expr import parse_polynomial
from svcalc.set_core import DEFAULT_TOL, CompactSet, Tolerances

DEFAULT_RESOLUTION = 256

_CONTAIN_EPS = 1e-12


def default_resolution() -> int:
    """Default sampling resolution, overridable by ``SVCALC_DEFAULT_RESOLUTION``."""
    raw = os.environ.get("SVCALC_DEFAULT_RESOLUTION")
    if raw is None or not raw.strip():
        return DEFAULT_RESOLUTION
    value = int(raw)
    if value < 1:
        raise ValueError("SVCALC_DEFAULT_RESOLUTION must be a positive integer")
    return value


class DomainError(ValueError):
    """Evaluation point outside the open domain of the function."""


class GalleryError(ValueError):
    """Unknown gallery entry or invalid parameters."""


@dataclass(frozen=True)
class Image:
    """Exact value of a set-valued function: intervals (R^1 only) plus points."""

    dim: int
    intervals: tuple[tuple[float, float], ...] = ()
    points: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        if not self.intervals and not self.points:
            raise ValueError("an image must be nonempty")
        if self.intervals and self.dim != 1:
            raise ValueError("interval components are only supported in R^1")
        for lo, hi in self.intervals:
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValueError(f"invalid interval [{lo}, {hi}]")
        for p in self.points:
            if len(p) != self.dim:
                raise ValueError("point dimension does not match image dimension")

    @property
    def length(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def sample(self, resolution: int, tol: Tolerances = DEFAULT_TOL) -> CompactSet:
        parts = [np.asarray(self.points, dtype=np.float64).reshape(-1, self.dim)]
        for lo, hi in self.intervals:
            parts.append(np.linspace(lo, hi, resolution + 1).reshape(-1, 1))
        return CompactSet(np.vstack(parts), dedup_tol=tol.dedup_tol)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask of rows of ``pts`` lying in the image (up to rounding)."""
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, self.dim)
        mask = np.zeros(pts.shape[0], dtype=bool)
        for lo, hi in self.intervals:
            eps = _CONTAIN_EPS * max(1.0, abs(lo), abs(hi))
            mask |= (pts[:, 0] >= lo - eps) & (pts[:, 0] <= hi + eps)
        for p in self.points:
            eps = _CONTAIN_EPS * max(1.0, float(np.abs(p).max()))
            mask |= np.all(np.abs(pts - np.asarray(p)) <= eps, axis=1)
        return mask

    def uncovered(self, other: "Image") -> list[tuple[float, float]]:
        """Pieces of this image's intervals not covered by ``other``'s intervals."""
        pieces = []
        cover = sorted(other.intervals)
        for lo, hi in self.intervals:
            eps = _CONTAIN_EPS * max(1.0, abs(lo), abs(hi))
            start = lo
            for clo, chi in cover:
                if chi < start or clo > hi:
                    continue
                if clo > start:
                    pieces.append((start, min(clo, hi)))
                start = max(start, chi)
                if start >= hi:
                    break
            if start < hi:
                pieces.append((start, hi))
            pieces = [(a, b) for a, b in pieces if b - a > eps]
        return pieces


@dataclass(frozen=True)
class Analytic:
    """Closed-form facts about a gallery entry, used by tests and reports.

    ``derivative(x0, side, y)`` returns the anchored one-sided derivative as an
    :class:`Image`; ``approx_error(x0, h)`` the exact error of the local linear
    approximant at ``x0 + h``; ``boundary(x0, y)`` tells whether ``(x0, y)``
    lies on the boundary of the graph.
    """

    derivative: Callable[[float, str, np.ndarray], Image] | None = None
    approx_error: Callable[[float, float], float] | None = None
    boundary: Callable[[float, np.ndarray], bool] | None = None
    notes: str = ""


@dataclass(frozen=True)
class SetValuedFunction:
    name: str
    domain: tuple[float, float]
    dim: int
    image: Callable[[float], Image]
    params: Mapping = field(default_factory=dict)
    # probes x0 -> x may not cross these points (no closed form there)
    no_straddle: tuple[float, ...] = ()
    analytic: Analytic | None = None

    def check_domain(self, x: float) -> None:
        a, b = self.domain
        if not (a < x < b):
            raise DomainError(f"x={x!r} is outside the domain ({a}, {b}) of {self.name}")

    def check_probe(self, x0: float, x: float) -> None:
        self.check_domain(x0)
        self.check_domain(x)
        lo, hi = min(x0, x), max(x0, x)
        for c in self.no_straddle:
            if lo < c < hi:
                raise DomainError(f"probe from {x0} to {x} crosses x={c}, which {self.name} does not allow")


def eval(F: SetValuedFunction, x: float, resolution: int | None = None, tol: Tolerances = DEFAULT_TOL) -> CompactSet:
    """Sample ``F(x)``: ``resolution + 1`` equispaced points per interval, points exactly."""
    F.check_domain(x)
    if resolution is None:
        resolution = default_resolution()
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    return F.image(x).sample(resolution, tol)


def eval_aligned(
    F: SetValuedFunction,
    x: float,
    x0: float,
    resolution: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> CompactSet:
    """Sample ``F(x)`` on the grid already used for ``F(x0)``.

    The sample consists of the points of ``eval(F, x0)`` that lie in ``F(x)``,
    the endpoints and isolated points of ``F(x)``, and ``resolution + 1``
    equispaced points on every piece of ``F(x)`` not covered by ``F(x0)``.
    For finite images this is exactly ``F(x)``.
    """
    F.check_domain(x)
    if resolution is None:
        resolution = default_resolution()
    ref = eval(F, x0, resolution, tol)
    img = F.image(x)
    if not img.intervals:
        return img.sample(resolution, tol)
    parts = [np.asarray(img.points, dtype=np.float64).reshape(-1, 1)]
    parts.append(ref.points[img.contains(ref.points)])
    parts.append(np.asarray(img.intervals, dtype=np.float64).reshape(-1, 1))
    for lo, hi in img.uncovered(F.image(x0)):
        parts.append(np.linspace(lo, hi, resolution + 1).reshape(-1, 1))
    return CompactSet(np.vstack(parts), dedup_tol=tol.dedup_tol)


# ---------------------------------------------------------------------------
# gallery
# ---------------------------------------------------------------------------


def _pt(*coords: float) -> tuple[float, ...]:
    return tuple(float(c) for c in coords)


def _on_interval_boundary(img: Image, y: np.ndarray) -> bool:
    v = float(np.asarray(y).ravel()[0])
    for lo, hi in img.intervals:
        eps = _CONTAIN_EPS * max(1.0, abs(lo), abs(hi))
        if lo + eps < v < hi - eps:
            return False
    return True


def _natural(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value or int(value) < 1:
        raise GalleryError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def two_powers(alpha: int = 1, beta: int = 2) -> SetValuedFunction:
    """``F(x) = {x^alpha, x^beta}`` on (0, 2)."""
    a, b = _natural("alpha", alpha), _natural("beta", beta)
    if a == b:
        raise GalleryError("two_powers needs alpha != beta")

    def image(x: float) -> Image:
        return Image(1, points=(_pt(x**a), _pt(x**b)))

    def derivative(x0: float, side: str, y) -> Image:
        y = float(np.asarray(y).ravel()[0])
        if x0 == 1.0:
            return Image(1, points=(_pt(a), _pt(b)))
        if abs(y - x0**a) <= abs(y - x0**b):
            return Image(1, points=(_pt(a * x0 ** (a - 1)),))
        return Image(1, points=(_pt(b * x0 ** (b - 1)),))

    return SetValuedFunction(
        "two_powers",
        (0.0, 2.0),
        1,
        image,
        {"alpha": a, "beta": b},
        analytic=Analytic(derivative=derivative, boundary=lambda x0, y: True),
    )


def interval_growth() -> SetValuedFunction:
    """``F(x) = [0, 1 + x]`` on (-1, 1)."""

    def image(x: float) -> Image:
        return Image(1, intervals=((0.0, 1.0 + x),))

    def derivative(x0: float, side: str, y) -> Image:
        y = float(np.asarray(y).ravel()[0])
        if abs(y - (1.0 + x0)) > 1e-12:
            return Image(1, points=((0.0,),))
        if side == "right":
            return Image(1, intervals=((0.0, 1.0),))
        return Image(1, points=((1.0,),))

    return SetValuedFunction(
        "interval_growth",
        (-1.0, 1.0),
        1,
        image,
        analytic=Analytic(
            derivative=derivative,
            approx_error=lambda x0, h: 0.0,
            boundary=lambda x0, y: _on_interval_boundary(image(x0), y),
        ),
    )


def two_curves_2d(alpha: int = 1, beta: int = 2) -> SetValuedFunction:
    """``F(x) = {(x^a, x^b), (x^(a+1), x^(b+1))}`` in R^2 on (0, 2).

    Closed forms hold only when ``x0`` and ``x0 + h`` are on the same side of
    ``x = 1``, so probes crossing 1 are rejected.
    """
    a, b = _natural("alpha", alpha), _natural("beta", beta)
    if a == b:
        raise GalleryError("two_curves_2d needs alpha != beta")

    def image(x: float) -> Image:
        return Image(2, points=(_pt(x**a, x**b), _pt(x ** (a + 1), x ** (b + 1))))

    def derivative(x0: float, side: str, y) -> Image:
        v1 = _pt(a * x0 ** (a - 1), b * x0 ** (b - 1))
        v2 = _pt((a + 1) * x0**a, (b + 1) * x0**b)
        if x0 == 1.0:
            return Image(2, points=(v1, v2))
        p1 = np.array([x0**a, x0**b])
        p2 = np.array([x0 ** (a + 1), x0 ** (b + 1)])
        y = np.asarray(y, dtype=np.float64).ravel()
        return Image(2, points=(v1,) if np.linalg.norm(y - p1) <= np.linalg.norm(y - p2) else (v2,))

    return SetValuedFunction(
        "two_curves_2d",
        (0.0, 2.0),
        2,
        image,
        {"alpha": a, "beta": b},
        no_straddle=(1.0,),
        analytic=Analytic(derivative=derivative, boundary=lambda x0, y: True),
    )


@dataclass(frozen=True)
class Piece:
    """One branch of a piecewise map, active on the closed range ``[lo, hi]``."""

    lo: float
    hi: float
    intervals: tuple[tuple[Polynomial, Polynomial], ...] = ()
    points: tuple[Polynomial, ...] = ()


def piecewise(domain: Sequence[float], pieces: Sequence[Piece], name: str = "piecewise") -> SetValuedFunction:
    """Piecewise-interval map in R^1; the first piece whose range holds ``x`` wins."""
    pieces = tuple(pieces)
    if not pieces:
        raise GalleryError("a piecewise map needs at least one piece")
    for pc in pieces:
        if not pc.intervals and not pc.points:
            raise GalleryError("every piece needs at least one interval or point")

    def image(x: float) -> Image:
        for pc in pieces:
            if pc.lo <= x <= pc.hi:
                ivs = []
                for lo_f, hi_f in pc.intervals:
                    lo, hi = float(lo_f(x)), float(hi_f(x))
                    if lo > hi:
                        raise DomainError(f"{name}: empty interval [{lo}, {hi}] at x={x}")
                    ivs.append((lo, hi))
                return Image(1, intervals=tuple(ivs), points=tuple(_pt(p(x)) for p in pc.points))
        raise DomainError(f"{name}: no piece covers x={x}")

    return SetValuedFunction(name, (float(domain[0]), float(domain[1])), 1, image)


def piecewise_from_config(desc: Mapping) -> SetValuedFunction:
    """Build a piecewise map from its JSON description.

    ``{"domain": [a, b], "pieces": [{"x": [lo, hi], "intervals": [["0", "1+x"]],
    "points": ["-x^2"]}, ...]}``; boundary functions are polynomial
    expressions in ``x``.
    """
    try:
        domain = desc["domain"]
        raw_pieces = desc["pieces"]
    except (KeyError, TypeError):
        raise GalleryError("custom SVF needs 'domain' and 'pieces'") from None
    pieces = []
    for raw in raw_pieces:
        lo, hi = raw.get("x", domain)
        ivs = tuple((parse_polynomial(str(a)), parse_polynomial(str(b))) for a, b in raw.get("intervals", ()))
        pts = tuple(parse_polynomial(str(p)) for p in raw.get("points", ()))
        pieces.append(Piece(float(lo), float(hi), ivs, pts))
    F = piecewise(domain, pieces, name=str(desc.get("name", "custom")))
    return F


def strong_example() -> SetValuedFunction:
    """``[0, 2 - x^2]`` for ``x <= 0`` and ``[0, 2 + x] U {-x^2}`` for ``x >= 0`` on (-1, 1)."""
    zero = Polynomial([0.0])
    pieces = (
        Piece(-1.0, 0.0, intervals=((zero, Polynomial([2.0, 0.0, -1.0])),)),
        Piece(0.0, 1.0, intervals=((zero, Polynomial([2.0, 1.0])),), points=(Polynomial([0.0, 0.0, -1.0]),)),
    )
    base = piecewise((-1.0, 1.0), pieces, name="strong_example")

    def derivative(x0: float, side: str, y) -> Image:
        if x0 != 0.0:
            raise NotImplementedError("closed form only at x0 = 0")
        y = float(np.asarray(y).ravel()[0])
        if side == "right" and abs(y - 2.0) <= 1e-12:
            return Image(1, intervals=((0.0, 1.0),))
        return Image(1, points=((0.0,),))

    return SetValuedFunction(
        "strong_example",
        base.domain,
        1,
        base.image,
        analytic=Analytic(
            derivative=derivative,
            approx_error=lambda x0, h: h * h if x0 == 0.0 else math.nan,
            boundary=lambda x0, y: _on_interval_boundary(base.image(x0), y),
            notes="haus(F(h), L F(h)) = h^2 for |h| <= 1",
        ),
    )


def constant(points=((1.0,), (4.0,))) -> SetValuedFunction:
    """``F(x) = A0`` for all real ``x``."""
    arr = np.array(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise GalleryError("constant needs a nonempty list of points")
    value = Image(arr.shape[1], points=tuple(_pt(*p) for p in arr))
    zero = Image(arr.shape[1], points=(_pt(*np.zeros(arr.shape[1])),))
    return SetValuedFunction(
        "constant",
        (-math.inf, math.inf),
        arr.shape[1],
        lambda x: value,
        {"points": arr.tolist()},
        analytic=Analytic(derivative=lambda x0, side, y: zero, approx_error=lambda x0, h: 0.0),
    )


def smooth_singleton(poly: str | Sequence[float] = "x^2", domain=(-math.inf, math.inf)) -> SetValuedFunction:
    """``F(x) = {f(x)}`` for a polynomial ``f`` (expression string or coefficients, low to high)."""
    f = parse_polynomial(poly) if isinstance(poly, str) else Polynomial(np.asarray(poly, dtype=np.float64))
    df = f.deriv()

    def image(x: float) -> Image:
        return Image(1, points=(_pt(f(x)),))

    def derivative(x0: float, side: str, y) -> Image:
        return Image(1, points=(_pt(df(x0)),))

    def approx_error(x0: float, h: float) -> float:
        # exact derivative; the remainder of the linear Taylor polynomial
        return abs(float(f(x0 + h) - f(x0) - df(x0) * h))

    return SetValuedFunction(
        "smooth_singleton",
        (float(domain[0]), float(domain[1])),
        1,
        image,
        {"poly": poly if isinstance(poly, str) else list(poly)},
        analytic=Analytic(derivative=derivative, approx_error=approx_error, boundary=lambda x0, y: True),
    )


GALLERY: dict[str, tuple[Callable[..., SetValuedFunction], str]] = {
    "two_powers": (two_powers, "{x^alpha, x^beta} on (0,2); params alpha, beta (positive integers, distinct)"),
    "interval_growth": (interval_growth, "[0, 1+x] on (-1,1)"),
    "two_curves_2d": (two_curves_2d, "two curves in R^2 on (0,2); params alpha, beta; probes may not cross x=1"),
    "strong_example": (strong_example, "[0,2-x^2] for x<=0, [0,2+x] U {-x^2} for x>=0, on (-1,1)"),
    "constant": (constant, "fixed set; param points (list of points)"),
    "smooth_singleton": (smooth_singleton, "{f(x)} for polynomial f; param poly (expression or coefficients)"),
}


def gallery(name: str, params: Mapping | None = None) -> SetValuedFunction:
    params = dict(params or {})
    if name == "custom":
        return piecewise_from_config(params)
    try:
        factory = GALLERY[name][0]
    except KeyError:
        raise GalleryError(f"unknown gallery entry {name!r}; known: {', '.join(sorted(GALLERY))}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise GalleryError(f"invalid parameters for {name}: {exc}") from None
