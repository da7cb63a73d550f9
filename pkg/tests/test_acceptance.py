"""End-to-end acceptance criteria 1-8.

Each check returns ``(ok, detail)`` and prints a single ``PASS``/``FAIL``
line. Run ``python3 tests/test_acceptance.py`` for the summary alone.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from svcalc.approximant import (  # noqa: E402
    alpha_probe,
    approximant_eval,
    build_approximant,
    error_curve,
    error_noise_floor,
    fit_order,
    is_little_o,
)
from svcalc.calculus import (  # noqa: E402
    DEFAULT_LADDER,
    ConvergenceError,
    HLadder,
    anchored_dd,
    full_dd,
    one_sided_derivative,
)
from svcalc.set_core import (  # noqa: E402
    CompactSet,
    hausdorff_direct,
    hausdorff_via_pairs,
    metric_difference,
    scale_translate,
    set_norm,
    union,
)
from svcalc.svf import Image, SetValuedFunction, eval, gallery, piecewise_from_config  # noqa: E402

H_K = float(DEFAULT_LADDER.steps[-1])


def dense(lo: float, hi: float, n: int = 1 << 16) -> CompactSet:
    """Fine sampling of [lo, hi]; its own Hausdorff error is (hi-lo)/(2n)."""
    return CompactSet(np.linspace(lo, hi, n + 1))


# collected for the pytest terminal summary (see conftest.py)
REPORT_LINES: list[str] = []


def report(num: int, title: str, ok: bool, detail: str, elapsed: float) -> None:
    line = f"CRITERION {num} {'PASS' if ok else 'FAIL'} [{elapsed:.2f}s] {title}: {detail}"
    REPORT_LINES.append(line)
    if __name__ == "__main__":
        print(line, flush=True)


# ---------------------------------------------------------------------------


def criterion_1():
    rng = np.random.default_rng(1)
    worst, count = 0.0, 0
    for k in range(1500):
        n = int(rng.integers(1, 4))
        sizes = rng.integers(1, 31, size=2)
        if k % 3 == 0:
            # dyadic grid: exact ties
            A = CompactSet(rng.integers(-40, 41, (sizes[0], n)) / 8.0)
            B = CompactSet(rng.integers(-40, 41, (sizes[1], n)) / 8.0)
        else:
            A = CompactSet(rng.uniform(-10, 10, (sizes[0], n)))
            B = CompactSet(rng.uniform(-10, 10, (sizes[1], n)))
        worst = max(worst, abs(hausdorff_via_pairs(A, B) - hausdorff_direct(A, B)))
        count += 1
    return worst <= 1e-12, f"{count} pairs, max |pairs - direct| = {worst:.3g}", 5.0


def criterion_2():
    F = gallery("interval_growth")
    N = 512
    right = one_sided_derivative(F, 0.0, "right", resolution=N)
    left = one_sided_derivative(F, 0.0, "left", resolution=N)
    r1 = hausdorff_direct(right.derivative_at(1.0), dense(0.0, 1.0))
    l1 = hausdorff_direct(left.derivative_at(1.0), CompactSet([1.0]))
    zero = CompactSet([0.0])
    low = right.anchors.points[:, 0] <= 1.0 - 2.0 / N
    exact = all(
        fld.derivatives[i] == zero for fld in (right, left) for i in np.flatnonzero(low)
    )
    ok = right.converged and left.converged and r1 <= 2.0 / N and l1 <= 1e-6 and exact
    return ok, f"haus(D+|1,[0,1])={r1:.3g}, haus(D-|1,{{1}})={l1:.3g}, {int(low.sum())} low anchors exactly {{0}}: {exact}", 10.0


def criterion_3():
    F = gallery("two_powers", {"alpha": 1, "beta": 2})
    f1 = one_sided_derivative(F, 1.0, "right")
    d1 = hausdorff_direct(f1.derivative_at(1.0), CompactSet([1.0, 2.0]))
    f2 = one_sided_derivative(F, 0.5, "right")
    # closed forms alpha*x0^(alpha-1) = 1 at y = 0.5 and beta*x0^(beta-1) = 1 at y = 0.25
    d2 = hausdorff_direct(f2.derivative_at(0.5), CompactSet([1.0]))
    d3 = hausdorff_direct(f2.derivative_at(0.25), CompactSet([1.0]))
    ok = f1.converged and f2.converged and d1 <= f1.conv_tol and max(d2, d3) <= f2.conv_tol
    return ok, f"x0=1: {d1:.3g}; x0=0.5: {d2:.3g}, {d3:.3g} (conv_tol {f1.conv_tol:.3g})", 5.0


def criterion_4():
    a, b = 1, 2
    F = gallery("two_curves_2d", {"alpha": a, "beta": b})
    worst, ok = 0.0, True
    x = 1.5
    p1, p2 = (x**a, x**b), (x ** (a + 1), x ** (b + 1))
    v1 = CompactSet([[a * x ** (a - 1), b * x ** (b - 1)]])
    v2 = CompactSet([[(a + 1) * x**a, (b + 1) * x**b]])
    for side in ("right", "left"):
        fld = one_sided_derivative(F, x, side)
        for y, v in ((p1, v1), (p2, v2)):
            d = hausdorff_direct(fld.derivative_at(y), v)
            worst = max(worst, d)
            ok &= fld.converged and d <= fld.conv_tol
    both = CompactSet([[a, b], [a + 1, b + 1]])
    for side in ("right", "left"):
        fld = one_sided_derivative(F, 1.0, side)
        d = hausdorff_direct(fld.derivative_at([1.0, 1.0]), both)
        worst = max(worst, d)
        ok &= fld.converged and len(fld.anchors) == 1 and d <= fld.conv_tol
    return ok, f"max haus to closed forms {worst:.3g} (conv_tol {8 * H_K:.3g})", 5.0


def criterion_5():
    F = gallery("strong_example")
    N = 1024
    L = build_approximant(F, 0.0, resolution=N)
    a_plus = hausdorff_direct(approximant_eval(L, 0.5), dense(0.0, 2.5))
    a_minus = hausdorff_direct(approximant_eval(L, -0.5), dense(0.0, 2.0))
    ok_a = max(a_plus, a_minus) <= 2.5 / N
    worst_b = 0.0
    for side in ("right", "left"):
        c = error_curve(F, L, side=side)
        worst_b = max(worst_b, float(np.abs(c.err - c.h**2).max()))
    ok_b = worst_b <= 8 * 2.5 / N
    curve = error_curve(F, L, side="both")
    fit = fit_order(curve, error_noise_floor(F, L, curve.h))
    ok_c = abs(fit.slope - 2.0) <= 0.1
    alpha = alpha_probe(F, 0.0, "right", resolution=N)
    ok_d = abs(alpha.slope - 1.0) <= 0.1
    detail = (
        f"(a) haus {max(a_plus, a_minus):.3g} {'ok' if ok_a else 'bad'}; "
        f"(b) max|err-h^2| {worst_b:.3g} {'ok' if ok_b else 'bad'}; "
        f"(c) order {fit.slope:.4f} on {fit.rungs_used} rungs; (d) alpha {alpha.slope:.4f}"
    )
    return ok_a and ok_b and ok_c and ok_d, detail, 30.0


def criterion_6_cases(rng: np.random.Generator, count: int = 24):
    """Random converged-or-not gallery cases: (F, x0, ladder)."""
    cases = [
        (gallery("interval_growth"), 0.0, DEFAULT_LADDER),
        (gallery("two_powers"), 1.0, DEFAULT_LADDER),
        (gallery("two_curves_2d"), 1.0, DEFAULT_LADDER),
        (gallery("strong_example"), 0.0, DEFAULT_LADDER),
        (gallery("constant"), 0.0, DEFAULT_LADDER),
        (gallery("smooth_singleton", {"poly": "x^3"}), 0.5, DEFAULT_LADDER),
    ]
    while len(cases) < count:
        kind = rng.integers(6)
        if kind == 0:
            cases.append((gallery("interval_growth"), float(rng.uniform(-0.7, 0.7)), DEFAULT_LADDER))
        elif kind == 1:
            a, b = rng.choice(np.arange(1, 5), size=2, replace=False)
            cases.append((gallery("two_powers", {"alpha": int(a), "beta": int(b)}), float(rng.uniform(0.3, 1.7)), DEFAULT_LADDER))
        elif kind == 2:
            a, b = rng.choice(np.arange(1, 4), size=2, replace=False)
            x0 = float(rng.choice([rng.uniform(0.3, 0.85), rng.uniform(1.15, 1.7)]))
            cases.append((gallery("two_curves_2d", {"alpha": int(a), "beta": int(b)}), x0, HLadder(h0=0.125)))
        elif kind == 3:
            cases.append((gallery("strong_example"), float(rng.uniform(-0.7, 0.7)), DEFAULT_LADDER))
        elif kind == 4:
            pts = rng.uniform(-3, 3, (int(rng.integers(1, 6)), int(rng.integers(1, 4)))).tolist()
            cases.append((gallery("constant", {"points": pts}), float(rng.uniform(-5, 5)), DEFAULT_LADDER))
        else:
            coeffs = rng.uniform(-2, 2, int(rng.integers(2, 6))).tolist()
            cases.append((gallery("smooth_singleton", {"poly": coeffs}), float(rng.uniform(-1, 1)), DEFAULT_LADDER))
    return cases


def criterion_6():
    rng = np.random.default_rng(6)
    checked, failures, skipped = 0, [], 0
    for F, x0, ladder in criterion_6_cases(rng):
        try:
            L = build_approximant(F, x0, ladder, resolution=256)
        except ConvergenceError:
            skipped += 1  # not a converged case
            continue
        curve = error_curve(F, L, ladder, side="both")
        checked += 1
        if not is_little_o(curve, error_noise_floor(F, L, curve.h), last=4):
            failures.append(f"{F.name}@{x0:.3g}")
    return not failures, f"{checked} converged cases, {skipped} skipped, failures: {failures or 'none'}", None


def random_finite_svf(rng: np.random.Generator) -> SetValuedFunction:
    n = int(rng.integers(1, 4))
    k = int(rng.integers(1, 5))
    coeffs = rng.uniform(-2, 2, (k, n, 4))

    def image(x):
        powers = x ** np.arange(4)
        return Image(n, points=tuple(tuple(map(float, c @ powers)) for c in coeffs))

    return SetValuedFunction("random_finite", (-2.0, 2.0), n, image)


def random_interval_svf(rng: np.random.Generator) -> SetValuedFunction:
    c = rng.uniform(0.2, 1.0, 3)
    return piecewise_from_config(
        {"domain": [-1, 1], "pieces": [{"intervals": [[f"{c[0]}*x - 1", f"1 + {c[1]}*x + {c[2]}*x^2"]], "points": [f"-2.5 - {c[0]}*x^2"]}]}
    )


def criterion_7():
    rng = np.random.default_rng(7)
    R = 200
    worst = {}

    def note(key, val):
        worst[key] = max(worst.get(key, 0.0), val)

    for _ in range(R):
        n = int(rng.integers(1, 4))
        A = CompactSet(rng.uniform(-5, 5, (int(rng.integers(1, 21)), n)))
        B = CompactSet(rng.uniform(-5, 5, (int(rng.integers(1, 21)), n)))
        h = hausdorff_via_pairs(A, B)
        t = rng.uniform(-5, 5, n)
        lam = float(rng.uniform(-4, 4))
        note("translation", abs(hausdorff_via_pairs(scale_translate(A, 1.0, t), scale_translate(B, 1.0, t)) - h))
        note("scaling", abs(hausdorff_via_pairs(scale_translate(A, lam), scale_translate(B, lam)) - abs(lam) * h))
        note("norm", abs(set_norm(metric_difference(A, B)) - h))
        note("self", 0.0 if metric_difference(A, A) == CompactSet(np.zeros((1, n))) else np.inf)
        fam = [
            (CompactSet(rng.uniform(-5, 5, (int(rng.integers(1, 8)), n))), CompactSet(rng.uniform(-5, 5, (int(rng.integers(1, 8)), n))))
            for _ in range(int(rng.integers(2, 5)))
        ]
        lhs = hausdorff_via_pairs(union([a for a, _ in fam]), union([b for _, b in fam]))
        note("union_bound", max(0.0, lhs - max(hausdorff_via_pairs(a, b) for a, b in fam)))
    for k in range(R):
        F = random_finite_svf(rng) if k % 2 == 0 else random_interval_svf(rng)
        x0, x1 = (float(v) for v in rng.uniform(-0.9, 0.9, 2))
        if x0 == x1:
            continue
        d01 = full_dd(F, x0, x1, 64, check=False)
        if not F.image(x0).intervals:
            # no sampling involved: both orders see the same exact sets
            note("dd_symmetry", hausdorff_direct(d01, full_dd(F, x1, x0, 64, check=False)))
        A = eval(F, x0, 64)
        anchored = union([anchored_dd(F, x0, x1, y, 64) for y in A.points])
        note("full_vs_anchored", hausdorff_direct(d01, anchored))
    ok = all(v <= 1e-12 for v in worst.values())
    return ok, ", ".join(f"{k} {v:.2g}" for k, v in worst.items()) + f" over {R} instances each", 10.0


def criterion_8():
    F = gallery("smooth_singleton", {"poly": "x^3"})
    x0 = 0.5
    L = build_approximant(F, x0)
    ests = [float(fld.derivatives[0].points[0, 0]) for fld in (L.right_field, L.left_field)]
    dev = max(abs(e - 0.75) for e in ests)
    curve = error_curve(F, L, side="both")
    fit = fit_order(curve, error_noise_floor(F, L, curve.h))
    ok = dev <= 2 * H_K and abs(fit.slope - 2.0) <= 0.1
    return ok, f"max |D - 0.75| = {dev:.3g} (2 h_K = {2 * H_K:.3g}), order {fit.slope:.4f}", 5.0


CRITERIA = {
    1: ("Hausdorff oracle equivalence", criterion_1),
    2: ("interval growth at 0", criterion_2),
    3: ("two powers at 1 and 0.5", criterion_3),
    4: ("two curves in R^2", criterion_4),
    5: ("strong example end to end", criterion_5),
    6: ("o(h) along the ladder", criterion_6),
    7: ("metric identity suite", criterion_7),
    8: ("classical consistency x^3", criterion_8),
}


def run_criterion(num: int) -> bool:
    title, fn = CRITERIA[num]
    t0 = time.perf_counter()
    ok, detail, budget = fn()
    elapsed = time.perf_counter() - t0
    if budget is not None and elapsed > budget:
        ok = False
        detail += f"; over the {budget:.0f}s budget"
    report(num, title, ok, detail, elapsed)
    return ok


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    # compile the numba kernels outside the timed sections
    A = CompactSet([[0.0], [1.0]])
    hausdorff_via_pairs(A, A)
    hausdorff_direct(A, A)
    from svcalc.set_core import hausdorff

    hausdorff(A, CompactSet([[0.5]]))


@pytest.mark.acceptance
@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_acceptance_criterion(num):
    assert run_criterion(num)


if __name__ == "__main__":
    results = [run_criterion(k) for k in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
