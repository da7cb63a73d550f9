"""Command-line front end.

Exit codes: 0 success, 2 usage/input/domain error, 3 derivative did not
converge (diagnostics are still written), 4 too few rungs for an order fit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from svcalc.approximant import (
    InsufficientDataError,
    alpha_analysis,
    approximant_eval,
    build_approximant,
    error_curve,
    error_noise_floor,
    fit_order,
)
from svcalc.calculus import ConvergenceError, HLadder, anchored_groups, full_dd, one_sided_derivative
from svcalc.set_core import CompactSet, Tolerances, hausdorff_via_pairs, metric_difference, metric_pairs
from svcalc.svf import GALLERY, default_resolution, eval, eval_aligned, gallery

# every numeric default used by the CLI
DEFAULTS = {
    "resolution": None,  # SVCALC_DEFAULT_RESOLUTION or 256
    "h0": 0.25,
    "ratio": 0.5,
    "rungs": 12,
    "floor": 1e-6,
    "proj_tie_tol": 1e-9,
    "dedup_tol": 1e-12,
    "conv_tol": None,  # max(1e-6, 4*length(F(x0))/N, 8*h_min)
    "format": "json",
}

EXIT_USAGE = 2
EXIT_UNCONVERGED = 3
EXIT_FIT = 4


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    return cfg


def _pick(args, cfg: dict, name: str, cfg_key: str | None = None, section: str | None = None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    src = cfg.get(section, {}) if section else cfg
    if isinstance(src, dict) and (cfg_key or name) in src:
        return src[cfg_key or name]
    return DEFAULTS.get(name)


def _svf(args, cfg):
    desc = cfg.get("svf")
    name = args.svf
    params = json.loads(args.params) if args.params else None
    if name is None and desc is not None:
        if "custom" in desc:
            return gallery("custom", desc["custom"])
        name = desc.get("name")
        if params is None:
            params = desc.get("params")
    if name is None:
        raise UsageError("no set-valued function given (use --svf or a config 'svf' entry)")
    return gallery(name, params or {})


def _tolerances(args, cfg) -> Tolerances:
    return Tolerances(
        proj_tie_tol=float(_pick(args, cfg, "proj_tie_tol", section="tolerances")),
        dedup_tol=float(_pick(args, cfg, "dedup_tol", section="tolerances")),
    )


def _ladder(args, cfg) -> HLadder:
    section = cfg.get("ladder") or {}
    rungs = args.rungs if args.rungs is not None else section.get("rungs", section.get("count", DEFAULTS["rungs"]))
    return HLadder(
        h0=float(_pick(args, cfg, "h0", section="ladder")),
        ratio=float(_pick(args, cfg, "ratio", section="ladder")),
        count=int(rungs),
        floor=float(_pick(args, cfg, "floor", section="ladder")),
    )


def _resolution(args, cfg) -> int:
    res = _pick(args, cfg, "resolution")
    res = default_resolution() if res is None else int(res)
    if res < 2:
        raise UsageError("resolution must be at least 2")
    return res


def _sides(args, cfg, default: str) -> tuple[str, ...]:
    side = args.side or cfg.get("side") or cfg.get("sides") or default
    if isinstance(side, list):
        sides = tuple(side)
    else:
        sides = ("right", "left") if side == "both" else (side,)
    for s in sides:
        if s not in ("right", "left"):
            raise UsageError(f"unknown side {s!r}")
    return sides


def _x0(args, cfg) -> float:
    x0 = _pick(args, cfg, "x0")
    if x0 is None:
        raise UsageError("--x0 is required")
    return float(x0)


def _conv_tol(args, cfg):
    v = _pick(args, cfg, "conv_tol")
    return None if v is None else float(v)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _g(v: float) -> str:
    return format(float(v), ".17g")


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_g(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _emit(args, cfg, json_doc, csv_text: str | None = None, extra_json=None) -> None:
    fmt = _pick(args, cfg, "format", section="output") or "json"
    out = args.out or (cfg.get("output") or {}).get("path")
    if fmt == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(json_doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
        if fmt == "csv" and extra_json is not None:
            Path(str(out) + ".fit.json").write_text(json.dumps(extra_json, indent=2) + "\n")
    else:
        sys.stdout.write(text)
        if fmt == "csv" and extra_json is not None:
            sys.stderr.write(json.dumps(extra_json) + "\n")


def _coords(prefix: str, n: int) -> list[str]:
    return [f"{prefix}_{k + 1}" for k in range(n)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _parse_set(text, what: str, tol: Tolerances) -> CompactSet:
    try:
        data = json.loads(text) if isinstance(text, str) else text
        return CompactSet(data, dedup_tol=tol.dedup_tol)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"malformed set {what}: {exc}") from None


def cmd_pairs(args, cfg) -> int:
    tol = _tolerances(args, cfg)
    A_src = args.A if args.A is not None else cfg.get("A")
    B_src = args.B if args.B is not None else cfg.get("B")
    if A_src is not None and B_src is not None:
        A, B = _parse_set(A_src, "A", tol), _parse_set(B_src, "B", tol)
    else:
        F = _svf(args, cfg)
        x1 = args.x1 if args.x1 is not None else cfg.get("x1")
        if x1 is None:
            raise UsageError("pairs needs --A and --B, or an SVF with --x0 and --x1")
        res = _resolution(args, cfg)
        A = eval(F, _x0(args, cfg), res, tol)
        B = eval(F, float(x1), res, tol)
    pairs = metric_pairs(A, B, tol)
    doc = {
        "pairs": pairs.tolist(),
        "hausdorff": hausdorff_via_pairs(A, B, tol),
        "metric_difference": metric_difference(A, B, tol).tolist(),
    }
    rows = [list(a) + list(b) + [d] for a, b, d in zip(pairs.first, pairs.second, pairs.lengths())]
    _emit(args, cfg, doc, _csv(rows, _coords("a", A.dim) + _coords("b", A.dim) + ["length"]))
    return 0


def cmd_dd(args, cfg) -> int:
    F = _svf(args, cfg)
    tol = _tolerances(args, cfg)
    res = _resolution(args, cfg)
    x0 = _x0(args, cfg)
    x1 = args.x1 if args.x1 is not None else cfg.get("x1")
    if x1 is None:
        raise UsageError("dd needs --x1")
    x1 = float(x1)
    full = full_dd(F, x0, x1, res, tol)
    A = eval(F, x0, res, tol)
    groups = anchored_groups(A, eval_aligned(F, x1, x0, res, tol), x1 - x0, tol)
    doc = {
        "x0": x0,
        "x1": x1,
        "full": full.tolist(),
        "anchored": [{"y": y.tolist(), "dd": g.tolist()} for y, g in zip(A.points, groups)],
    }
    rows = [list(y) + list(v) for y, g in zip(A.points, groups) for v in g.points]
    _emit(args, cfg, doc, _csv(rows, _coords("y", F.dim) + _coords("dd", F.dim)))
    return 0


def cmd_derivative(args, cfg) -> int:
    F = _svf(args, cfg)
    tol = _tolerances(args, cfg)
    res = _resolution(args, cfg)
    x0 = _x0(args, cfg)
    ladder = _ladder(args, cfg)
    fields = [
        one_sided_derivative(F, x0, side, ladder, _conv_tol(args, cfg), res, tol)
        for side in _sides(args, cfg, "both")
    ]
    doc = {"svf": F.name, "resolution": res, "fields": [f.to_dict() for f in fields]}
    rows = []
    for f in fields:
        for y, D, ok in zip(f.anchors.points, f.derivatives, f.anchor_converged):
            for v in D.points:
                rows.append([f.side] + list(y) + list(v) + [int(ok)])
    _emit(args, cfg, doc, _csv(rows, ["side"] + _coords("y", F.dim) + _coords("d", F.dim) + ["converged"]))
    if not all(f.converged for f in fields):
        for f in fields:
            bad = f.unconverged_anchors()
            if len(bad):
                print(
                    f"{f.side}: {len(bad)} anchors unconverged (conv_tol={f.conv_tol:.3g}), e.g. {bad[:3].tolist()}",
                    file=sys.stderr,
                )
        return EXIT_UNCONVERGED
    return 0


def cmd_approx(args, cfg) -> int:
    F = _svf(args, cfg)
    tol = _tolerances(args, cfg)
    res = _resolution(args, cfg)
    x0 = _x0(args, cfg)
    ladder = _ladder(args, cfg)
    L = build_approximant(F, x0, ladder, _conv_tol(args, cfg), res, tol, _sides(args, cfg, "both"))
    xs = args.x if args.x else cfg.get("x")
    if xs is None:
        xs = [x0 + ladder.h0 if L.right_field is not None else x0 - ladder.h0]
    if not isinstance(xs, list):
        xs = [xs]
    values = []
    for x in map(float, xs):
        F.check_domain(x)
        Lx = approximant_eval(L, x)
        values.append({"x": x, "set": Lx.tolist(), "error": hausdorff_via_pairs(eval_aligned(F, x, x0, res, tol), Lx, tol)})
    doc = {"svf": F.name, "x0": x0, "resolution": res, "values": values}
    rows = [[v["x"]] + p for v in values for p in v["set"]]
    _emit(args, cfg, doc, _csv(rows, ["x"] + _coords("y", F.dim)))
    return 0


def cmd_order(args, cfg) -> int:
    F = _svf(args, cfg)
    tol = _tolerances(args, cfg)
    res = _resolution(args, cfg)
    x0 = _x0(args, cfg)
    ladder = _ladder(args, cfg)
    sides = _sides(args, cfg, "both")
    L = build_approximant(F, x0, ladder, _conv_tol(args, cfg), res, tol, sides)
    curve = error_curve(F, L, ladder, "both" if len(sides) == 2 else sides[0], res, tol)
    floor = error_noise_floor(F, L, curve.h)
    fit = fit_order(curve, floor)
    doc = {"svf": F.name, "x0": x0, "resolution": res, "curve": curve.to_dict(), "fit": fit.to_dict()}
    _emit(args, cfg, doc, curve.to_csv(), extra_json=fit.to_dict())
    return 0


def cmd_alpha(args, cfg) -> int:
    F = _svf(args, cfg)
    tol = _tolerances(args, cfg)
    res = _resolution(args, cfg)
    x0 = _x0(args, cfg)
    ladder = _ladder(args, cfg)
    sides = _sides(args, cfg, "right")
    if len(sides) != 1:
        raise UsageError("alpha takes a single --side")
    field, curve, floor, fit = alpha_analysis(F, x0, sides[0], ladder, res, tol, _conv_tol(args, cfg))
    doc = {
        "svf": F.name,
        "x0": x0,
        "side": sides[0],
        "resolution": res,
        "noise_floor": floor,
        "conv_tol": field.conv_tol,
        "curve": curve.to_dict(),
        "fit": fit.to_dict(),
    }
    _emit(args, cfg, doc, curve.to_csv(), extra_json=fit.to_dict())
    return 0


def cmd_gallery(args, cfg) -> int:
    if args.action != "list":
        raise UsageError(f"unknown gallery action {args.action!r}")
    for name, (_, desc) in GALLERY.items():
        print(f"{name}\t{desc}")
    print("custom\tpiecewise-interval map from config: {domain, pieces:[{x, intervals, points}]}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svcalc", description="Metric calculus of set-valued functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON analysis config")
    common.add_argument("--svf", help="gallery entry name")
    common.add_argument("--params", help="gallery parameters as a JSON object")
    common.add_argument("--x0", type=float)
    common.add_argument("--side", choices=["right", "left", "both"])
    common.add_argument("--resolution", type=int)
    common.add_argument("--h0", type=float)
    common.add_argument("--ratio", type=float)
    common.add_argument("--rungs", type=int)
    common.add_argument("--floor", type=float, help="smallest allowed ladder step")
    common.add_argument("--conv-tol", dest="conv_tol", type=float)
    common.add_argument("--tie-tol", dest="proj_tie_tol", type=float)
    common.add_argument("--dedup-tol", dest="dedup_tol", type=float)
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("pairs", parents=[common], help="metric pairs, Hausdorff distance and metric difference")
    p.add_argument("--A", help="set literal, e.g. '[[0],[3]]'")
    p.add_argument("--B")
    p.add_argument("--x1", type=float)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("dd", parents=[common], help="first metric divided differences between x0 and x1")
    p.add_argument("--x1", type=float)
    p.set_defaults(func=cmd_dd)

    p = sub.add_parser("derivative", parents=[common], help="one-sided metric derivative field at x0")
    p.set_defaults(func=cmd_derivative)

    p = sub.add_parser("approx", parents=[common], help="evaluate the local metric linear approximant")
    p.add_argument("--x", type=float, action="append", help="evaluation point (repeatable)")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("order", parents=[common], help="approximation error curve and fitted order")
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("alpha", parents=[common], help="fitted alpha of metric alpha-differentiability")
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("gallery", help="list built-in set-valued functions")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_gallery)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args) if hasattr(args, "config") else {}
        return args.func(args, cfg)
    except ConvergenceError as exc:
        print(f"svcalc: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    except InsufficientDataError as exc:
        print(f"svcalc: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (ValueError, TypeError, KeyError) as exc:
        print(f"svcalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
