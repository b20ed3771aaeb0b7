"""Command-line interface.

Exit codes: 0 pass, 1 I/O or parse error, 2 structural or domain error,
3 property failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import (
    AlgebraError,
    CarnotAlgebra,
    NotNilpotentError,
    heintze_extension,
    jacobi_residual,
    jacobi_violations,
    lower_central_series,
    validate_stratification,
)
from .catalog import make_catalog
from .chart import (
    DEFAULT_STEP,
    DomainError,
    bergman_ch2_field,
    cross_check_base_point,
    default_bergman_points,
    verify_bergman,
)
from .curvature import CurvatureError, pinching_report, sectional
from .formats import (
    algebra_from_dict,
    algebra_to_dict,
    dumps,
    metric_from_dict,
    metric_to_dict,
    spec_hash,
)
from .metric import MetricError, build_h_metric, validate_metric

EXIT_OK, EXIT_IO, EXIT_STRUCT, EXIT_PROPERTY = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_IO, f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _load_spec(path: str):
    data = _read_json(path)
    try:
        return algebra_from_dict(data), data
    except AlgebraError as exc:
        raise CliError(EXIT_IO, f"{path}: {exc}") from exc


def _emit(payload: dict, out: str | None) -> None:
    text = dumps(payload)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_csv(path: str | None, rows: list[dict]) -> None:
    fh = sys.stdout if path is None else open(path, "w", newline="", encoding="utf-8")
    try:
        if rows:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: json.dumps(v) if isinstance(v, list) else v for k, v in row.items()})
    finally:
        if path is not None:
            fh.close()


def _provenance(args, **extra) -> dict:
    out = {"version": __version__, "command": args.command}
    for key in ("seed", "eps", "tol", "h", "samples"):
        if getattr(args, key, None) is not None:
            out[key] = getattr(args, key)
    out.update(extra)
    return out


def run_validate(args) -> int:
    alg, data = _load_spec(args.spec)
    report = {"provenance": _provenance(args, spec_hash=spec_hash(data))}
    code = EXIT_OK
    report["jacobi_residual"] = jacobi_residual(alg)
    bad = jacobi_violations(alg)
    if bad:
        report["jacobi_violations"] = [[i + 1, j + 1, k + 1, r] for i, j, k, r in bad]
        _emit(report | {"ok": False}, args.out)
        return EXIT_STRUCT
    try:
        bases, step = lower_central_series(alg)
        report["lower_central_series_dims"] = [b.shape[1] for b in bases]
        report["step"] = step
    except NotNilpotentError as exc:
        report["nilpotent"] = False
        report["error"] = str(exc)
        code = EXIT_STRUCT
    if isinstance(alg, CarnotAlgebra):
        strat = validate_stratification(alg)
        report["stratification"] = strat.to_dict()
        if not strat.ok:
            code = EXIT_STRUCT
        elif "step" in report and report["step"] != alg.step:
            report["stratification"]["ok"] = False
            report["stratification"]["failures"].append("layer count differs from nilpotency step")
            code = EXIT_STRUCT
    report["ok"] = code == EXIT_OK
    _emit(report, args.out)
    return code


def run_catalog(args) -> int:
    params = {"field": args.field, "n": args.n, "k": args.k}
    try:
        alg = make_catalog(args.name, **{k: v for k, v in params.items() if v is not None})
    except AlgebraError as exc:
        raise CliError(EXIT_STRUCT, str(exc)) from exc
    _emit(algebra_to_dict(alg), args.out)
    return EXIT_OK


def _heintze(alg):
    if not isinstance(alg, CarnotAlgebra):
        raise CliError(EXIT_STRUCT, "spec has no layers; a stratified algebra is required")
    try:
        return heintze_extension(alg)
    except AlgebraError as exc:
        raise CliError(EXIT_STRUCT, str(exc)) from exc


def run_hmetric(args) -> int:
    alg, data = _load_spec(args.spec)
    h = _heintze(alg)
    hm = build_h_metric(h, args.eps, args.seed)
    flags = {"heintze": True, "layered_orthogonal": True, "vertical_unit": True}
    payload = metric_to_dict(
        hm.gram_original,
        spec_hash(data),
        flags,
        eps=hm.eps,
        report=hm.report(),
        provenance=_provenance(args, eps=hm.eps, spec_hash=spec_hash(data)),
    )
    _emit(payload, args.out)
    return EXIT_OK


def _load_metric(path: str) -> np.ndarray:
    data = _read_json(path)
    try:
        gram = metric_from_dict(data)
        validate_metric(gram)
    except (ValueError, MetricError) as exc:
        raise CliError(EXIT_IO if not isinstance(exc, MetricError) else EXIT_STRUCT, f"{path}: {exc}") from exc
    return gram


def _algebra_for_metric(alg, gram):
    """The Heintze extension when the gram covers the vertical slot, else the algebra itself."""
    n = alg.dim
    if gram.shape[0] == n + 1:
        return _heintze(alg)
    if gram.shape[0] == n:
        return alg
    raise CliError(EXIT_STRUCT, f"metric dimension {gram.shape[0]} fits neither {n} nor {n + 1}")


def run_pinch(args) -> int:
    alg, data = _load_spec(args.spec)
    gram = _load_metric(args.metric)
    target = _algebra_for_metric(alg, gram)
    want_rows = bool(args.csv) or args.format == "csv"
    rep = pinching_report(target, gram, args.samples, args.seed, keep_rows=want_rows)
    s = alg.step if isinstance(alg, CarnotAlgebra) else 1
    in_bounds = rep.min_K >= -s * s - args.tol and rep.max_K <= -1 + args.tol
    vertical_ok = bool(rep.vertical) and all(
        abs(row["K"] + row["layer"] ** 2) <= 1e-9 for row in rep.vertical
    )
    payload = rep.to_dict() | {
        "pinched": bool(in_bounds and vertical_ok),
        "bounds": [-s * s, -1],
        "provenance": _provenance(args, spec_hash=spec_hash(data)),
    }
    if args.format == "csv":
        _write_csv(args.out, rep.rows)
    else:
        _emit(payload, args.out)
    if args.csv:
        _write_csv(args.csv, rep.rows)
    return EXIT_OK if in_bounds and vertical_ok else EXIT_PROPERTY


def _parse_vec(text: str, dim: int) -> np.ndarray:
    # "1,0,2" or "[1, 0, 2]"
    try:
        vec = np.array([float(x) for x in text.strip().strip("[]").split(",")])
    except ValueError as exc:
        raise CliError(EXIT_IO, f"cannot parse vector {text!r}") from exc
    if vec.shape != (dim,):
        raise CliError(EXIT_STRUCT, f"vector {text!r} must have length {dim}")
    return vec


def run_curvature(args) -> int:
    alg, data = _load_spec(args.spec)
    gram = _load_metric(args.metric)
    target = _algebra_for_metric(alg, gram)
    dim = gram.shape[0]
    if args.plane:
        try:
            a, b = (int(x) - 1 for x in args.plane.split(","))
        except ValueError as exc:
            raise CliError(EXIT_IO, f"cannot parse plane {args.plane!r}; expected i,j") from exc
        if not (0 <= a < dim and 0 <= b < dim):
            raise CliError(EXIT_STRUCT, f"plane indices must lie in 1..{dim}")
        u, v = np.eye(dim)[a], np.eye(dim)[b]
    elif args.u and args.v:
        u, v = _parse_vec(args.u, dim), _parse_vec(args.v, dim)
    else:
        raise CliError(EXIT_IO, "give --plane i,j or both --u and --v")
    try:
        k = sectional(target, gram, u, v)
    except CurvatureError as exc:
        raise CliError(EXIT_STRUCT, str(exc)) from exc
    _emit({"K": k, "u": u, "v": v, "provenance": _provenance(args, spec_hash=spec_hash(data))}, args.out)
    return EXIT_OK


def _bergman_points(path: str | None) -> np.ndarray:
    if path is None:
        return default_bergman_points()
    data = _read_json(path)
    if isinstance(data, dict):
        data = data.get("points")
    try:
        pts = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_IO, f"{path}: points must be a list of [x, y, z, t]") from exc
    if pts.ndim != 2 or pts.shape[1] != 4:
        raise CliError(EXIT_IO, f"{path}: points must be a list of [x, y, z, t]")
    return pts


def run_chart(args) -> int:
    if args.chart_command == "bergman":
        pts = _bergman_points(args.points)
        margin = 2 * args.h * (2 if args.richardson else 1)
        bad = [p.tolist() for p in pts if not p[2] > margin]
        if bad:
            _emit({"ok": False, "error": "points outside the domain z > 0 (with stencil margin)", "points": bad}, args.out)
            return EXIT_STRUCT
        rep = verify_bergman(
            pts, args.h, args.tol, field=bergman_ch2_field(args.scale), forms=args.forms, richardson=args.richardson
        )
        payload = {
            "ok": rep.ok,
            "max_deviation": rep.max_deviation,
            "forms": args.forms,
            "scale": args.scale,
            "points": len(pts),
            "provenance": _provenance(args),
        }
        _emit(payload, args.out)
        if args.csv:
            _write_csv(args.csv, rep.rows)
        return EXIT_OK if rep.ok else EXIT_PROPERTY
    alg, data = _load_spec(args.spec)
    gram = _load_metric(args.metric)
    h = _heintze(alg)
    n = alg.dim
    if gram.shape[0] != n + 1:
        raise CliError(EXIT_STRUCT, "crosscheck needs a metric on the Heintze extension (dim + 1)")
    if np.any(gram[:n, n] != 0) or gram[n, n] != 1.0:
        raise CliError(EXIT_STRUCT, "crosscheck needs |A| = 1 and A orthogonal to the nilradical")
    try:
        rep = cross_check_base_point(h, gram[:n, :n], args.h)
    except DomainError as exc:
        raise CliError(EXIT_STRUCT, str(exc)) from exc
    ok = rep.max_deviation <= args.tol
    payload = rep.to_dict() | {"ok": ok, "provenance": _provenance(args, spec_hash=spec_hash(data))}
    _emit(payload, args.out)
    if args.csv:
        _write_csv(args.csv, rep.rows)
    return EXIT_OK if ok else EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carnot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="Jacobi, nilpotency and stratification checks")
    p.add_argument("spec")
    p.add_argument("--out")
    p.set_defaults(func=run_validate)

    p = sub.add_parser("catalog", help="emit a catalog algebra spec")
    p.add_argument("name", choices=["heis", "sc_nilradical", "abelian"])
    p.add_argument("--field", choices=["R", "C", "QU", "O"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.set_defaults(func=run_catalog)

    p = sub.add_parser("hmetric", help="build an H-metric on the Heintze extension")
    p.add_argument("spec")
    p.add_argument("--eps", type=float, help="Gromov value (default 1/(20 s))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=run_hmetric)

    p = sub.add_parser("pinch", help="pinching audit of a metric")
    p.add_argument("spec")
    p.add_argument("metric")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=run_pinch)

    p = sub.add_parser("curvature", help="sectional curvature of one plane")
    p.add_argument("spec")
    p.add_argument("metric")
    p.add_argument("--plane", help="1-based basis indices i,j")
    p.add_argument("--u")
    p.add_argument("--v")
    p.add_argument("--out")
    p.set_defaults(func=run_curvature)

    p = sub.add_parser("chart", help="coordinate-chart checks")
    chart = p.add_subparsers(dest="chart_command", required=True)
    b = chart.add_parser("bergman", help="Bergman metric closed forms vs finite differences")
    b.add_argument("--points")
    b.add_argument("--h", type=float, default=DEFAULT_STEP)
    b.add_argument("--tol", type=float, default=1e-5)
    b.add_argument("--scale", type=float, default=1.0, help="multiply the tensor (1/4: holomorphic curvature -4)")
    b.add_argument("--forms", choices=["printed", "corrected"], default="printed")
    b.add_argument("--no-richardson", dest="richardson", action="store_false")
    b.add_argument("--out")
    b.add_argument("--csv")
    b.set_defaults(func=run_chart)
    c = chart.add_parser("crosscheck", help="chart vs algebraic curvature at the base point")
    c.add_argument("spec")
    c.add_argument("metric")
    c.add_argument("--h", type=float, default=DEFAULT_STEP)
    c.add_argument("--tol", type=float, default=1e-4)
    c.add_argument("--out")
    c.add_argument("--csv")
    c.set_defaults(func=run_chart)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "samples", 1) is not None and getattr(args, "samples", 1) < 1:
        parser.error("--samples must be >= 1")
    if getattr(args, "eps", None) is not None and not args.eps > 0:
        parser.error("--eps must be positive")
    if getattr(args, "h", None) is not None and not args.h > 0:
        parser.error("--h must be positive")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"carnot: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
