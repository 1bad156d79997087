"""Command-line interface: ``sh2synth <command> ...``.

Exit codes: 0 success, 1 verification or numeric failure, 2 usage error.
Numbers are printed with 17 significant digits.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import tempfile
from pathlib import Path

from . import kernels
from .errors import DomainError, NumericFailure
from .expmap import exp
from .optimality import bounds, conj_time_numeric
from .pendulum import SEPARATRIX_TOL, Covector, classify
from .plane import classify_plane
from .sampling import (
    SampleGrid,
    export,
    sample_caustic,
    sample_cutlocus,
    sample_sphere,
    sample_wavefront,
)
from .synthesis import SolverConfig, minimizers
from .verify import SUITES, run


def _num(v: float) -> str:
    return format(float(v), ".17g")


def _grid(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be N or NxM, got {text!r}") from None
    if len(vals) == 1:
        vals *= 2
    if len(vals) != 2 or min(vals) < 2:
        raise argparse.ArgumentTypeError("grid counts must be integers >= 2")
    return vals[0], vals[1]


def _emit(args, payload: dict) -> None:
    if args.format == "json":
        print(json.dumps(payload))
        return
    for key, val in payload.items():
        if isinstance(val, float):
            val = _num(val)
        print(f"{key}: {val}")


def _cmd_exp(args) -> int:
    q = exp(Covector(args.gamma, args.c), args.t, args.tol)
    if args.format == "json":
        print(json.dumps({"x": q.x, "y": q.y, "z": q.z}))
    else:
        print(" ".join(_num(v) for v in q))
    return 0


def _cmd_cut_time(args) -> int:
    lam = Covector(args.gamma, args.c)
    b = bounds(lam, args.tol)
    payload = {"stratum": classify(lam, args.tol).component, "cut_time": b.t_cut,
               "t1_max": b.t_max1, "t_conj_lo": b.t_conj_lo, "t_conj_hi": b.t_conj_hi}
    if args.conj:
        payload["t1_conj"] = conj_time_numeric(lam, args.tol)
    _emit(args, payload)
    return 0


def _cmd_classify(args) -> int:
    if args.covector:
        tag = classify(Covector(args.a, args.b), args.tol)
        _emit(args, {"stratum": tag.stratum.value, "component": tag.component})
        return 0
    lab = classify_plane(args.a, args.b, args.tol)
    _emit(args, {"index": lab.stratum_index, "indices": list(lab.indices),
                 "family": lab.family, "cut_family": lab.cut_family})
    return 0


def _config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol) if args.tol is not None else SolverConfig()


def _cmd_distance(args) -> int:
    res = minimizers((args.x, args.y, args.z), _config(args))
    _emit(args, {"distance": res.distance})
    return 0


def _cmd_synth(args) -> int:
    res = minimizers((args.x, args.y, args.z), _config(args))
    mins = [{"gamma": nu.lam.gamma, "c": nu.lam.c, "t": nu.t,
             "stratum": classify(nu.lam).component} for nu in res.minimizers]
    if args.format == "json":
        print(json.dumps({"classification": res.classification, "distance": res.distance,
                          "residual": res.residual, "minimizers": mins}))
        return 0
    print(f"classification: {res.classification}")
    print(f"distance: {_num(res.distance)}")
    print(f"residual: {_num(res.residual)}")
    for i, m in enumerate(mins):
        print(f"minimizer {i}: gamma={_num(m['gamma'])} c={_num(m['c'])} "
              f"t={_num(m['t'])} stratum={m['stratum']}")
    return 0


def _sample_grid(args, radius: float = math.pi) -> SampleGrid:
    n_g, n_c = args.grid
    return SampleGrid(n_gamma=n_g, n_c=n_c, c_max=args.c_max, radius=radius)


def _write(args, mesh) -> int:
    if args.out is None:
        fmt = args.format if args.format in ("csv", "jsonl", "obj") else "csv"
        with tempfile.TemporaryDirectory() as tmp:
            path = export(mesh, Path(tmp) / f"mesh.{fmt}", fmt)
            sys.stdout.write(path.read_text())
    else:
        fmt = args.format if args.format in ("csv", "jsonl", "obj") else None
        export(mesh, args.out, fmt)
    print(json.dumps(mesh.stats), file=sys.stderr)
    return 0


def _cmd_sphere(args) -> int:
    return _write(args, sample_sphere(args.radius, _sample_grid(args, args.radius), args.workers))


def _cmd_wavefront(args) -> int:
    return _write(args, sample_wavefront(args.radius, _sample_grid(args, args.radius), args.workers))


def _cmd_caustic(args) -> int:
    return _write(args, sample_caustic(_sample_grid(args), args.workers))


def _cmd_cutlocus(args) -> int:
    band = args.tol if args.tol is not None else 1e-7
    return _write(args, sample_cutlocus(args.extent, _sample_grid(args), band))


def _cmd_verify(args) -> int:
    checks = run(args.suite)
    for chk in checks:
        if args.format == "json":
            print(json.dumps(chk.as_dict()))
        else:
            mark = "PASS" if chk.passed else "FAIL"
            print(f"{mark} {chk.suite:<10} {chk.name:<40} err={chk.error:.3e} tol={chk.tol:.1e}")
    return 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="tolerance (separatrix band, solver residual or curve band)")
    common.add_argument("--grid", type=_grid, default=(256, 256), help="N or NxM sample grid")
    common.add_argument("--out", type=Path, default=None, help="output file (.csv, .jsonl, .obj)")
    common.add_argument("--format", choices=("text", "json", "csv", "jsonl", "obj"), default=None)

    p = argparse.ArgumentParser(prog="sh2synth", description=__doc__.splitlines()[0])
    p.add_argument("--backend", action="store_true", help="print the kernel backend and exit")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("exp", parents=[common], help="endpoint of a geodesic")
    s.add_argument("gamma", type=float)
    s.add_argument("c", type=float)
    s.add_argument("t", type=float)
    s.set_defaults(func=_cmd_exp, sep_tol=True)

    s = sub.add_parser("cut-time", parents=[common], help="cut, Maxwell and conjugate times")
    s.add_argument("gamma", type=float)
    s.add_argument("c", type=float)
    s.add_argument("--conj", action="store_true", help="also locate the first conjugate time")
    s.set_defaults(func=_cmd_cut_time, sep_tol=True)

    s = sub.add_parser("classify", parents=[common],
                       help="plane stratum of (x, y), or pendulum stratum with --covector")
    s.add_argument("a", type=float)
    s.add_argument("b", type=float)
    s.add_argument("--covector", action="store_true")
    s.set_defaults(func=_cmd_classify)

    for name, fn, text in (("distance", _cmd_distance, "sub-Riemannian distance"),
                           ("synth", _cmd_synth, "all minimizers and their classification")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("x", type=float)
        s.add_argument("y", type=float)
        s.add_argument("z", type=float)
        s.set_defaults(func=fn)

    for name, fn in (("sphere", _cmd_sphere), ("wavefront", _cmd_wavefront)):
        s = sub.add_parser(name, parents=[common], help=f"sample the {name} of a radius")
        s.add_argument("--radius", type=float, default=math.pi)
        s.add_argument("--c-max", type=float, default=6.0)
        s.add_argument("--workers", type=int, default=1)
        s.set_defaults(func=fn)

    s = sub.add_parser("caustic", parents=[common], help="sample the first caustic")
    s.add_argument("--c-max", type=float, default=6.0)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=_cmd_caustic)

    s = sub.add_parser("cutlocus", parents=[common], help="sample the cut locus in z = 0")
    s.add_argument("--extent", type=float, default=20.0)
    s.add_argument("--c-max", type=float, default=6.0)
    s.set_defaults(func=_cmd_cutlocus)

    s = sub.add_parser("verify", parents=[common], help="run self-check suites")
    s.add_argument("suite", nargs="?", default="all", choices=SUITES + ("all",))
    s.set_defaults(func=_cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.backend:
        print(kernels.BACKEND)
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    if getattr(args, "sep_tol", False) or args.command == "classify":
        if args.tol is None:
            args.tol = SEPARATRIX_TOL if args.command != "classify" or args.covector else 1e-9
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
