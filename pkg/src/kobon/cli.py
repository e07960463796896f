"""Command line: generate CNF, enumerate, count, validate, straighten, render.

Exit codes: 0 ok (an empty enumeration included), 2 usage, 4 solver
backend failure, 5 straightening failure, 6 validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import cnf, sat
from .render import RenderConfig, ZoomRegion, detect_small_triangles, render_svg, crossing_radius
from .straighten import (
    LineSet,
    PenaltyConfig,
    fit,
    format_lines,
    lineset_to_tan,
    parse_lines,
    tan_form_fit,
    verify_fit,
)
from .table import TableError, count_triangles, format_table, parse_table, validate

EXIT_OK, EXIT_USAGE, EXIT_BACKEND, EXIT_FIT, EXIT_INVALID = 0, 2, 4, 5, 6

log = logging.getLogger("kobon")


class Manifest:
    """Run record: config echo, stage timings, artifact paths."""

    def __init__(self, command, args):
        self.t0 = time.perf_counter()
        self.data = {"command": command,
                     "config": {k: v for k, v in vars(args).items() if k not in ("func", "config")},
                     "timings": {}, "artifacts": {}}

    def stage(self, name):
        m = self

        class _Timer:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                m.data["timings"][name] = m.data["timings"].get(name, 0.0) + time.perf_counter() - self.t
        return _Timer()

    def artifact(self, kind, path):
        self.data["artifacts"].setdefault(kind, []).append(str(path))

    def write(self, path):
        self.data["timings"]["total"] = time.perf_counter() - self.t0
        Path(path).write_text(json.dumps(self.data, indent=2, default=str) + "\n")


def _missing(text):
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated line ids, got {text!r}")


def _read_tables(path):
    """One or more table literals in a file; blank-line separated or a JSON list."""
    text = Path(path).read_text()
    stripped = text.strip()
    if stripped.startswith("[[[") or stripped.startswith("[ [["):
        return [parse_table(json.dumps(rows)) for rows in json.loads(stripped)]
    chunks = [c for c in stripped.split("\n\n") if c.strip()]
    return [parse_table(c) for c in chunks]


def _search_config(args):
    excluded = []
    for path in args.exclude or ():
        excluded.extend(_read_tables(path))
    return cnf.SearchConfig(args.n, mirror=args.mirror, rot=args.rot,
                            missing=args.missing, excluded=tuple(excluded))


def _table_row(cfg, formula):
    flags = ("M" if cfg.mirror else "-", str(cfg.rot) if cfg.rot else "-",
             ",".join(map(str, cfg.missing)) or "-")
    return (f"{'n':>3} {'-M':>3} {'-R':>3} {'-L':>6} {'vars':>7} {'clauses':>9}\n"
            f"{cfg.n:>3} {flags[0]:>3} {flags[1]:>3} {flags[2]:>6} {formula.var_count:>7} {len(formula):>9}")


def cmd_gen(args):
    man = Manifest("gen", args)
    with man.stage("encode"):
        cfg = _search_config(args)
        formula = cnf.encode(cfg)
    out = Path(args.output or f"kobon_n{cfg.n}.cnf")
    with man.stage("write"):
        out.write_text(cnf.emit_dimacs(formula))
    man.artifact("cnf", out)
    print(_table_row(cfg, formula))
    if args.families:
        for fam, count in formula.family_counts().items():
            print(f"  family {fam:>4}: {count}")
    if args.manifest:
        man.write(args.manifest)
    return EXIT_OK


def cmd_enumerate(args):
    man = Manifest("enumerate", args)
    cfg = _search_config(args)
    backend = "embedded" if args.embedded else "external"
    if backend == "external" and not sat.backend_available(args.solver):
        print(f"error: no external SAT solver (set {sat.SOLVER_ENV}, pass --solver or use --embedded)",
              file=sys.stderr)
        return EXIT_BACKEND
    with man.stage("solve"):
        res = sat.enumerate_tables(cfg, backend, limit=args.limit, solver=args.solver,
                                   time_limit=args.time_limit, block=args.block)
    outdir = Path(args.output) if args.output else None
    with man.stage("write"):
        if outdir:
            outdir.mkdir(parents=True, exist_ok=True)
        for k, table in enumerate(res.tables, start=1):
            text = format_table(table) + "\n"
            if outdir:
                path = outdir / f"n{cfg.n}_{k:03d}.table"
                path.write_text(text)
                man.artifact("tables", path)
            else:
                print(text)
    man.data["exhaustive"] = res.exhaustive
    man.data["tables"] = len(res.tables)
    man.data["clauses"] = res.clause_count
    man.data["solves"] = res.stats
    print(f"n={cfg.n}: {len(res.tables)} table(s), "
          f"{'exhaustive' if res.exhaustive else 'not exhaustive'}, "
          f"{res.clause_count} clauses, {res.total_time:.2f}s solver time")
    manifest = args.manifest or (outdir / "manifest.json" if outdir else None)
    if manifest:
        man.write(manifest)
    if res.error and not res.tables and not res.exhaustive:
        print(f"error: {res.error}", file=sys.stderr)
        return EXIT_BACKEND
    if res.error and res.error != "solver budget exhausted":
        print(f"error: {res.error}", file=sys.stderr)
        return EXIT_BACKEND
    return EXIT_OK


def _load_table(path):
    return parse_table(Path(path).read_text())


def cmd_validate(args):
    try:
        table = _load_table(args.table)
    except TableError as exc:
        print(f"invalid: {exc.prop}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    rep = validate(table, allow_parallel=args.allow_parallel)
    if rep.ok:
        print(f"valid {table.n}-line table")
        return EXIT_OK
    for v in rep.violations:
        print(f"violation: {v.prop} in row {v.row}: {list(v.ids)}")
    return EXIT_INVALID


def cmd_count(args):
    try:
        table = _load_table(args.table)
        tris = count_triangles(table)
    except TableError as exc:
        print(f"invalid: {exc.prop}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(len(tris))
    if args.list:
        for t in sorted(tris):
            print(*t)
    return EXIT_OK


def _penalty_config(args):
    kw = dict(ineq_eps=args.ineq_eps, ineq_max=args.ineq_max, a_min=args.a_min, a_max=args.a_max,
              main_coefficient=args.main_coefficient, rot=args.rot or 1, mirror=args.mirror,
              restarts=args.restarts, seed=args.seed)
    return PenaltyConfig(**kw)


def _tan_intercepts(text, n):
    """Intercepts from a named printed arrangement or comma list of slots.

    Slots: ``0``, ``tanK`` for tan(K pi/(n-1)), ``eps`` / ``-eps`` for
    +-1/(2n), or a plain number.
    """
    from .published import TAN_FORM, tan_form
    if text in TAN_FORM:
        return tan_form(text)[1]
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok.startswith("tan"):
            out.append(math.tan(int(tok[3:]) * math.pi / (n - 1)))
        elif tok in ("eps", "+eps"):
            out.append(1 / (2 * n))
        elif tok == "-eps":
            out.append(-1 / (2 * n))
        else:
            out.append(float(tok))
    return out


def cmd_straighten(args):
    man = Manifest("straighten", args)
    table = _load_table(args.table)
    rep = validate(table, allow_parallel=True)
    if not rep.ok:
        v = rep.violations[0]
        print(f"invalid table: {v.prop} in row {v.row}", file=sys.stderr)
        return EXIT_INVALID
    pcfg = _penalty_config(args)
    with man.stage("fit"):
        if args.tan_form:
            res = tan_form_fit(table, _tan_intercepts(args.tan_form, table.n), pcfg)
        else:
            res = fit(table, pcfg, jobs=args.jobs)
    out = Path(args.output) if args.output else None
    text = format_lines(res.lines)
    if args.tan_form:
        m, c = lineset_to_tan(res.lines, math.pi / (4 * table.n))
        text += "# y = m_i (x - c_i)\n" + "".join(
            f"# {i} {mi:.7f} {ci:.7f}\n" for i, (mi, ci) in enumerate(zip(m, c), start=1))
    if out:
        out.write_text(text)
        man.artifact("coordinates", out)
    else:
        sys.stdout.write(text)
    man.data["satisfied"] = res.satisfied
    man.data["residual"] = res.residual
    man.data["restarts"] = res.restarts
    print(f"{'satisfied' if res.satisfied else 'NOT satisfied'}: residual {res.residual:.3g}, "
          f"restarts {res.restarts}, {res.report.summary()}", file=sys.stderr)
    if args.manifest:
        man.write(args.manifest)
    return EXIT_OK if res.satisfied else EXIT_FIT


def cmd_render(args):
    man = Manifest("render", args)
    lines = parse_lines(Path(args.coords).read_text())
    table = _load_table(args.table) if args.table else None
    if table is not None and not verify_fit(lines, table).passed:
        print("error: coordinates do not realize the table", file=sys.stderr)
        return EXIT_FIT
    zoom = []
    if args.zoom and table is not None:
        for cl in detect_small_triangles(lines, table, args.threshold)[:args.zoom]:
            zoom.append(ZoomRegion(cl.center, 2 * max(cl.radius, 1e-9), args.zoom_gain))
    fisheye = None
    if args.fisheye == "auto":
        fisheye = crossing_radius(lines) / 2
    elif args.fisheye:
        fisheye = float(args.fisheye)
    cfg = RenderConfig(size=args.size, fisheye=fisheye, local_zoom=tuple(zoom),
                       shade_triangles=table is not None, labels=args.labels)
    with man.stage("render"):
        svg = render_svg(lines, table, cfg)
    out = Path(args.output)
    out.write_text(svg)
    man.artifact("svg", out)
    man.data["render"] = asdict(cfg)
    if args.manifest:
        man.write(args.manifest)
    print(f"wrote {out}")
    return EXIT_OK


def _search_flags(p):
    p.add_argument("-n", type=int, required=True, help="number of lines")
    p.add_argument("-M", "--mirror", action="store_true", help="mirror symmetry")
    p.add_argument("-R", "--rot", type=int, help="rotational symmetry order")
    p.add_argument("-L", "--missing", type=_missing, default=(), help="lines lacking a triangle, e.g. 6,9")
    p.add_argument("--exclude", action="append", help="file of tables to exclude (repeatable)")


def _penalty_flags(p):
    d = PenaltyConfig()
    p.add_argument("--ineq-eps", type=float, default=d.ineq_eps)
    p.add_argument("--ineq-max", type=float, default=d.ineq_max)
    p.add_argument("--a-min", type=float, default=None, help="default pi/(4n)")
    p.add_argument("--a-max", type=float, default=None, help="default 3pi/n")
    p.add_argument("--main-coefficient", type=float, default=d.main_coefficient)
    p.add_argument("-R", "--rot", type=int, help="tie variables under rotation of this order")
    p.add_argument("-M", "--mirror", action="store_true", help="tie variables under mirror symmetry")
    p.add_argument("--restarts", type=int, default=d.restarts)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--jobs", type=int, default=1, help="parallel restarts")
    p.add_argument("--tan-form", help="fit slopes only; A1..A6 or slots like 0,tan-1,eps,-eps,tan1")


def build_parser():
    ap = argparse.ArgumentParser(prog="kobon", description="Kobon triangle arrangement toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--config", help="JSON file of option defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write the DIMACS CNF for a search")
    _search_flags(p)
    p.add_argument("-o", "--output", help="CNF path (default kobon_n<N>.cnf)")
    p.add_argument("--families", action="store_true", help="print clause counts per family")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("enumerate", help="list every table up to relabeling")
    _search_flags(p)
    p.add_argument("--embedded", action="store_true", help="use the built-in DPLL solver")
    p.add_argument("--solver", help=f"external solver binary (else ${sat.SOLVER_ENV} or kissat)")
    p.add_argument("--limit", type=int)
    p.add_argument("--time-limit", type=float, help="seconds per solver call")
    p.add_argument("--block", choices=("orbit", "single"), default="orbit")
    p.add_argument("-o", "--output", help="directory for table files")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("validate", help="check table properties")
    p.add_argument("table")
    p.add_argument("--allow-parallel", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("count", help="count empty triangles of a table")
    p.add_argument("table")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("straighten", help="fit straight lines to a table")
    p.add_argument("table")
    _penalty_flags(p)
    p.add_argument("-o", "--output", help="coordinates file (i a_i C_i per line)")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_straighten)

    p = sub.add_parser("render", help="draw fitted lines as SVG")
    p.add_argument("coords")
    p.add_argument("table", nargs="?")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--size", type=int, default=800)
    p.add_argument("--fisheye", help="radius in world units or 'auto'")
    p.add_argument("--zoom", type=int, default=0, help="zoom into this many small-triangle clusters")
    p.add_argument("--zoom-gain", type=float, default=1.0)
    p.add_argument("--threshold", type=float, default=0.1, help="small = area below this x median")
    p.add_argument("--labels", action="store_true")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None):
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = ap.parse_args(argv)
    if args.config:
        try:
            defaults = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            ap.error(f"cannot read config: {exc}")
        # config supplies defaults; explicit flags still win
        for sp in ap._subparsers._group_actions[0].choices.values():
            sp.set_defaults(**{k.replace("-", "_"): v for k, v in defaults.items()})
        args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (cnf.ConfigError, ValueError) as exc:
        if isinstance(exc, TableError):
            print(f"invalid: {exc.prop}: {exc}", file=sys.stderr)
            return EXIT_INVALID
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except sat.BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
