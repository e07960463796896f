"""SAT backends and all-solutions enumeration.

Two backends are available: a small embedded DPLL solver (no learning, fine
for n <= 7) and any external DIMACS solver such as Kissat, run as a
subprocess.  Every SAT model is checked against the full clause list before
it is returned.
"""

from __future__ import annotations

import logging
import os
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cnf import (
    CnfFormula,
    SearchConfig,
    build_catalog,
    decode_model,
    dimacs_body,
    encode,
    exclusion_clause,
    parse_model,
)
from .table import ArrangementTable, orbit

log = logging.getLogger(__name__)

SAT, UNSAT, UNKNOWN = "SAT", "UNSAT", "UNKNOWN"
SOLVER_ENV = "KOBON_SOLVER"


class BackendError(RuntimeError):
    pass


@dataclass(frozen=True)
class SatOutcome:
    status: str
    assignment: tuple | None = None
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == SAT

    def value(self, var: int) -> bool:
        if self.assignment is None:
            raise ValueError("no model")
        return bool(self.assignment[var])


@dataclass
class EnumerationResult:
    tables: list
    exhaustive: bool
    stats: list = field(default_factory=list)
    clause_count: int = 0
    error: str | None = None

    @property
    def total_time(self) -> float:
        return sum(s.get("wall_time", 0.0) for s in self.stats)


def check_model(clauses, assignment) -> int | None:
    """Return the index of a falsified clause, or None when all hold."""
    if not clauses:
        return None
    val = np.asarray([bool(x) for x in assignment], dtype=bool)
    lengths = np.fromiter((len(c) for c in clauses), dtype=np.int64, count=len(clauses))
    if (lengths == 0).any():
        return int(np.argmax(lengths == 0))
    flat = np.fromiter((x for c in clauses for x in c), dtype=np.int64, count=int(lengths.sum()))
    if np.abs(flat).max() >= len(val):
        raise BackendError("model is shorter than the variable range")
    truth = val[np.abs(flat)] == (flat > 0)
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    ok = np.logical_or.reduceat(truth, starts)
    bad = np.flatnonzero(~ok)
    return int(bad[0]) if len(bad) else None


# --------------------------------------------------------------------------
# embedded DPLL

def solve_embedded(formula: CnfFormula, time_limit: float | None = None) -> SatOutcome:
    """Complete DPLL search with two watched literals.

    Branches on the lowest unassigned variable, false first, and backtracks
    chronologically.  ``time_limit`` is only meant as a safety net in tests;
    without it the result is never UNKNOWN.
    """
    t0 = time.perf_counter()
    nv = formula.var_count
    val = [0] * (nv + 1)  # +1 true, -1 false, 0 free
    watches = {}
    clauses = []
    units = []
    for c in formula.clauses:
        c = list(dict.fromkeys(c))
        if any(-x in c for x in c):
            continue
        if not c:
            return _embedded_done(UNSAT, None, 0, 0, t0)
        if len(c) == 1:
            units.append(c[0])
            continue
        idx = len(clauses)
        clauses.append(c)
        watches.setdefault(c[0], []).append(idx)
        watches.setdefault(c[1], []).append(idx)

    trail = []
    levels = []  # (trail length at decision, var, flipped)
    decisions = props = 0

    def assign(lit):
        val[abs(lit)] = 1 if lit > 0 else -1
        trail.append(lit)

    for u in units:
        v = val[abs(u)]
        if v == 0:
            assign(u)
        elif (v > 0) != (u > 0):
            return _embedded_done(UNSAT, None, 0, 0, t0)

    qhead = 0
    next_var = 1
    while True:
        # unit propagation
        conflict = False
        while qhead < len(trail):
            false_lit = -trail[qhead]
            qhead += 1
            ws = watches.get(false_lit)
            if not ws:
                continue
            keep = []
            i = 0
            nws = len(ws)
            while i < nws:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = val[abs(first)]
                if fv != 0 and (fv > 0) == (first > 0):
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    lit = c[k]
                    lv = val[abs(lit)]
                    if lv == 0 or (lv > 0) == (lit > 0):
                        c[1], c[k] = lit, false_lit
                        watches.setdefault(lit, []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if fv == 0:
                        assign(first)
                        props += 1
                    else:
                        conflict = True
                        keep.extend(ws[i:])
                        break
            watches[false_lit] = keep
            if conflict:
                break

        if conflict:
            while True:
                if not levels:
                    return _embedded_done(UNSAT, None, decisions, props, t0)
                mark, var, flipped = levels.pop()
                for lit in trail[mark:]:
                    val[abs(lit)] = 0
                del trail[mark:]
                qhead = mark
                next_var = min(next_var, var)
                if not flipped:
                    levels.append((mark, var, True))
                    assign(var)
                    break
            continue

        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            return _embedded_done(UNKNOWN, None, decisions, props, t0)
        while next_var <= nv and val[next_var] != 0:
            next_var += 1
        if next_var > nv:
            model = tuple([False] + [v > 0 for v in val[1:]])
            bad = check_model(formula.clauses, model)
            if bad is not None:
                raise BackendError(f"embedded model violates clause {bad}")
            return _embedded_done(SAT, model, decisions, props, t0)
        decisions += 1
        levels.append((len(trail), next_var, False))
        assign(-next_var)


def _embedded_done(status, model, decisions, props, t0):
    stats = {"backend": "embedded", "decisions": decisions, "propagations": props,
             "wall_time": time.perf_counter() - t0}
    return SatOutcome(status, model, stats)


# --------------------------------------------------------------------------
# external backend

def find_solver(explicit: str | None = None) -> str | None:
    """Locate an external DIMACS solver.

    Order: explicit path, ``$KOBON_SOLVER``, ``kissat`` on PATH, then the
    binary shipped by the ``passagemath-kissat`` wheel.
    """
    for cand in (explicit, os.environ.get(SOLVER_ENV)):
        if cand:
            path = shutil.which(cand) or cand
            if not os.path.isfile(path):
                raise BackendError(f"solver not found: {cand}")
            return path
    path = shutil.which("kissat")
    if path:
        return path
    try:
        import sage_wheels
        for base in sage_wheels.__path__:
            cand = os.path.join(base, "bin", "kissat")
            if os.path.isfile(cand) and os.access(cand, os.X_OK):
                return cand
    except ImportError:
        pass
    return None


def solve_dimacs_file(path, var_count: int, solver: str | None = None,
                      time_limit: float | None = None):
    """Run the external solver on a DIMACS file; returns (status, model, stats)."""
    exe = find_solver(solver)
    if exe is None:
        raise BackendError(f"no external SAT solver found (set {SOLVER_ENV} or install kissat)")
    cmd = [exe]
    if os.path.basename(exe).startswith("kissat"):
        cmd.append("-q")
        if time_limit:
            cmd.append(f"--time={max(1, int(time_limit))}")
    cmd.append(str(path))
    t0 = time.perf_counter()
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True,
                              timeout=(time_limit + 30) if time_limit else None)
    except subprocess.TimeoutExpired:
        return UNKNOWN, None, {"backend": exe, "wall_time": time.perf_counter() - t0}
    except OSError as exc:
        raise BackendError(f"cannot launch {exe}: {exc}") from exc
    stats = {"backend": exe, "wall_time": time.perf_counter() - t0, "exit_code": proc.returncode}
    status_line = next((ln.split()[1] for ln in proc.stdout.splitlines()
                        if ln.startswith("s ") and len(ln.split()) > 1), None)
    code = proc.returncode
    if code == 10 or (code not in (20,) and status_line == "SATISFIABLE"):
        if not any(ln.startswith("v") for ln in proc.stdout.splitlines()):
            raise BackendError("solver reported SAT without a model")
        return SAT, tuple(parse_model(proc.stdout, var_count)), stats
    if code == 20 or status_line == "UNSATISFIABLE":
        return UNSAT, None, stats
    if code == 0 or status_line == "UNKNOWN":
        return UNKNOWN, None, stats
    raise BackendError(f"solver exit {code}: {proc.stderr.strip()[:500]}")


def solve_external(formula: CnfFormula, solver: str | None = None,
                   time_limit: float | None = None) -> SatOutcome:
    with tempfile.TemporaryDirectory(prefix="kobon-") as tmp:
        path = Path(tmp) / "formula.cnf"
        _write_dimacs(path, formula.var_count, [dimacs_body(formula.clauses)], len(formula.clauses))
        status, model, stats = solve_dimacs_file(path, formula.var_count, solver, time_limit)
    return _verified(formula.clauses, status, model, stats)


def _verified(clauses, status, model, stats):
    if status == SAT:
        bad = check_model(clauses, model)
        if bad is not None:
            raise BackendError(f"solver model violates clause {bad}")
    return SatOutcome(status, model, stats)


def _write_dimacs(path, var_count, chunks, n_clauses):
    with open(path, "w") as fh:
        fh.write(f"p cnf {var_count} {n_clauses}\n")
        for chunk in chunks:
            fh.write(chunk)


def solve(formula: CnfFormula, backend: str = "external", solver: str | None = None,
          time_limit: float | None = None) -> SatOutcome:
    if backend == "embedded":
        return solve_embedded(formula, time_limit)
    if backend == "external":
        return solve_external(formula, solver, time_limit)
    raise ValueError(f"unknown backend {backend!r}")


def backend_available(solver: str | None = None) -> bool:
    try:
        return find_solver(solver) is not None
    except BackendError:
        return False


# --------------------------------------------------------------------------
# enumeration

def enumerate_tables(config: SearchConfig, backend: str = "external", limit: int | None = None,
                     solver: str | None = None, time_limit: float | None = None,
                     block: str = "orbit", workdir=None) -> EnumerationResult:
    """Find every table of ``config``, one blocking step per solution.

    With ``block="orbit"`` each solution also blocks all its relabelings, so
    the result lists one table per isomorphism class.  ``block="single"``
    blocks only the returned A-assignment.  ``time_limit`` bounds each
    solver call.
    """
    if block not in ("orbit", "single"):
        raise ValueError("block must be 'orbit' or 'single'")
    cat = build_catalog(config)
    formula = encode(config)
    base_clauses = formula.clauses
    blocking = []
    tables, stats = [], []

    own_dir = None
    if backend == "external":
        own_dir = tempfile.TemporaryDirectory(prefix="kobon-enum-")
        wd = Path(workdir) if workdir else Path(own_dir.name)
        wd.mkdir(parents=True, exist_ok=True)
        cnf_path = wd / f"kobon_n{config.n}.cnf"
        base_body = dimacs_body(base_clauses)
    try:
        while limit is None or len(tables) < limit:
            try:
                if backend == "external":
                    _write_dimacs(cnf_path, cat.var_count, [base_body, dimacs_body(blocking)],
                                  len(base_clauses) + len(blocking))
                    status, model, st = solve_dimacs_file(cnf_path, cat.var_count, solver, time_limit)
                    out = _verified(base_clauses + blocking, status, model, st)
                else:
                    work = CnfFormula(cat.var_count, base_clauses + blocking)
                    out = solve(work, backend, solver, time_limit)
            except BackendError as exc:
                return EnumerationResult(tables, False, stats, len(base_clauses) + len(blocking), str(exc))
            stats.append(dict(out.stats, status=out.status))
            if out.status == UNSAT:
                return EnumerationResult(tables, True, stats, len(base_clauses) + len(blocking))
            if out.status == UNKNOWN:
                return EnumerationResult(tables, False, stats, len(base_clauses) + len(blocking),
                                         "solver budget exhausted")
            table = decode_model(out.assignment, cat)
            tables.append(table)
            log.info("n=%d: table %d found in %.1fs", config.n, len(tables), out.stats["wall_time"])
            members = orbit(table) if block == "orbit" else [table]
            blocking.extend(exclusion_clause(t, cat) for t in members)
        return EnumerationResult(tables, False, stats, len(base_clauses) + len(blocking))
    finally:
        if own_dir is not None:
            own_dir.cleanup()
