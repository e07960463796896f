"""Straight-line realizations of arrangement tables.

Line ``i`` is ``x cos a_i + y sin a_i + C_i = 0`` with ``-pi < a_i < 0`` and
angles strictly decreasing with the label.  Each line is walked along
``(-sin a, cos a)``; with this orientation the table labels coincide with the
angle order and row ``r`` lists the other lines by increasing position along
line ``r``.

A table is realized by minimizing a sum of one-sided quadratic penalties
over angles and offsets with L-BFGS-B.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from .table import ArrangementTable, canonicalize, count_triangles

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LineSet:
    angles: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float).copy()
        c = np.asarray(self.offsets, dtype=float).copy()
        if a.shape != c.shape or a.ndim != 1:
            raise ValueError("angles and offsets must be 1-d arrays of equal length")
        a.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "offsets", c)

    @property
    def n(self) -> int:
        return len(self.angles)

    def __eq__(self, other):
        if not isinstance(other, LineSet):
            return NotImplemented
        return np.array_equal(self.angles, other.angles) and np.array_equal(self.offsets, other.offsets)

    __hash__ = None

    def normalized(self) -> "LineSet":
        """Same lines with every angle moved into ``(-pi, 0]``."""
        a = np.array(self.angles)
        c = np.array(self.offsets)
        k = np.floor(-a / math.pi)  # number of pi shifts needed
        a = a + k * math.pi
        c = c * np.where(k % 2 == 0, 1.0, -1.0)
        return LineSet(a, c)

    def ordered(self) -> bool:
        a = self.angles
        return bool(np.all((a < 0) & (a > -math.pi)) and np.all(np.diff(a) < 0))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.angles, self.offsets])

    @classmethod
    def from_vector(cls, x) -> "LineSet":
        x = np.asarray(x, dtype=float)
        n = len(x) // 2
        return cls(x[:n], x[n:])


def format_lines(lines: LineSet) -> str:
    return "".join(f"{i} {a:.17g} {c:.17g}\n"
                   for i, (a, c) in enumerate(zip(lines.angles, lines.offsets), start=1))


def parse_lines(text: str) -> LineSet:
    rows = []
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if ln:
            i, a, c = ln.split()
            rows.append((int(i), float(a), float(c)))
    rows.sort()
    if [r[0] for r in rows] != list(range(1, len(rows) + 1)):
        raise ValueError("line records must be numbered 1..n")
    return LineSet([r[1] for r in rows], [r[2] for r in rows])


# --------------------------------------------------------------------------
# core formulas

def F(i: int, j: int, k: int, lines: LineSet) -> float:
    """Zero iff lines i, j, k (1-based) pass through one point."""
    a, c = lines.angles, lines.offsets
    i, j, k = i - 1, j - 1, k - 1
    return (c[i] * math.sin(a[k] - a[j]) + c[j] * math.sin(a[i] - a[k])
            + c[k] * math.sin(a[j] - a[i]))


def S(row: int, l1: int, l2: int, n: int) -> float:
    """Sign correction making ``S * F < 0`` mean ``l2`` follows ``l1`` in ``row``."""
    def lifted(x):
        return x + n if x < row else x

    s = 1.0 if l1 > l2 else -1.0
    return -s if lifted(l1) < lifted(l2) else s


def crossing_params(lines: LineSet, r: int) -> np.ndarray:
    """Position of every crossing along line ``r`` (nan for itself and parallels)."""
    a, c = lines.angles, lines.offsets
    r -= 1
    d = a - a[r]
    s = np.sin(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (c[r] * np.cos(d) - c) / s
    t[np.abs(s) < 1e-12] = np.nan
    t[r] = np.nan
    return t


def _label_order(lines: LineSet, tol: float):
    """Indices sorted into label order: angle descending, then offset."""
    a = lines.angles
    keys = sorted(range(lines.n), key=lambda i: (-a[i], lines.offsets[i]))
    # parallel lines must compare by offset even when angles differ by noise
    out = []
    for i in keys:
        if out and abs(a[out[-1]] - a[i]) <= tol and lines.offsets[i] < lines.offsets[out[-1]]:
            j = len(out)
            while j > 0 and abs(a[out[j - 1]] - a[i]) <= tol and lines.offsets[out[j - 1]] > lines.offsets[i]:
                j -= 1
            out.insert(j, i)
        else:
            out.append(i)
    return out


def relabeled(lines: LineSet, tol: float = 1e-9) -> LineSet:
    """Normalize angles and renumber lines into label order."""
    ls = lines.normalized()
    order = _label_order(ls, tol)
    return LineSet(ls.angles[order], ls.offsets[order])


def induced_table(lines: LineSet, tol: float = 1e-9) -> ArrangementTable:
    """Table of a straight-line arrangement.

    Lines are first normalized and renumbered into label order (a no-op for
    an ordered LineSet).  Crossings closer than ``tol`` (relative to the
    arrangement scale) form one multi-line entry; parallel lines are left out
    of each other's rows.
    """
    ls = relabeled(lines, tol)
    n = ls.n
    params = [crossing_params(ls, r) for r in range(1, n + 1)]
    finite = np.concatenate([p[np.isfinite(p)] for p in params]) if n > 1 else np.zeros(1)
    scale = max(1.0, float(np.max(np.abs(finite))) if finite.size else 1.0)
    rows = []
    for r in range(1, n + 1):
        t = params[r - 1]
        idx = [j for j in np.argsort(t, kind="stable") if np.isfinite(t[j])]
        entries = []
        for j in idx:
            if entries and abs(t[j] - t[entries[-1][-1]]) <= tol * scale:
                entries[-1].append(j)
            else:
                entries.append([j])
        row = []
        for e in entries:
            ids = [int(j) + 1 for j in e]
            if len(ids) == 1:
                row.append(ids[0])
            else:
                # members listed cyclically after r in label order
                row.append(tuple(sorted(ids, key=lambda x: (x - r) % n)))
        rows.append(tuple(row))
    return ArrangementTable(tuple(rows))


def intersection(lines: LineSet, i: int, j: int):
    a, c = lines.angles, lines.offsets
    m = np.array([[math.cos(a[i - 1]), math.sin(a[i - 1])], [math.cos(a[j - 1]), math.sin(a[j - 1])]])
    return np.linalg.solve(m, -np.array([c[i - 1], c[j - 1]]))


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def geometric_triangles(lines: LineSet, tol: float = 1e-9) -> frozenset:
    """Empty triangles of a straight-line arrangement, from coordinates.

    A triple counts when its three crossings are distinct simple crossings
    and no other line passes through the interior of the triangle.
    Triangles with a multi-line vertex are skipped, matching the table count.
    """
    ls = lines
    n = ls.n
    a, c = ls.angles, ls.offsets
    normals = np.stack([np.cos(a), np.sin(a)], axis=1)
    pts = {}
    for i, j in combinations(range(n), 2):
        if abs(math.sin(a[i] - a[j])) < 1e-12:
            continue
        pts[i, j] = np.linalg.solve(normals[[i, j]], -c[[i, j]])
    allp = np.array(list(pts.values())) if pts else np.zeros((1, 2))
    scale = max(1.0, float(np.abs(allp).max()))
    eps = tol * scale
    out = set()
    for i, j, k in combinations(range(n), 3):
        if (i, j) not in pts or (i, k) not in pts or (j, k) not in pts:
            continue
        v = np.array([pts[i, j], pts[i, k], pts[j, k]])
        area = abs(_cross(v[1] - v[0], v[2] - v[0]))
        if area <= eps * eps:
            continue
        rest = [m for m in range(n) if m not in (i, j, k)]
        if rest:
            vals = v @ normals[rest].T + c[rest]  # 3 x len(rest)
            if (np.abs(vals) <= eps).any():
                continue
            pos = (vals > 0).any(axis=0)
            neg = (vals < 0).any(axis=0)
            if (pos & neg).any():
                continue
        out.add((i + 1, j + 1, k + 1))
    return frozenset(out)


def initial_guess(n: int, cfg=None) -> LineSet:
    i = np.arange(1, n + 1)
    a = -math.pi / (2 * n) - math.pi * (i - 1) / n
    c = 0.1 * (-1.0) ** (i % 2)
    return LineSet(a, c)


# --------------------------------------------------------------------------
# geometric relabelings

def shift_lines(lines: LineSet) -> LineSet:
    """Move line 1 to the end (reversing it) and recentre the angles."""
    a = np.append(lines.angles[1:], lines.angles[0] - math.pi)
    c = np.append(lines.offsets[1:], -lines.offsets[0])
    mid = (a[0] + a[-1]) / 2
    rot = -math.pi / 2 - mid
    return LineSet(a + rot, c)


def reflect_lines(lines: LineSet) -> LineSet:
    """Mirror image ``x -> -x``: labels reversed, every line flipped."""
    return LineSet((-math.pi - lines.angles)[::-1], lines.offsets[::-1])


def geometric_orbit(lines: LineSet):
    """Yield the ``4n`` relabelings of an ordered LineSet."""
    cur = lines
    for _ in range(2 * lines.n):
        yield cur
        yield reflect_lines(cur)
        cur = shift_lines(cur)


def align(lines: LineSet, table: ArrangementTable, tol: float = 1e-9):
    """Relabel ``lines`` so the induced table equals ``table``; None if impossible."""
    base = relabeled(lines, tol)
    if base.n != table.n:
        return None
    for cand in geometric_orbit(base):
        if induced_table(cand, tol) == table:
            return cand
    return None


# --------------------------------------------------------------------------
# tan form: y = m (x - c)

def tan_to_lineset(slopes, intercepts, delta: float | None = None) -> LineSet:
    """Convert ``y = m_i (x - c_i)`` lines into angle/offset form.

    The picture is rotated by a quarter turn less ``delta`` so the slope-0
    line becomes line 1; by default ``delta`` splits the free angle range
    evenly.
    """
    m = np.asarray(slopes, dtype=float)
    cc = np.asarray(intercepts, dtype=float)
    theta = np.arctan(m)
    theta = np.where(m > 0, theta - math.pi, theta)
    if delta is None:
        delta = (math.pi + theta.min()) / 2
    return LineSet(theta - delta, -cc * np.sin(theta))


def lineset_to_tan(lines: LineSet, delta: float):
    """Inverse of :func:`tan_to_lineset` for a known ``delta``."""
    theta = lines.angles + delta
    m = np.tan(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(np.abs(np.sin(theta)) > 1e-15, -lines.offsets / np.sin(theta), 0.0)
    return m, c


# --------------------------------------------------------------------------
# target

@dataclass(frozen=True)
class PenaltyConfig:
    ineq_eps: float = 1e-3
    ineq_max: float = 10.0
    a_min: float | None = None  # default pi/(4n)
    a_max: float | None = None  # default 3 pi/n
    main_coefficient: float = 1.0
    rot: int = 1
    mirror: bool = False
    c_min: float = -100.0
    c_max: float = 100.0
    restarts: int = 20
    seed: int = 0
    maxiter: int = 20000
    group_tol: float = 1e-6

    def __post_init__(self):
        if not (self.ineq_eps > 0 and self.ineq_max > self.ineq_eps):
            raise ValueError("need 0 < ineq_eps < ineq_max")
        if self.main_coefficient <= 0:
            raise ValueError("main_coefficient must be positive")
        if self.rot < 1 or (self.rot > 1 and self.rot % 2 == 0):
            raise ValueError("rot must be 1 or an odd order")
        if self.a_min is not None and self.a_max is not None:
            if not 0 <= self.a_min < self.a_max <= math.pi:
                raise ValueError("need 0 <= a_min < a_max <= pi")

    def angle_bounds(self, n: int):
        lo = math.pi / (4 * n) if self.a_min is None else self.a_min
        hi = 3 * math.pi / n if self.a_max is None else self.a_max
        return lo, min(hi, math.pi)


def less_than(x, v):
    d = np.asarray(x) - v
    return np.where(d >= 0, d * d, 0.0)


@dataclass
class _Terms:
    """Index arrays describing every penalty term of a table."""
    n: int
    r: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    s: np.ndarray
    gr: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    parallel: set = field(default_factory=set)


def _first(e):
    return e[0] if isinstance(e, tuple) else e


def table_terms(table: ArrangementTable) -> _Terms:
    n = table.n
    r_, a_, b_, s_ = [], [], [], []
    gr, g1, g2 = [], [], []
    for r, row in enumerate(table.rows, start=1):
        for e1, e2 in zip(row, row[1:]):
            p, q = _first(e1), _first(e2)
            r_.append(r - 1)
            a_.append(p - 1)
            b_.append(q - 1)
            s_.append(S(r, p, q, n))
        for e in row:
            if isinstance(e, tuple):
                for p, q in zip(e, e[1:]):
                    gr.append(r - 1)
                    g1.append(p - 1)
                    g2.append(q - 1)
    par = set()
    for r, row in enumerate(table.rows, start=1):
        seen = {x for e in row for x in (e if isinstance(e, tuple) else (e,))}
        for x in range(1, n + 1):
            if x != r and x not in seen:
                par.add((min(r, x), max(r, x)))
    ar = lambda v: np.asarray(v, dtype=int)
    return _Terms(n, ar(r_), ar(a_), ar(b_), np.asarray(s_, dtype=float),
                  ar(gr), ar(g1), ar(g2), par)


def _F_and_grad(a, c, i, j, k):
    """Vectorized F(i,j,k) and its partial derivatives."""
    skj = np.sin(a[k] - a[j])
    sik = np.sin(a[i] - a[k])
    sji = np.sin(a[j] - a[i])
    ckj = np.cos(a[k] - a[j])
    cik = np.cos(a[i] - a[k])
    cji = np.cos(a[j] - a[i])
    f = c[i] * skj + c[j] * sik + c[k] * sji
    da_i = c[j] * cik - c[k] * cji
    da_j = -c[i] * ckj + c[k] * cji
    da_k = c[i] * ckj - c[j] * cik
    return f, (da_i, da_j, da_k), (skj, sik, sji)


def _target_full(x, terms: _Terms, cfg: PenaltyConfig, eps: float, fmax: float):
    n = terms.n
    a, c = x[:n], x[n:]
    g = np.zeros(2 * n)
    w = cfg.main_coefficient
    total = 0.0

    def add_F(idx, coef):
        i, j, k = idx
        (da_i, da_j, da_k), (dc_i, dc_j, dc_k) = dF[0], dF[1]
        np.add.at(g, i, coef * da_i)
        np.add.at(g, j, coef * da_j)
        np.add.at(g, k, coef * da_k)
        np.add.at(g, n + i, coef * dc_i)
        np.add.at(g, n + j, coef * dc_j)
        np.add.at(g, n + k, coef * dc_k)

    if len(terms.r):
        idx = (terms.r, terms.l1, terms.l2)
        f, *dF = _F_and_grad(a, c, *idx)
        sf = terms.s * f
        lo = sf + eps  # want sf < -eps
        hi = -sf - fmax  # want sf > -fmax
        lo_on = lo >= 0
        hi_on = hi >= 0
        total += w * (np.sum(lo[lo_on] ** 2) + np.sum(hi[hi_on] ** 2))
        coef = w * 2 * (np.where(lo_on, lo, 0.0) - np.where(hi_on, hi, 0.0)) * terms.s
        add_F(idx, coef)
    if len(terms.gr):
        idx = (terms.gr, terms.g1, terms.g2)
        f, *dF = _F_and_grad(a, c, *idx)
        wg = 10.0 * w
        total += wg * np.sum(f * f)
        add_F(idx, wg * 2 * f)

    # angle terms: a_i < a_1, gaps within [a_min, a_max], wrap-around gap
    a_lo, a_hi = cfg.angle_bounds(n)
    d = a[1:] - a[0]
    on = d >= 0
    total += np.sum(d[on] ** 2)
    g[1:n] += np.where(on, 2 * d, 0.0)
    g[0] -= np.sum(np.where(on, 2 * d, 0.0))

    gap = a[:-1] - a[1:]
    keep = np.array([(i + 1, i + 2) not in terms.parallel for i in range(n - 1)], dtype=bool)
    u = (a_lo - gap) * keep
    v = (gap - a_hi) * keep
    u_on, v_on = u >= 0, v >= 0
    total += np.sum(u[u_on] ** 2) + np.sum(v[v_on] ** 2)
    dgap = np.where(u_on, -2 * u, 0.0) + np.where(v_on, 2 * v, 0.0)
    g[:n - 1] += dgap
    g[1:n] -= dgap

    wrap = a[0] - math.pi - a[-1] + a_lo
    if wrap >= 0:
        total += wrap * wrap
        g[0] += 2 * wrap
        g[n - 1] -= 2 * wrap

    # parallel lines: smaller label gets the smaller offset
    for i, j in sorted(terms.parallel):
        e = c[i - 1] - c[j - 1] + eps
        if e >= 0:
            total += w * e * e
            g[n + i - 1] += w * 2 * e
            g[n + j - 1] -= w * 2 * e
    return total, g


def target(lines: LineSet, table: ArrangementTable, cfg: PenaltyConfig = PenaltyConfig()) -> float:
    terms = table_terms(table)
    return float(_target_full(lines.to_vector(), terms, cfg, cfg.ineq_eps, cfg.ineq_max)[0])


def target_gradient(lines: LineSet, table: ArrangementTable, cfg: PenaltyConfig = PenaltyConfig()):
    """Analytic gradient of :func:`target` over ``(angles, offsets)``."""
    terms = table_terms(table)
    return _target_full(lines.to_vector(), terms, cfg, cfg.ineq_eps, cfg.ineq_max)[1]


# --------------------------------------------------------------------------
# variable tying: x_full = P @ x_free + q

def _tying(n: int, cfg: PenaltyConfig, parallel: set):
    rows_a = []  # per line: (free index or None, coef, const)
    free = []  # kinds of free variables for bounds: "a" or "c"
    P = []
    q = []

    def new_free(kind):
        free.append(kind)
        return len(free) - 1

    amap, cmap = {}, {}
    if cfg.rot > 1:
        s = cfg.rot
        if n % s:
            raise ValueError(f"rotation order {s} does not divide n={n}")
        base = n // s
        for l in range(base):
            amap[l] = (new_free("a"), 1.0, 0.0)
        for l in range(base):
            cmap[l] = (new_free("c"), 1.0, 0.0)
        for t in range(1, s):
            for l in range(base):
                fa, _, _ = amap[l]
                fc, _, _ = cmap[l]
                amap[l + t * base] = (fa, 1.0, -t * math.pi / s)
                cmap[l + t * base] = (fc, (-1.0) ** t, 0.0)
    elif cfg.mirror:
        a1 = new_free("a")
        amap[0] = (a1, 1.0, 0.0)
        cmap[0] = (new_free("c"), 1.0, 0.0)
        for l in range(2, n + 1):
            m = n - l + 2
            if l < m:
                amap[l - 1] = (new_free("a"), 1.0, 0.0)
                cmap[l - 1] = (new_free("c"), 1.0, 0.0)
            elif l == m:
                amap[l - 1] = ("mid", 0.0, 0.0)
                cmap[l - 1] = (None, 0.0, 0.0)
        for l in range(2, n + 1):
            m = n - l + 2
            if l > m:
                amap[l - 1] = ("mirror", m - 1, 0.0)
                cmap[l - 1] = (cmap[m - 1][0], -1.0, 0.0)
    else:
        tied = {}
        for i, j in sorted(parallel):
            tied[j - 1] = tied.get(i - 1, i - 1)
        for l in range(n):
            if l in tied:
                amap[l] = ("same", tied[l], 0.0)
            else:
                amap[l] = (new_free("a"), 1.0, 0.0)
        for l in range(n):
            cmap[l] = (new_free("c"), 1.0, 0.0)

    m = len(free)
    P = np.zeros((2 * n, m))
    q = np.zeros(2 * n)
    for l in range(n):
        kind = amap[l][0]
        if kind == "mid":
            P[l, amap[0][0]] = 1.0
            q[l] = -math.pi / 2
        elif kind == "mirror":
            src = amap[l][1]
            P[l, amap[0][0]] = 2.0
            P[l, amap[src][0]] -= 1.0
            q[l] = -math.pi
        elif kind == "same":
            P[l, amap[amap[l][1]][0]] = 1.0
        else:
            fi, coef, const = amap[l]
            P[l, fi] = coef
            q[l] = const
        fi, coef, const = cmap[l]
        if fi is not None:
            P[n + l, fi] = coef
        q[n + l] = const
    return P, q, free


@dataclass
class FitResult:
    lines: LineSet
    residual: float
    satisfied: bool
    iterations: int
    restarts: int = 0
    report: "MarginReport | None" = None
    message: str = ""


def _bounds(free, cfg: PenaltyConfig):
    amax = math.pi / cfg.rot
    return [(-amax, 0.0) if k == "a" else (cfg.c_min, cfg.c_max) for k in free]


def _start_vector(n, P, q, free, restart, cfg):
    x0 = initial_guess(n).to_vector()
    # least-squares pull of the guess into the free coordinates
    z, *_ = np.linalg.lstsq(P, x0 - q, rcond=None)
    if restart:
        rng = np.random.default_rng([cfg.seed, restart])
        for t, kind in enumerate(free):
            span = math.pi / (8 * n) if kind == "a" else 0.05
            z[t] += rng.uniform(-span, span)
    lo, hi = np.array(_bounds(free, cfg)).T
    return np.clip(z, lo, hi)


def _run_one(args):
    table, cfg, restart = args
    n = table.n
    terms = table_terms(table)
    if (cfg.rot > 1 or cfg.mirror) and terms.parallel:
        raise ValueError("symmetry tying does not support parallel lines")
    P, q, free = _tying(n, cfg, terms.parallel)
    # optimize against slightly stricter thresholds so the result clears
    # the real ones with room to spare
    eps = 2 * cfg.ineq_eps
    fmax = 0.9 * cfg.ineq_max

    def fun(z):
        val, g = _target_full(P @ z + q, terms, cfg, eps, fmax)
        return val, P.T @ g

    z0 = _start_vector(n, P, q, free, restart, cfg)
    res = minimize(fun, z0, jac=True, method="L-BFGS-B", bounds=_bounds(free, cfg),
                   options={"maxiter": cfg.maxiter, "ftol": 1e-16, "gtol": 1e-14, "maxcor": 30})
    lines = LineSet.from_vector(P @ res.x + q)
    return lines, float(res.fun), int(res.nit)


def fit(table: ArrangementTable, cfg: PenaltyConfig = PenaltyConfig(), jobs: int = 1) -> FitResult:
    """Search for straight lines realizing ``table``.

    Restart 0 starts from :func:`initial_guess`; later restarts jitter it
    with a seed derived from ``cfg.seed`` and the restart index.
    """
    count = max(1, cfg.restarts)
    best = None
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            runs = list(pool.map(_run_one, [(table, cfg, k) for k in range(count)]))
        for k, run in enumerate(runs):
            out = _judge(table, cfg, run, k)
            if out.satisfied:
                return out
            if best is None or out.residual < best.residual:
                best = out
        return best
    for k in range(count):
        out = _judge(table, cfg, _run_one((table, cfg, k)), k)
        log.debug("restart %d: residual %.3g satisfied=%s", k, out.residual, out.satisfied)
        if out.satisfied:
            return out
        if best is None or out.residual < best.residual:
            best = out
    return best


def _judge(table, cfg, run, restart):
    lines, _, nit = run
    rep = verify_fit(lines, table, eps=cfg.ineq_eps, fmax=cfg.ineq_max, group_tol=cfg.group_tol)
    residual = target(lines, table, cfg)
    return FitResult(lines, residual, rep.passed, nit, restart + 1, rep,
                     "" if rep.passed else rep.summary())


def tan_form_fit(table: ArrangementTable, intercepts, cfg: PenaltyConfig = PenaltyConfig()) -> FitResult:
    """Fit slopes only, for lines ``y = m_i (x - c_i)`` with fixed ``c_i``.

    Line 1 is pinned to ``m = 0`` through the origin; ``intercepts[0]`` must
    be 0.  The returned LineSet uses the quarter-turn rotation of
    :func:`tan_to_lineset` with ``delta = pi/(4n)``; ``FitResult.message``
    holds nothing on success.  Slopes are recovered with
    :func:`lineset_to_tan`.
    """
    n = table.n
    cc = np.asarray(intercepts, dtype=float)
    if cc.shape != (n,):
        raise ValueError(f"need {n} intercepts")
    if cc[0] != 0:
        raise ValueError("line 1 must pass through the origin")
    if len(set(np.round(cc, 12))) != n:
        raise ValueError("intercepts must be distinct")
    delta = math.pi / (4 * n)
    terms = table_terms(table)
    eps, fmax = 2 * cfg.ineq_eps, 0.9 * cfg.ineq_max
    scfg = replace(cfg, a_min=0.0, a_max=math.pi)

    def expand(th):
        theta = np.concatenate([[0.0], th])
        return np.concatenate([theta - delta, -cc * np.sin(theta)]), theta

    def fun(th):
        x, theta = expand(th)
        val, g = _target_full(x, terms, scfg, eps, fmax)
        grad = g[1:n] + g[n + 1:] * (-cc[1:] * np.cos(theta[1:]))
        return val, grad

    bounds = [(-math.pi + delta + 1e-9, -1e-9)] * (n - 1)
    best = None
    for k in range(max(1, cfg.restarts)):
        th0 = -math.pi * np.arange(1, n) / n
        if k:
            rng = np.random.default_rng([cfg.seed, k])
            th0 = th0 + rng.uniform(-math.pi / (8 * n), math.pi / (8 * n), n - 1)
        th0 = np.clip(th0, *bounds[0])
        res = minimize(fun, th0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": cfg.maxiter, "ftol": 1e-16, "gtol": 1e-14})
        x, _ = expand(res.x)
        lines = LineSet.from_vector(x)
        rep = verify_fit(lines, table, eps=cfg.ineq_eps, fmax=cfg.ineq_max)
        out = FitResult(lines, float(res.fun), rep.passed, int(res.nit), k + 1, rep,
                        "" if rep.passed else rep.summary())
        if out.satisfied:
            return out
        if best is None or out.residual < best.residual:
            best = out
    return best


# --------------------------------------------------------------------------
# verification

@dataclass
class MarginReport:
    slacks: list  # (row, l1, l2, slack); slack > 0 means satisfied
    group_residuals: list  # (row, l1, l2, |F|)
    table_triangles: int
    geometric_triangles: int
    induced_matches: bool
    group_tol: float

    @property
    def min_slack(self) -> float:
        return min((s[3] for s in self.slacks), default=math.inf)

    @property
    def violations(self) -> list:
        bad = [("order",) + s for s in self.slacks if not s[3] > 0]
        bad += [("group",) + g for g in self.group_residuals if g[3] > self.group_tol]
        return bad

    @property
    def constraints_ok(self) -> bool:
        return not self.violations

    @property
    def passed(self) -> bool:
        return (self.constraints_ok and self.induced_matches
                and self.table_triangles == self.geometric_triangles)

    def summary(self) -> str:
        v = self.violations
        return (f"{len(v)} violated constraints, min slack {self.min_slack:.3g}, "
                f"triangles table={self.table_triangles} geometric={self.geometric_triangles}, "
                f"induced table {'matches' if self.induced_matches else 'differs'}")


def verify_fit(lines: LineSet, table: ArrangementTable, eps: float = 0.0, fmax: float = math.inf,
               group_tol: float = 1e-6) -> MarginReport:
    """Signed slack of every order constraint plus a triangle cross-check.

    Slack for consecutive ``l1, l2`` in row ``r`` is
    ``min(-S*F - eps, S*F + fmax)``; the default ``eps = 0`` only asks for
    strict inequalities.
    """
    if lines.n != table.n:
        raise ValueError(f"{lines.n} lines for a {table.n}-line table")
    terms = table_terms(table)
    a, c = lines.angles, lines.offsets
    slacks, groups = [], []
    if len(terms.r):
        f, *_ = _F_and_grad(a, c, terms.r, terms.l1, terms.l2)
        sf = terms.s * f
        sl = np.minimum(-sf - eps, sf + fmax)
        slacks = [(int(r) + 1, int(p) + 1, int(q) + 1, float(v))
                  for r, p, q, v in zip(terms.r, terms.l1, terms.l2, sl)]
    if len(terms.gr):
        f, *_ = _F_and_grad(a, c, terms.gr, terms.g1, terms.g2)
        groups = [(int(r) + 1, int(p) + 1, int(q) + 1, float(abs(v)))
                  for r, p, q, v in zip(terms.gr, terms.g1, terms.g2, f)]
    tol = max(1e-9, group_tol) if table.has_groups else 1e-9
    ind = induced_table(lines, tol)
    matches = ind == table
    if not matches and not lines.ordered():
        try:
            matches = canonicalize(ind) == canonicalize(table)
        except ValueError:
            matches = False
    try:
        tt = len(count_triangles(table))
    except ValueError:
        tt = -1
    gt = len(geometric_triangles(lines, tol))
    return MarginReport(slacks, groups, tt, gt, matches, group_tol)
