"""CNF model of optimal Kobon arrangement tables.

Variables (lines, rows 1..n; columns 1..n-1):

* ``A(r, i, k)``  line ``i`` is in column ``k`` of row ``r``
* ``G(r, i, j)``  ``j`` immediately follows ``i`` in row ``r``
* ``X(r, i, j)``  ``j`` comes somewhere after ``i`` in row ``r``
* ``M_k(l_k, i, j)``  segment ``(i, j)`` of line ``l_k`` lacks a triangle

Numbering is A, then G, then X, then one M block per entry of the missing
multiset, each in lexicographic index order.  Clause families are emitted
in order 1..16 and are tagged so counts can be audited per family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .table import ArrangementTable, adjacent_pairs, count_triangles, orbit, validate


class ConfigError(ValueError):
    pass


class DecodeError(ValueError):
    """The assignment does not describe a table; signals an encoder bug."""


@dataclass(frozen=True)
class SearchConfig:
    n: int
    mirror: bool = False
    rot: int | None = None
    missing: tuple = ()
    excluded: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "missing", tuple(int(x) for x in self.missing))
        object.__setattr__(self, "excluded", tuple(self.excluded))
        if self.n < 3:
            raise ConfigError("n must be at least 3")
        if self.rot is not None and self.rot != 1:
            if self.rot < 1 or self.n % self.rot:
                raise ConfigError(f"rotation order {self.rot} does not divide n={self.n}")
            if self.rot % 2 == 0:
                raise ConfigError("only odd rotation orders are supported")
        for line in self.missing:
            if not 1 <= line <= self.n:
                raise ConfigError(f"missing line {line} out of range 1..{self.n}")
        for t in self.excluded:
            if t.n != self.n:
                raise ConfigError(f"excluded table has {t.n} lines, expected {self.n}")

    @property
    def rot_order(self) -> int:
        return self.rot or 1


class VarCatalog:
    """Bijection between ``(kind, indices)`` and DIMACS variable numbers."""

    def __init__(self, n: int, missing: Sequence[int] = ()):
        self.n = n
        self.missing = tuple(missing)
        self._index = {}
        self._names = [None]
        lines = range(1, n + 1)
        for r, i in product(lines, lines):
            if i != r:
                for k in range(1, n):
                    self._add(("A", r, i, k))
        for kind in ("G", "X"):
            for r, i, j in product(lines, lines, lines):
                if len({r, i, j}) == 3:
                    self._add((kind, r, i, j))
        for k, line in enumerate(self.missing):
            for i, j in product(lines, lines):
                if i != j and line not in (i, j):
                    self._add(("M", k, line, i, j))
        self.counts = {kind: sum(1 for nm in self._names[1:] if nm[0] == kind) for kind in "AGXM"}

    def _add(self, key):
        self._names.append(key)
        self._index[key] = len(self._names) - 1

    @property
    def var_count(self) -> int:
        return len(self._names) - 1

    def A(self, r, i, k):
        return self._index[("A", r, i, k)]

    def G(self, r, i, j):
        return self._index[("G", r, i, j)]

    def X(self, r, i, j):
        return self._index[("X", r, i, j)]

    def M(self, k, i, j):
        return self._index[("M", k, self.missing[k], i, j)]

    def name(self, var: int):
        return self._names[var]

    def __len__(self):
        return self.var_count


def expected_var_count(n: int, n_missing: int = 0) -> int:
    return n * (n - 1) * (3 * n - 5) + n_missing * (n - 1) * (n - 2)


def build_catalog(config: SearchConfig) -> VarCatalog:
    return VarCatalog(config.n, config.missing)


@dataclass
class CnfFormula:
    var_count: int
    clauses: list = field(default_factory=list)
    # (family, start, stop) spans into ``clauses``
    families: list = field(default_factory=list)

    def add_family(self, family: str, clauses):
        start = len(self.clauses)
        self.clauses.extend(tuple(c) for c in clauses)
        self.families.append((family, start, len(self.clauses)))

    def family_counts(self) -> dict:
        out = {}
        for fam, a, b in self.families:
            out[fam] = out.get(fam, 0) + b - a
        return out

    def copy(self) -> "CnfFormula":
        return CnfFormula(self.var_count, list(self.clauses), list(self.families))

    def __len__(self):
        return len(self.clauses)


# --------------------------------------------------------------------------
# symmetry maps on lines

def rotation_step(n: int, s: int, t: int = 1):
    """Line map of rotating by ``t`` steps of ``2*pi/s``.

    Returns ``m`` with ``m[l] = (image, flipped)``.  One step advances every
    circle endpoint by ``2n/s`` positions.
    """
    shift = (2 * n // s) * t
    out = [None]
    for line in range(1, n + 1):
        q = (line - 1 + shift) % (2 * n)
        out.append((q + 1, False) if q < n else (q - n + 1, True))
    return out


# --------------------------------------------------------------------------
# encoder

def encode(config: SearchConfig) -> CnfFormula:
    cat = build_catalog(config)
    n = config.n
    L = range(1, n + 1)
    A, G, X = cat.A, cat.G, cat.X
    f = CnfFormula(cat.var_count)

    def others(*xs):
        return [y for y in L if y not in xs]

    rows_i = [(r, i) for r in L for i in others(r)]
    triples = [(r, i, j) for r in L for i in others(r) for j in others(r, i)]
    last = n - 1

    # 1. each row contains all the other lines
    f.add_family("1", ([A(r, i, k) for k in range(1, n)] for r, i in rows_i))
    # 2. no duplicate entries
    f.add_family("2", ((-A(r, i, k), -A(r, i, j)) for r, i in rows_i
                       for k in range(1, n) for j in range(1, n) if j != k))
    # 3. A <-> G
    f.add_family("3a", ((-A(r, i, k), -A(r, j, k + 1), G(r, i, j))
                        for r, i, j in triples for k in range(1, last)))
    f.add_family("3b", ((-A(r, i, k), A(r, j, k + 1), -G(r, i, j))
                        for r, i, j in triples for k in range(1, last)))
    f.add_family("3c", ((A(r, i, k), -A(r, j, k + 1), -G(r, i, j))
                        for r, i, j in triples for k in range(1, last)))
    # 4. one immediate successor
    f.add_family("4", ((-G(r, i, j), -G(r, i, k)) for r, i, j in triples for k in others(r, i, j)))
    # 5. first vs immediately-after
    f.add_family("5a", ((-A(r, i, 1), -G(r, j, i)) for r, i, j in triples))
    f.add_family("5b", ([A(r, i, 1)] + [G(r, j, i) for j in others(r, i)] for r, i in rows_i))
    # 6. last vs immediately-after
    f.add_family("6a", ((-A(r, i, last), -G(r, i, j)) for r, i, j in triples))
    f.add_family("6b", ([A(r, i, last)] + [G(r, i, j) for j in others(r, i)] for r, i in rows_i))
    # 7-9. X is a strict total order per row
    f.add_family("7", ((X(r, i, j), X(r, j, i)) for r, i, j in triples if i < j))
    f.add_family("8", ((-X(r, i, j), -X(r, j, i)) for r, i, j in triples if i < j))
    f.add_family("9", ((-X(r, i, j), -X(r, j, k), X(r, i, k))
                       for r, i, j in triples for k in others(r, i, j)))
    # 10. X vs first/last
    f.add_family("10a", ((-A(r, i, 1), X(r, i, j)) for r, i, j in triples))
    f.add_family("10b", ((-A(r, i, last), X(r, j, i)) for r, i, j in triples))
    f.add_family("10c", ([A(r, i, 1)] + [-X(r, i, j) for j in others(r, i)] for r, i in rows_i))
    f.add_family("10d", ([A(r, i, last)] + [-X(r, j, i) for j in others(r, i)] for r, i in rows_i))
    # 11. G implies X
    f.add_family("11", ((-G(r, i, j), X(r, i, j)) for r, i, j in triples))
    # 12. consistency (X) and optimality (G)
    relax = {}
    for k, line in enumerate(config.missing):
        relax.setdefault(line, []).append(k)
    f.add_family("12G", _triangle_clauses(G, triples, cat, relax))
    f.add_family("12X", _triangle_clauses(X, triples, cat, {}))

    if config.mirror:
        f.add_family("13", _mirror_clauses(n, A))
    if config.rot_order > 1:
        f.add_family("14", _rotation_clauses(n, config.rot_order, A))
    if config.excluded:
        f.add_family("15", (exclusion_clause(t, cat) for t in config.excluded))
    if config.missing:
        f.add_family("16", _missing_clauses(config, cat))
    return f


def _partners(r, i, j):
    """The two literals tied to ``V(r, i, j)`` by the triangle relation.

    For a triple, the bit "the other two lines appear in ascending label
    order" is the same in all three rows.
    """
    if i < j:
        return (i, min(r, j), max(r, j)), (j, min(r, i), max(r, i))
    return (i, max(r, j), min(r, j)), (j, max(r, i), min(r, i))


def _triangle_clauses(V, triples, cat, relax):
    for r, i, j in triples:
        # both orientations of the pair, ascending-order literal first
        p, q = (i, j) if i < j else (j, i)
        for a, b in ((p, q), (q, p)):
            (r1, x1, y1), (r2, x2, y2) = _partners(r, a, b)
            head = V(r, a, b)
            extra = [cat.M(k, a, b) for k in relax.get(r, ())]
            yield (-head, V(r1, x1, y1), *extra)
            yield (-head, V(r2, x2, y2), *extra)
            yield (head, -V(r1, x1, y1), -V(r2, x2, y2))


def _mirror_clauses(n, A):
    for i in range(2, n + 1):
        for k in range(1, n):
            yield (-A(1, i, k), A(1, n - i + 2, n - k))
    for r in range(2, n + 1):
        for i in range(1, n + 1):
            if i == r:
                continue
            for k in range(1, n):
                yield (-A(r, i, k), A(n - r + 2, 1 + (n - i + 1) % n, k))


def _rotation_clauses(n, s, A):
    for t in range(1, s):
        m = rotation_step(n, s, t)
        for r in range(1, n + 1):
            rr, flipped = m[r]
            for i in range(1, n + 1):
                if i == r:
                    continue
                for k in range(1, n):
                    yield (-A(r, i, k), A(rr, m[i][0], n - k if flipped else k))


def _missing_clauses(config, cat):
    n = config.n
    for k, line in enumerate(config.missing):
        pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)
                 if i != j and line not in (i, j)]
        ms = [cat.M(k, i, j) for i, j in pairs]
        # (a) at most one missing segment for this entry
        for a in ms:
            for b in ms:
                if a != b:
                    yield (-a, -b)
        # (b) a missing segment is a real segment
        for (i, j), m in zip(pairs, ms):
            yield (-m, cat.G(line, i, j))


def exclusion_clause(table: ArrangementTable, cat: VarCatalog) -> tuple:
    """Clause falsified exactly by the A-pattern of ``table``."""
    if table.n != cat.n:
        raise ConfigError(f"table has {table.n} lines, catalog {cat.n}")
    rows = table.flat_rows()
    if not table.is_complete:
        raise ConfigError("exclusion needs a complete table")
    return tuple(-cat.A(r, i, c) for r, row in enumerate(rows, start=1)
                 for c, i in enumerate(row, start=1))


def orbit_exclusions(table: ArrangementTable, cat: VarCatalog) -> list:
    """One exclusion clause per distinct relabeling of ``table``."""
    return [exclusion_clause(t, cat) for t in orbit(table)]


# --------------------------------------------------------------------------
# assignments

def decode_model(assignment, cat: VarCatalog) -> ArrangementTable:
    """Read the table from the A variables of a model.

    ``assignment`` is indexable by variable number (index 0 unused) and holds
    truthy values for true variables.
    """
    n = cat.n
    rows = []
    for r in range(1, n + 1):
        row = [None] * (n - 1)
        for i in range(1, n + 1):
            if i == r:
                continue
            cols = [k for k in range(1, n) if assignment[cat.A(r, i, k)]]
            if len(cols) != 1:
                raise DecodeError(f"line {i} occupies columns {cols} of row {r}")
            if row[cols[0] - 1] is not None:
                raise DecodeError(f"row {r} column {cols[0]} holds two lines")
            row[cols[0] - 1] = i
        rows.append(tuple(row))
    table = ArrangementTable(tuple(rows))
    report = validate(table)
    if not report.ok:
        raise DecodeError(f"decoded table is invalid: {report.violations[0]}")
    return table


def table_assignment(table: ArrangementTable, cat: VarCatalog) -> list:
    """Full assignment (A, G, X and M) describing a complete table.

    Missing segments of a line listed ``m`` times in the catalog are handed
    out to its M blocks in row order; ``M`` stays false when a line has no
    missing segment left.
    """
    n = cat.n
    val = [False] * (cat.var_count + 1)
    rows = table.flat_rows()
    for r, row in enumerate(rows, start=1):
        for c, i in enumerate(row, start=1):
            val[cat.A(r, i, c)] = True
        for a in range(len(row)):
            if a + 1 < len(row):
                val[cat.G(r, row[a], row[a + 1])] = True
            for b in range(a + 1, len(row)):
                val[cat.X(r, row[a], row[b])] = True
    if cat.missing:
        tris = count_triangles(table)
        free = {}
        for r, p, q in adjacent_pairs(table):
            if tuple(sorted((r, p, q))) not in tris:
                free.setdefault(r, []).append((p, q))
        for k, line in enumerate(cat.missing):
            if free.get(line):
                i, j = free[line].pop(0)
                val[cat.M(k, i, j)] = True
    return val


def satisfies(formula: CnfFormula, assignment) -> bool:
    return first_falsified(formula, assignment) is None


def first_falsified(formula: CnfFormula, assignment):
    """Index of the first clause not satisfied by ``assignment``, else None."""
    for idx, clause in enumerate(formula.clauses):
        for lit in clause:
            if bool(assignment[abs(lit)]) == (lit > 0):
                break
        else:
            return idx
    return None


# --------------------------------------------------------------------------
# DIMACS

def dimacs_body(clauses) -> str:
    return "".join(" ".join(map(str, c)) + " 0\n" for c in clauses)


def emit_dimacs(formula: CnfFormula) -> str:
    return f"p cnf {formula.var_count} {len(formula.clauses)}\n" + dimacs_body(formula.clauses)


def parse_dimacs(text: str) -> CnfFormula:
    var_count = None
    lits = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad header: {line!r}")
            var_count = int(parts[2])
            continue
        lits.extend(int(x) for x in line.split())
    if var_count is None:
        raise ValueError("missing 'p cnf' header")
    clauses, cur = [], []
    for x in lits:
        if x == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(x)
    if cur:
        raise ValueError("last clause is not 0-terminated")
    f = CnfFormula(var_count)
    f.add_family("dimacs", clauses)
    return f


def parse_model(text: str, var_count: int | None = None) -> list:
    """Parse solver ``v`` lines into a boolean list indexed by variable."""
    true, seen_max = set(), 0
    for line in text.splitlines():
        if not line.startswith("v"):
            continue
        for tok in line[1:].split():
            x = int(tok)
            if x > 0:
                true.add(x)
            seen_max = max(seen_max, abs(x))
    size = var_count if var_count is not None else seen_max
    val = [False] * (size + 1)
    for x in true:
        if x <= size:
            val[x] = True
    return val


def format_model(assignment) -> str:
    lits = [str(v if assignment[v] else -v) for v in range(1, len(assignment))]
    lines = []
    for a in range(0, len(lits), 20):
        lines.append("v " + " ".join(lits[a:a + 20]))
    lines.append("v 0")
    return "\n".join(lines) + "\n"
