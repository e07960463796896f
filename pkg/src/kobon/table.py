"""Arrangement tables: parsing, validation, triangle counting, relabeling.

A table has one row per line.  Row ``r`` lists the lines crossing line ``r``
in the order met when walking along line ``r`` in its assigned direction.
Lines are numbered clockwise by their entry points on a circle enclosing all
crossings, starting from line 1.  An entry is either a line id or a tuple of
ids (a point where three or more lines meet).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence, Union

Entry = Union[int, tuple]


class TableError(ValueError):
    """Raised for malformed tables.

    ``prop`` names the violated property (``syntax``, ``self-exclusion``,
    ``non-repetition``, ``completeness``, ``consistency``); ``row`` is 1-based
    or ``None``; ``pos`` is a character offset for syntax errors.
    """

    def __init__(self, message, prop="syntax", row=None, pos=None):
        super().__init__(message)
        self.prop = prop
        self.row = row
        self.pos = pos


def _members(entry):
    return entry if isinstance(entry, tuple) else (entry,)


@dataclass(frozen=True)
class ArrangementTable:
    rows: tuple

    def __post_init__(self):
        rows = tuple(
            tuple(e if isinstance(e, int) else tuple(int(x) for x in e) for e in row)
            for row in self.rows
        )
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def has_groups(self) -> bool:
        return any(isinstance(e, tuple) for row in self.rows for e in row)

    @property
    def is_complete(self) -> bool:
        n = self.n
        return all(
            sorted(x for e in row for x in _members(e)) == [x for x in range(1, n + 1) if x != r]
            for r, row in enumerate(self.rows, start=1)
        )

    def row(self, r: int) -> tuple:
        return self.rows[r - 1]

    def flat_rows(self) -> tuple:
        """Rows as plain int tuples; only valid for group-free tables."""
        if self.has_groups:
            raise TableError("table has multi-line points", prop="groups")
        return self.rows

    def __str__(self):
        return format_table(self)


def format_table(table: ArrangementTable, compact: bool = False) -> str:
    """Render the bracketed literal, one row per line unless ``compact``."""

    def ent(e):
        return "[" + ",".join(map(str, e)) + "]" if isinstance(e, tuple) else str(e)

    rows = ["[" + ",".join(ent(e) for e in row) + "]" for row in table.rows]
    sep = "," if compact else ",\n "
    return "[" + sep.join(rows) + "]"


def _check_structure(rows):
    for r, row in enumerate(rows, start=1):
        seen = set()
        for e in row:
            members = _members(e)
            if isinstance(e, tuple) and len(members) < 2:
                raise TableError(f"row {r}: group {list(e)} has fewer than 2 lines",
                                 prop="syntax", row=r)
            for x in members:
                if not 1 <= x <= len(rows):
                    raise TableError(f"row {r}: line id {x} out of range 1..{len(rows)}",
                                     prop="syntax", row=r)
                if x == r:
                    raise TableError(f"row {r} contains its own line", prop="self-exclusion", row=r)
                if x in seen:
                    raise TableError(f"row {r} repeats line {x}", prop="non-repetition", row=r)
                seen.add(x)


def _to_table(data) -> ArrangementTable:
    if not isinstance(data, list) or not data:
        raise TableError("table literal must be a non-empty list of rows")
    rows = []
    for r, row in enumerate(data, start=1):
        if not isinstance(row, list):
            raise TableError(f"row {r} is not a list", row=r)
        out = []
        for e in row:
            if isinstance(e, bool):
                raise TableError(f"row {r}: unexpected value {e!r}", row=r)
            if isinstance(e, int):
                out.append(e)
            elif isinstance(e, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in e):
                out.append(tuple(e))
            else:
                raise TableError(f"row {r}: unexpected entry {e!r}", row=r)
        rows.append(tuple(out))
    _check_structure(rows)
    return ArrangementTable(tuple(rows))


def parse_table(text: str) -> ArrangementTable:
    """Parse a literal such as ``[[3,2],[3,1],[2,1]]``.

    Whitespace and newlines are ignored.  Raises :class:`TableError` with
    ``pos`` set for syntax errors and ``prop`` set for structural ones.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TableError(f"syntax error at position {exc.pos}: {exc.msg}", pos=exc.pos) from None
    return _to_table(data)


def table_from_rows(rows: Sequence[Sequence]) -> ArrangementTable:
    data = [[list(e) if isinstance(e, (list, tuple)) else e for e in row] for row in rows]
    return _to_table(data)


def table_to_json(table: ArrangementTable) -> str:
    rows = [[list(e) if isinstance(e, tuple) else e for e in row] for row in table.rows]
    return json.dumps({"n": table.n, "rows": rows})


def table_from_json(text: str) -> ArrangementTable:
    obj = json.loads(text)
    table = _to_table(obj["rows"])
    if "n" in obj and obj["n"] != table.n:
        raise TableError(f"declared n={obj['n']} but found {table.n} rows")
    return table


# --------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Violation:
    prop: str
    row: int
    ids: tuple


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _single_positions(table):
    """pos[r][x] = column of single entry x in row r (groups skipped)."""
    pos = [None]
    for row in table.rows:
        pos.append({e: c for c, e in enumerate(row) if isinstance(e, int)})
    return pos


def _point_cycle(r, group):
    """Cyclic order of all lines at a multi-line point, normalised to start at min."""
    cyc = (r,) + tuple(group)
    k = cyc.index(min(cyc))
    return cyc[k:] + cyc[:k]


def validate(table: ArrangementTable, allow_parallel: bool = False) -> ValidationReport:
    """Check self-exclusion, non-repetition, completeness and consistency.

    With ``allow_parallel`` rows may omit lines, provided omission is mutual
    (parallel lines never cross).  Consistency is checked on triples whose
    three crossings are all single entries: in each of the three rows the
    other two lines must appear in ascending label order, or in all three rows
    in descending order.
    """
    n = table.n
    out = []
    present = [None]
    for r, row in enumerate(table.rows, start=1):
        seen = []
        for e in row:
            seen.extend(_members(e))
        if r in seen:
            out.append(Violation("self-exclusion", r, (r,)))
        dup = sorted({x for x in seen if seen.count(x) > 1})
        if dup:
            out.append(Violation("non-repetition", r, tuple(dup)))
        bad = sorted({x for x in seen if not 1 <= x <= n})
        if bad:
            out.append(Violation("non-repetition", r, tuple(bad)))
        present.append(set(seen))

    for r in range(1, n + 1):
        missing = tuple(x for x in range(1, n + 1) if x != r and x not in present[r])
        if not missing:
            continue
        if not allow_parallel:
            out.append(Violation("completeness", r, missing))
        else:
            asym = tuple(x for x in missing if r in present[x])
            if asym:
                out.append(Violation("completeness", r, asym))

    pos = _single_positions(table)
    for a, b, c in combinations(range(1, n + 1), 3):
        pa, pb, pc = pos[a], pos[b], pos[c]
        if not (b in pa and c in pa and a in pb and c in pb and a in pc and b in pc):
            continue
        bits = (pa[b] < pa[c], pb[a] < pb[c], pc[a] < pc[b])
        if bits[0] == bits[1] == bits[2]:
            continue
        # blame the row that disagrees with the other two
        odd = next(i for i in range(3) if bits[i] != bits[(i + 1) % 3] and bits[i] != bits[(i + 2) % 3])
        row = (a, b, c)[odd]
        others = tuple(x for x in (a, b, c) if x != row)
        out.append(Violation("consistency", row, others))

    cycles = {}
    for r, row in enumerate(table.rows, start=1):
        for e in row:
            if isinstance(e, tuple):
                cycles.setdefault(frozenset((r,) + e), {})[r] = _point_cycle(r, e)
    for members, by_row in cycles.items():
        want = None
        for m in sorted(members):
            cyc = by_row.get(m)
            if cyc is None:
                out.append(Violation("consistency", m, tuple(sorted(members - {m}))))
                continue
            if want is None:
                want = cyc
            elif cyc != want:
                out.append(Violation("consistency", m, tuple(sorted(members - {m}))))

    return ValidationReport(tuple(out))


# --------------------------------------------------------------------------
# triangles

def adjacent_pairs(table: ArrangementTable):
    """Yield ``(r, p, q)`` for consecutive single entries ``p, q`` of row ``r``."""
    for r, row in enumerate(table.rows, start=1):
        for e1, e2 in zip(row, row[1:]):
            if isinstance(e1, int) and isinstance(e2, int):
                yield r, e1, e2


def count_triangles(table: ArrangementTable) -> frozenset:
    """Return the set of empty triangles as sorted id triples.

    ``{p, q, r}`` is a triangle iff each pair of it is adjacent in the row of
    the third line.
    """
    report = validate(table, allow_parallel=True)
    if not report.ok:
        v = report.violations[0]
        raise TableError(f"invalid table: {v.prop} in row {v.row}", prop=v.prop, row=v.row)
    adj = {(r, frozenset((p, q))) for r, p, q in adjacent_pairs(table)}
    tris = set()
    for r, p, q in adjacent_pairs(table):
        if (p, frozenset((r, q))) in adj and (q, frozenset((r, p))) in adj:
            tris.add(tuple(sorted((r, p, q))))
    return frozenset(tris)


def missing_segments(table: ArrangementTable):
    """Adjacent pairs ``(r, p, q)`` that are not a side of any triangle."""
    tris = count_triangles(table)
    return [(r, p, q) for r, p, q in adjacent_pairs(table)
            if tuple(sorted((r, p, q))) not in tris]


# --------------------------------------------------------------------------
# relabeling

def relabel_map(n: int, d: int, c: int):
    """Line relabeling induced by the endpoint map ``p -> d*p + c (mod 2n)``.

    Line ``l`` enters at endpoint ``l-1`` and leaves at ``l-1+n``.  Returns a
    list ``m`` with ``m[l] = (new_label, flipped)``.
    """
    out = [None]
    for line in range(1, n + 1):
        q = (d * (line - 1) + c) % (2 * n)
        out.append((q + 1, False) if q < n else (q - n + 1, True))
    return out


def relabel(table: ArrangementTable, d: int, c: int) -> ArrangementTable:
    """Apply the relabeling ``p -> d*p + c`` of circle endpoints to a table.

    ``d = -1`` is a reflection of the arrangement.  Groups keep their cyclic
    order relative to the new row owner.
    """
    n = table.n
    m = relabel_map(n, d, c)
    new_rows = [None] * n
    for r, row in enumerate(table.rows, start=1):
        nr, flipped = m[r]
        entries = []
        for e in row:
            if isinstance(e, tuple):
                cyc = [m[x][0] for x in (r,) + e]
                if d < 0:
                    cyc = [cyc[0]] + cyc[1:][::-1]
                entries.append(tuple(cyc[1:]))
            else:
                entries.append(m[e][0])
        if flipped:
            entries.reverse()
        new_rows[nr - 1] = tuple(entries)
    return ArrangementTable(tuple(new_rows))


def orbit(table: ArrangementTable) -> list:
    """Distinct tables reachable by relabeling (at most ``4n``), in a fixed order."""
    n = table.n
    seen = {}
    for d in (1, -1):
        for c in range(2 * n):
            t = relabel(table, d, c)
            seen.setdefault(t.rows, t)
    return list(seen.values())


def canonicalize(table: ArrangementTable) -> ArrangementTable:
    """Lexicographically smallest member of the relabeling orbit."""
    if table.has_groups or not table.is_complete:
        raise TableError("canonicalize needs a complete table without groups", prop="completeness")
    return min(orbit(table), key=lambda t: t.rows)


def mirror(table: ArrangementTable) -> ArrangementTable:
    """Reflection fixing line 1 (reversed) and mapping line l to n-l+2."""
    return relabel(table, -1, table.n)


def reverse_all(table: ArrangementTable) -> ArrangementTable:
    """Reverse every line direction; labels are unchanged."""
    return relabel(table, 1, table.n)


# --------------------------------------------------------------------------
# line insertion

def _ascending_bit(x, y, z, y_before_z):
    # orientation bit shared by the three rows of a triple
    return y_before_z == (y < z)


def add_line_1_2(table: ArrangementTable, insertion: Iterable[int]) -> ArrangementTable:
    """Insert a new line between lines 1 and 2 of a complete table.

    ``insertion`` lists the old line ids in the order the new line crosses
    them.  The new line becomes line 2 and old lines ``l >= 2`` become
    ``l + 1``.  The position of the new line in every other row follows from
    triple consistency; a :class:`TableError` is raised when those positions
    do not form a valid cut of some row.
    """
    if table.has_groups or not table.is_complete:
        raise TableError("add_line_1_2 needs a complete table without groups", prop="completeness")
    n = table.n
    order = [int(x) for x in insertion]
    if sorted(order) != list(range(1, n + 1)):
        raise TableError(f"insertion must be a permutation of 1..{n}", prop="non-repetition", row=2)

    def new(x):
        return x if x == 1 else x + 1

    new_row2 = [new(x) for x in order]
    pos2 = {x: i for i, x in enumerate(new_row2)}
    rows = [None] * (n + 1)
    rows[1] = tuple(new_row2)
    for r, row in enumerate(table.rows, start=1):
        R = new(r)
        entries = [new(x) for x in row]
        before = []
        for J in entries:
            bit = _ascending_bit(2, R, J, pos2[R] < pos2[J])
            # in row R: does the new line come before J?
            two_before_j = bit == (2 < J)
            before.append(not two_before_j)
        k = sum(before)
        if before != [True] * k + [False] * (len(entries) - k):
            raise TableError(f"insertion order is inconsistent with row {r}",
                             prop="consistency", row=R)
        rows[R - 1] = tuple(entries[:k] + [2] + entries[k:])
    out = ArrangementTable(tuple(rows))
    report = validate(out)
    if not report.ok:
        v = report.violations[0]
        raise TableError(f"inserted table violates {v.prop} in row {v.row}", prop=v.prop, row=v.row)
    return out
