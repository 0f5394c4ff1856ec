"""Synchronous evolution of sparse configurations.

A configuration stores only its non-blank cells.  Under rule 1 a blank cell
with blank neighbours stays blank, so a step only needs to evaluate the
frontier: the non-blank cells and their neighbours.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import geometry as geo
from .rules import CellState, TotalisticTable, W, load_rules


class LookupMiss(RuntimeError):
    """Some frontier cell met a (state, sum) pair absent from the table."""

    def __init__(self, report):
        self.report = report
        lines = [f"{geo.format_addr(a)} state {s.name} sum {w}" for a, s, w in report.misses]
        super().__init__(f"generation {report.generation}: no rule for " + "; ".join(lines))


@dataclass
class StepReport:
    generation: int
    changed: set = field(default_factory=set)
    max_neighbor_sum: int = 0
    argmax: object = None
    misses: list = field(default_factory=list)
    neighborhoods: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.misses


class Configuration:
    def __init__(self, cells=None, generation=0):
        self.generation = generation
        self._cells = {}
        for a, s in (cells or {}).items():
            self[a] = s

    def __getitem__(self, a):
        return self._cells.get(geo.canonical(a), W)

    def __setitem__(self, a, s):
        a = geo.canonical(a)
        s = CellState(s)
        if s == W:
            self._cells.pop(a, None)
        else:
            self._cells[a] = s

    def __contains__(self, a):
        return geo.canonical(a) in self._cells

    def __len__(self):
        return len(self._cells)

    def __iter__(self):
        return iter(sorted(self._cells))

    def items(self):
        return sorted(self._cells.items())

    def copy(self):
        c = Configuration(generation=self.generation)
        c._cells = dict(self._cells)
        return c

    def __eq__(self, other):
        return isinstance(other, Configuration) and self._cells == other._cells

    def same_cells(self, other):
        return self._cells == other._cells

    def merge(self, other):
        """Union; disagreeing non-blank states at one address are an error."""
        out = self.copy()
        for a, s in other._cells.items():
            if out._cells.get(a, s) != s:
                raise ValueError(f"collision at {geo.format_addr(a)}: {out._cells[a].name} vs {s.name}")
            out._cells[a] = s
        return out

    def neighbor_sum(self, a):
        return sum(self._cells.get(n, W) for n in geo.neighbors(a) if n is not None)

    # text form: one "<address> <state>" per line, sorted
    def dump(self):
        lines = [f"# generation {self.generation}"]
        lines += [f"{geo.format_addr(a)} {s.name}" for a, s in self.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text):
        c = cls()
        for raw in text.splitlines():
            line = raw.strip()
            if line.startswith("# generation"):
                c.generation = int(line.split()[-1])
                continue
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            addr, st = line.split()
            a = geo.parse_addr(addr)
            s = CellState[st]
            if a in c and c[a] != s:
                raise ValueError(f"collision at {addr}")
            c[a] = s
        return c


def frontier(c: Configuration):
    out = set(c._cells)
    for a in c._cells:
        for n in geo.neighbors(a):
            if n is None:
                raise geo.RegionError(f"{geo.format_addr(a)} touches the region boundary")
            out.add(n)
    return out


_DEFAULT = None


def default_table():
    """Projection of the corrected rule table (rule 25 erratum)."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = TotalisticTable.from_rules(load_rules("rules_erratum.txt"))
    return _DEFAULT


def step(c: Configuration, table=None, strict=True):
    """Next generation and a report.  With ``strict`` a lookup miss raises
    :class:`LookupMiss` and ``c`` is left untouched."""
    table = table or default_table()
    cells = c._cells
    report = StepReport(generation=c.generation)
    new = {}
    for a in frontier(c):
        s = cells.get(a, W)
        total = 0
        for n in geo.neighbors(a):
            total += cells.get(n, W)
        if total > report.max_neighbor_sum:
            report.max_neighbor_sum, report.argmax = total, a
        t = table.lookup(s, total)
        if t is None:
            report.misses.append((a, s, total))
            report.neighborhoods[a] = [cells.get(n, W).name for n in geo.neighbors(a)]
            t = s
        if t != s:
            report.changed.add((a, s, t))
        if t != W:
            new[a] = t
    report.misses.sort()
    if report.misses and strict:
        raise LookupMiss(report)
    out = Configuration(generation=c.generation + 1)
    out._cells = new
    return out, report


def run(c: Configuration, n: int, trace=(), table=None, reports=None):
    """Advance ``n`` generations; returns (final configuration, rows) where
    each row lists the states of the traced cells, generation 0 first."""
    if n < 0:
        raise ValueError("negative step count")
    trace = [geo.canonical(a) for a in trace]
    rows = [[c[a] for a in trace]]
    for _ in range(n):
        c, rep = step(c, table)
        if reports is not None:
            reports.append(rep)
        rows.append([c[a] for a in trace])
    return c, rows
