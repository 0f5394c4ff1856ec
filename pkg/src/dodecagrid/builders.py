"""Idle configurations of tracks, switches, forks, controllers and tunnels.

Every structure is a set of *paths*: sequences of cells in which consecutive
cells can see each other (share a face) and other cells cannot.  Elements
are decorated with milestones according to the periodic pattern 234:

    2: G G        3: G G R        4: G G G R

placed by default on faces 7, 8 / 7, 8, 11 / 7, 8, 10, 11 of the element.
The places are free as long as the static audit holds, so the builder tries
the default first and then searches the other faces of the element.  The
chosen faces are kept in the returned :class:`Layout`.

The static audit checks what an outer totalistic rule can notice:

* an element sees no non-blank cell except its own milestones;
* a milestone sees no non-blank cell except its own element (or, for the
  controller and its access cell, the paired milestones);
* a blank cell's idle weight, and that weight plus the locomotive state of
  any element it sees, keep it blank under the rule table.

A locomotive moves one element per generation.  Its state inside an element
depends on the element kind: B in a 4-element, R in a 2-element, G in a
3-element.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

from . import geometry as geo
from .engine import Configuration, default_table
from .geometry import CENTRAL, DodecaAddr, PentaCoord
from .rules import B, G, R, W


class BuildError(ValueError):
    pass


class VisibilityError(BuildError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__("; ".join(violations[:5]))


class ElementKind(enum.Enum):
    TRACK2 = 2
    TRACK3 = 3
    TRACK4 = 4
    FORK = "fork"
    CONTROLLER = "controller"
    ACCESS = "access"

    @property
    def decoration(self):
        return _DECORATION[self]

    @property
    def weight(self):
        return sum(self.decoration)

    @property
    def symbol(self):
        """Digit used in text frames: the kind, 2 for a fork."""
        return {"fork": "2", "controller": "C", "access": "A"}.get(self.value, str(self.value))

    @property
    def states(self):
        """(entry, inside, exit) locomotive states."""
        return _STATES[self]


_DECORATION = {
    ElementKind.TRACK2: (G, G),
    ElementKind.TRACK3: (G, G, R),
    ElementKind.TRACK4: (G, G, G, R),
    ElementKind.FORK: (G, G),
    ElementKind.CONTROLLER: (G,) * 5,
    ElementKind.ACCESS: (G,) * 6,
}
_STATES = {
    ElementKind.TRACK2: (B, R, G),
    ElementKind.TRACK3: (R, G, B),
    ElementKind.TRACK4: (G, B, R),
    ElementKind.FORK: (B, R, G),
    ElementKind.ACCESS: (B, R, None),
    ElementKind.CONTROLLER: (None, R, None),
}
_DEFAULT_FACES = {
    ElementKind.TRACK2: (7, 8),
    ElementKind.TRACK3: (7, 8, 11),
    ElementKind.TRACK4: (7, 8, 10, 11),
    ElementKind.FORK: (7, 8),
    ElementKind.CONTROLLER: (6, 7, 8, 9, 10),
    ElementKind.ACCESS: (6, 7, 8, 9, 10, 11),
}
PATTERN = (ElementKind.TRACK2, ElementKind.TRACK3, ElementKind.TRACK4)
_UPPER_FACES = (7, 8, 10, 11, 6, 9)


def kind_of(ch) -> ElementKind:
    return {"2": ElementKind.TRACK2, "3": ElementKind.TRACK3, "4": ElementKind.TRACK4}[str(ch)]


def pattern_kinds(n, first):
    """``n`` kinds continuing the 234 pattern from kind ``first``."""
    start = PATTERN.index(kind_of(first) if not isinstance(first, ElementKind) else first)
    return [PATTERN[(start + i) % 3] for i in range(n)]


@dataclass
class Element:
    cell: DodecaAddr
    kind: ElementKind
    faces: tuple = ()
    milestones: dict = field(default_factory=dict)

    @property
    def inside(self):
        return self.kind.states[1]


class Layout(Configuration):
    """An idle configuration together with the elements and paths that
    make it up."""

    def __init__(self, name=""):
        super().__init__()
        self.name = name
        self.elements = {}
        self.paths = {}
        self.paired = set()
        self.fixed = {}
        self.option_hooks = {}

    # -- construction -------------------------------------------------------
    def add_path(self, name, cells, kinds):
        cells = [geo.canonical(c) for c in cells]
        if len(cells) != len(kinds):
            raise BuildError("one kind per cell is needed")
        for c, k in zip(cells, kinds):
            if c in self.elements and self.elements[c].kind != k:
                raise BuildError(f"{geo.format_addr(c)} used with two kinds")
            self.elements.setdefault(c, Element(c, k))
        self.paths[name] = cells
        return cells

    def add_fixed(self, cell, kind):
        """A decorated cell that is not a track element (controller)."""
        c = geo.canonical(cell)
        self.elements[c] = Element(c, kind)
        self.fixed[c] = kind
        return c

    def path(self, name):
        return self.paths[name]

    def kinds(self, name):
        return [self.elements[c].kind for c in self.paths[name]]

    def milestone_faces(self):
        return {geo.format_addr(c): e.faces for c, e in sorted(self.elements.items())}

    def copy_config(self):
        c = Configuration(generation=self.generation)
        c._cells = dict(self._cells)
        return c

    def path_neighbors(self, c):
        """Cells adjacent to ``c`` along some path."""
        out = set()
        for cells in self.paths.values():
            for i, x in enumerate(cells):
                if x == c:
                    if i > 0:
                        out.add(cells[i - 1])
                    if i + 1 < len(cells):
                        out.add(cells[i + 1])
        return out


# -- audits -------------------------------------------------------------------

def _ww_weights(table):
    return {w for (s, w), n in table.items() if s == W and n == W}


def check_path_condition(cells):
    """Consecutive cells see each other and no other pair does."""
    bad = []
    for i, a in enumerate(cells):
        for j in range(i + 1, len(cells)):
            adj = geo.can_see(a, cells[j])
            if adj != (j == i + 1):
                bad.append(f"path cells {i} {geo.format_addr(a)} and {j} {geo.format_addr(cells[j])} "
                           + ("see each other" if adj else "do not see each other"))
    return bad


def visibility_audit(layout: Layout, table=None):
    """List of violations of the static audit (empty when clean)."""
    table = table or default_table()
    ww = _ww_weights(table)
    cells = layout._cells
    out = []
    owner = {}
    for c, e in layout.elements.items():
        for m in e.milestones:
            owner[m] = c
    for name, path in layout.paths.items():
        out += [f"{name}: {v}" for v in check_path_condition(path)]
    links = set()
    for path in layout.paths.values():
        for a, b in zip(path, path[1:]):
            links.add(frozenset((a, b)))
    for c, e in layout.elements.items():
        for n in geo.neighbors(c):
            if n in layout.elements and frozenset((c, n)) not in links \
                    and frozenset((c, n)) not in layout.paired:
                out.append(f"elements {geo.format_addr(c)} and {geo.format_addr(n)} see each other")
            elif n in cells and owner.get(n) != c and n not in layout.elements:
                out.append(f"element {geo.format_addr(c)} sees foreign milestone {geo.format_addr(n)}")
    for m, c in owner.items():
        if not geo.interior(m):
            out.append(f"milestone {geo.format_addr(m)} at the region boundary")
        for n in geo.neighbors(m):
            if n == c or n not in cells and n not in layout.elements:
                continue
            if frozenset((m, n)) in layout.paired:
                continue
            out.append(f"milestone {geo.format_addr(m)} sees {geo.format_addr(n)}")
    seen = set()
    for x in list(cells) + list(layout.elements):
        for b in geo.neighbors(x):
            if b is None or b in seen or b in cells or b in layout.elements:
                continue
            seen.add(b)
            out += _blank_violations(layout, b, ww)
    return out


def _blank_violations(layout, b, ww):
    cells = layout._cells
    x = 0
    locos = []
    for n in geo.neighbors(b):
        if n is None:
            continue
        if n in layout.fixed:
            x += int(cells.get(n, W))
        elif n in layout.elements:
            locos.append(int(layout.elements[n].inside))
        else:
            x += int(cells.get(n, W))
    bad = []
    if x not in ww:
        bad.append(f"blank {geo.format_addr(b)} has idle weight {x}")
    for s in locos:
        if x + s not in ww:
            bad.append(f"blank {geo.format_addr(b)} weight {x}+{s} would change it")
    return bad


# -- decoration search ----------------------------------------------------------

def _candidate_cells(layout, e, used):
    """Cells next to element ``e`` that may hold one of its milestones."""
    c = e.cell
    faces = _UPPER_FACES if c.on_h else tuple(range(12))
    out = []
    for f in faces:
        m = geo.neighbors(c)[f]
        if m is None or m in layout.elements or m in layout._cells or m in used:
            continue
        if not geo.interior(m) or geo.depth(m) >= geo.MAX_STACK:
            continue
        ok = True
        for n in geo.neighbors(m):
            if n == c:
                continue
            if n in layout.elements or n in layout._cells or n in used:
                ok = False
                break
        if ok:
            out.append((f, m))
    return out


def _options(layout, e):
    """Decorations of ``e`` in order of preference: default faces first."""
    states = e.kind.decoration
    cands = _candidate_cells(layout, e, set())
    byface = dict(cands)
    default = _DEFAULT_FACES[e.kind]
    seen = set()
    if all(f in byface for f in default):
        key = tuple(zip(default, states))
        seen.add(key)
        yield key
    faces = [f for f, _ in cands]
    n = len(states)
    r_count = states.count(R)
    for combo in itertools.combinations(faces, n):
        # milestones of one element must not see each other
        ms = [byface[f] for f in combo]
        if any(geo.can_see(a, b) for a, b in itertools.combinations(ms, 2)):
            continue
        for rpos in itertools.combinations(range(n), r_count):
            st = tuple(R if i in rpos else G for i in range(n))
            key = tuple(zip(combo, st))
            if key not in seen:
                seen.add(key)
                yield key


def _apply(layout, e, key):
    e.faces = tuple(f for f, _ in key)
    e.milestones = {}
    for f, s in key:
        m = geo.neighbors(e.cell)[f]
        e.milestones[m] = s
        layout._cells[m] = s


def _undo(layout, e):
    for m in e.milestones:
        layout._cells.pop(m, None)
    e.milestones = {}
    e.faces = ()


def _local_ok(layout, e, ww):
    """Blank cells near the new milestones keep valid weights."""
    touched = set()
    for m in e.milestones:
        for n in geo.neighbors(m):
            if n is not None and n not in layout._cells and n not in layout.elements:
                touched.add(n)
    for c in [e.cell]:
        for n in geo.neighbors(c):
            if n is not None and n not in layout._cells and n not in layout.elements:
                touched.add(n)
    return not any(_blank_violations(layout, b, ww) for b in touched)


def decorate(layout: Layout, order=None, fixed_faces=None, limit=20000):
    """Place milestones for every undecorated element (backtracking)."""
    ww = _ww_weights(default_table())
    fixed_faces = fixed_faces or {}
    keys = [geo.canonical(c) for c in order or ()] + sorted(layout.elements)
    todo = []
    for k in dict.fromkeys(keys):
        if not layout.elements[k].milestones:
            todo.append(layout.elements[k])
    budget = [limit]

    def rec(i):
        if i == len(todo):
            return True
        e = todo[i]
        if e.cell in fixed_faces:
            opts = [tuple(zip(fixed_faces[e.cell], e.kind.decoration))]
        elif e.cell in layout.option_hooks:
            opts = layout.option_hooks[e.cell](layout, e)
        else:
            opts = _options(layout, e)
        for key in opts:
            budget[0] -= 1
            if budget[0] < 0:
                return False
            _apply(layout, e, key)
            if _local_ok(layout, e, ww) and rec(i + 1):
                return True
            _undo(layout, e)
        return False

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * len(todo) + 1000))
    try:
        if not rec(0):
            raise BuildError(f"no decoration satisfies the audit for {layout.name or 'layout'}")
    finally:
        sys.setrecursionlimit(old)
    return layout


def finish(layout: Layout, order=None, fixed_faces=None):
    decorate(layout, order, fixed_faces)
    bad = visibility_audit(layout)
    if bad:
        raise VisibilityError(bad)
    return layout


# -- tracks -------------------------------------------------------------------

@dataclass(frozen=True)
class TrackSpec:
    line: tuple
    layer: str = "u"
    phase: int = 0
    placement: tuple = ()

    @property
    def kinds(self):
        return [PATTERN[(self.phase + i) % 3] for i in range(len(self.line))]

    @property
    def cells(self):
        return [DodecaAddr(t, self.layer) for t in self.line]


def _check_line(line):
    for a, b in zip(line, line[1:]):
        if b not in geo.penta_neighbors(a):
            raise BuildError(f"tiles {a} and {b} are not neighbours")


def _fixed_faces(spec):
    if not spec.placement:
        return {}
    return {geo.canonical(c): tuple(f) for c, f in zip(spec.cells, spec.placement) if f}


def build_track(spec: TrackSpec) -> Layout:
    """Track following the row of tiles ``spec.line`` on layer
    ``spec.layer``; element i has kind 2, 3, 4 by ``(phase + i) % 3``."""
    lay = Layout("track")
    if not spec.line:
        return lay
    _check_line(spec.line)
    lay.add_path("track", spec.cells, spec.kinds)
    return finish(lay, spec.cells, _fixed_faces(spec))


def return_spec(spec: TrackSpec) -> TrackSpec:
    """Return track of ``spec``: opposite layer, tiles across the line,
    reversed direction."""
    line = tuple(reversed(geo.mirror_row(list(spec.line))))
    layer = "b" if spec.layer == "u" else "u"
    return TrackSpec(line, layer, spec.phase, ())


def build_return_track(spec: TrackSpec) -> Layout:
    return build_track(return_spec(spec))


def build_track_pair(spec: TrackSpec) -> Layout:
    """A track and its return track in one layout."""
    rs = return_spec(spec)
    lay = Layout("track pair")
    lay.add_path("direct", spec.cells, spec.kinds)
    lay.add_path("return", rs.cells, rs.kinds)
    return finish(lay, spec.cells + rs.cells, _fixed_faces(spec))


def central_line():
    """Straight row through the central tile, from sector 4 to sector 1,
    levels 6 to 6 (13 tiles)."""
    inward = list(reversed(geo.straight_line(CENTRAL, PentaCoord(4, 1), 7, 2)))
    outward = geo.straight_line(PentaCoord(4, 1), CENTRAL, 8, 3)
    return inward[:-1] + outward[1:]


def straight_track(n=12, layer="u", phase=0):
    """``n`` consecutive elements of :func:`central_line` (n <= 13)."""
    line = central_line()
    if not 0 <= n <= len(line):
        raise BuildError(f"at most {len(line)} elements on the central row")
    start = (len(line) - n) // 2
    return TrackSpec(tuple(line[start:start + n]), layer, phase)


# -- switches -----------------------------------------------------------------

def _cells(*names):
    return [geo.parse_addr(n) for n in names]


# Paths of the right branch of the fixed switch.  Face labels follow the
# geometry module's convention.  The printed labels (PRINTED_PATH_*) differ
# by a mirror of the stack faces on some tiles.
SWITCH_PATH_2 = ("(4)-3_6", "(4)-7_6", "(4)-2_7", "(4)-2", "(3)-1")
SWITCH_PATH_3 = ("(4)-3_6", "(4)-7_6", "(4)-2_7", "(4)-2", "(4)-2_6",
                 "(3)-1_7", "(3)-1_6_7", "(3)-1_6", "0_7")
PRINTED_PATH_2 = ("(4)-3_7", "(4)-7_6", "(4)-2_7", "(4)-2", "(3)-1")
PRINTED_PATH_3 = ("(4)-3_7", "(4)-7_6", "(4)-2_7", "(4)-2", "(4)-2_6",
                "(3)-1_6", "(3)-1_6_7", "(3)-1_7", "0_7")


def _switch_lines():
    right = geo.straight_line(PentaCoord(4, 3), PentaCoord(4, 8), 4, 3)[::-1]
    out = geo.straight_line(CENTRAL, PentaCoord(2, 1), 5, 2)[1:]
    left = geo.straight_line(CENTRAL, PentaCoord(5, 1), 5, 3)[1:][::-1]
    return right, left, out


def build_fixed_switch(variant: int = 1) -> Layout:
    """Passive fixed switch centred on the upper cell of the central tile.

    The centre is a 4-element; two branches arrive and one leaves.  In
    variant 1 the right branch reaches the centre straight through (4)-1;
    in variants 2 and 3 the track reaching (4)-3 would not continue the
    pattern at the centre and is replaced by the short path through (4)-2
    and (3)-1, or by the longer one climbing over (3)-1."""
    right, left, out = _switch_lines()
    lay = Layout(f"fixed switch {variant}")
    center = DodecaAddr(CENTRAL)
    ru = [DodecaAddr(t) for t in right]
    if variant == 1:
        rcells = ru + [DodecaAddr(PentaCoord(4, 1))]
    elif variant == 2:
        rcells = ru + _cells(*SWITCH_PATH_2)
    elif variant == 3:
        rcells = ru + _cells(*SWITCH_PATH_3)
    else:
        raise BuildError("variant is 1, 2 or 3")
    rkinds = [PATTERN[(PATTERN.index(ElementKind.TRACK3) - (len(rcells) - 1 - i)) % 3]
              for i in range(len(rcells))]
    lcells = [DodecaAddr(t) for t in left]
    lkinds = [PATTERN[(1 - (len(lcells) - 1 - i)) % 3] for i in range(len(lcells))]
    ocells = [DodecaAddr(t) for t in out]
    okinds = pattern_kinds(len(ocells), 2)
    lay.add_path("right", rcells + [center], rkinds + [ElementKind.TRACK4])
    lay.add_path("left", lcells + [center], lkinds + [ElementKind.TRACK4])
    lay.add_path("out", [center] + ocells, [ElementKind.TRACK4] + okinds)
    order = [center] + rcells[::-1] + lcells[::-1] + ocells
    return finish(lay, order)


def build_fork() -> Layout:
    """Fork centred on the central tile: a 2-element entered from sector 4
    and left towards sectors 2 and 5."""
    right, left, out = _switch_lines()
    lay = Layout("fork")
    center = DodecaAddr(CENTRAL)
    incells = [DodecaAddr(t) for t in right] + [DodecaAddr(PentaCoord(4, 1))]
    inkinds = [PATTERN[(2 - (len(incells) - 1 - i)) % 3] for i in range(len(incells))]
    o1 = [DodecaAddr(t) for t in out]
    o2 = [DodecaAddr(t) for t in left[::-1]]
    lay.add_path("in", incells + [center], inkinds + [ElementKind.FORK])
    lay.add_path("out1", [center] + o1, [ElementKind.FORK] + pattern_kinds(len(o1), 3))
    lay.add_path("out2", [center] + o2, [ElementKind.FORK] + pattern_kinds(len(o2), 3))
    return finish(lay, [center] + incells[::-1] + o1 + o2)


# -- figure windows -------------------------------------------------------------

# Cells replacing u:0 on the central row: the path dips below H.
DETOUR = ("b:(4)-1", "b:0", "b:(1)-1")


def build_detour() -> Layout:
    """Path along the central row that avoids the upper cell of the
    central tile through three cells below H.  The first appended cell is
    a 2-element, so a B locomotive leaving the row comes back on it as an
    R locomotive."""
    line = central_line()[2:11]
    row = [DodecaAddr(t) for t in line]
    i = line.index(CENTRAL)
    cells = row[:i] + _cells(*DETOUR) + row[i + 1:]
    kinds = [PATTERN[(k - i) % 3] for k in range(len(cells))]
    lay = Layout("detour")
    lay.add_path("track", cells, kinds)
    return finish(lay, cells)


def build_switch_window(incoming=(1, 3), outgoing=5) -> Layout:
    """Fixed switch whose three branches leave the central tile through
    the first tiles of the given sectors; the central tile's upper cell
    is the 4-element joining them."""
    lay = Layout("switch window")
    center = DodecaAddr(CENTRAL)
    for n, sec in enumerate(incoming):
        branch = [DodecaAddr(t) for t in geo.straight_line(CENTRAL, PentaCoord(sec, 1), 5, 2 + n)[1:][::-1]]
        kinds = [PATTERN[(1 - (len(branch) - 1 - k)) % 3] for k in range(len(branch))]
        lay.add_path(f"in{n + 1}", branch + [center], kinds + [ElementKind.TRACK4])
    out = [DodecaAddr(t) for t in geo.straight_line(CENTRAL, PentaCoord(outgoing, 1), 5, 3)[1:]]
    lay.add_path("out", [center] + out, [ElementKind.TRACK4] + pattern_kinds(len(out), 2))
    order = [center] + [c for name in ("in1", "in2") for c in lay.path(name)[-2::-1]] + out
    return finish(lay, order)


# -- controller ---------------------------------------------------------------

# Leaving the gate through a cell of its crown: the blank cell under a
# lateral successor would see both the controller and the locomotive.
GATE_EXIT = ("u:0_7", "u:(3)-1_6", "u:(3)-2_6", "u:(3)-2", "u:(3)-7", "u:(3)-3", "u:(3)-8")


def build_controller(permissive: bool = True) -> Layout:
    """Track on H_u reaching the central tile, whose upper cell is a
    4-element (the gate); the controller is the cell below it, decorated with five G
    milestones on its crown.  The access cell lies below H under (1)-1,
    next to the controller, with six G milestones.  It is reached by a
    short track on H_b whose last element, a 4-element under (1)-2, sits
    on a side of the access cell next to the controller's side: any other
    side leaves fewer than six faces of the access cell free.  The
    controller starts blank (permissive) or R (blocking)."""
    lay = Layout("controller")
    back = geo.straight_line(CENTRAL, PentaCoord(4, 1), 4, 2)
    tcells = [DodecaAddr(t) for t in reversed(back)] + _cells(*GATE_EXIT)
    i0 = len(back) - 1
    tkinds = [PATTERN[(2 + i - i0) % 3] for i in range(len(tcells))]
    lay.add_path("track", tcells, tkinds)
    ctrl = lay.add_fixed(DodecaAddr(CENTRAL, "b"), ElementKind.CONTROLLER)
    lay.paired.add(frozenset((ctrl, tcells[i0])))
    feed = geo.straight_line(PentaCoord(1, 2), PentaCoord(1, 6), 4, 2)[::-1]
    access = DodecaAddr(PentaCoord(1, 1), "b")
    acells = [DodecaAddr(t, "b") for t in feed] + [access]
    akinds = pattern_kinds(len(feed), PATTERN[(2 - (len(feed) - 1)) % 3])
    lay.add_path("access", acells, akinds + [ElementKind.ACCESS])
    access = geo.canonical(access)
    lay.paired.add(frozenset((ctrl, access)))
    ec = lay.elements[ctrl]
    _apply(lay, ec, tuple(zip(_DEFAULT_FACES[ec.kind], ec.kind.decoration)))
    lay.option_hooks[access] = _access_options
    lay.controller, lay.access, lay.gate = ctrl, access, tcells[i0]
    finish(lay, [access] + tcells + acells[::-1])
    if not permissive:
        lay._cells[ctrl] = R
        bad = visibility_audit(lay)
        if bad:
            raise VisibilityError(bad)
    return lay


def _access_options(lay, e):
    """Six G milestones around the access cell.  Faces whose cell would
    see a controller milestone are used in pairs with it; the others must
    not share a neighbour with the incoming element, which holds B when
    the locomotive arrives."""
    a = e.cell
    ctrl_ms = {m for c in lay.fixed for m in lay.elements[c].milestones}
    prev = {x for x in lay.path_neighbors(a)}
    near_prev = {n for p in prev for n in geo.neighbors(p) if n is not None}
    pair, free = [], []
    nbrs = geo.neighbors(a)
    for f in range(12):
        m = nbrs[f]
        if m is None or m in lay.elements or m in lay._cells or not geo.interior(m):
            continue
        if m in near_prev or (set(geo.neighbors(m)) & near_prev) - {a}:
            continue
        seen = [n for n in geo.neighbors(m) if n != a and (n in lay._cells or n in lay.elements)]
        if seen and all(n in ctrl_ms for n in seen):
            pair.append((f, m, seen))
        elif not seen:
            free.append(f)
    for rest in itertools.combinations(free, max(0, 6 - len(pair))):
        for f, m, seen in pair:
            for n in seen:
                lay.paired.add(frozenset((m, n)))
        yield tuple((f, G) for f in sorted([f for f, _, _ in pair] + list(rest))[:6])


# -- tunnel -------------------------------------------------------------------

def find_path(start, goal, blocked, max_len=12, region=None):
    """Shortest path from ``start`` to ``goal`` avoiding ``blocked`` whose
    cells satisfy the path condition (iterative deepening, pruned by the
    plain graph distance to ``goal``)."""
    from collections import deque
    start, goal = geo.canonical(start), geo.canonical(goal)

    def usable(n):
        return (n is not None and n not in blocked and geo.interior(n)
                and geo.depth(n) < geo.MAX_STACK and (region is None or region(n)))

    dist = {goal: 0}
    q = deque([goal])
    while q:
        x = q.popleft()
        if dist[x] >= max_len:
            continue
        for n in geo.neighbors(x):
            if (usable(n) or n == start) and n not in dist:
                dist[n] = dist[x] + 1
                q.append(n)
    if start not in dist:
        raise BuildError(f"no path from {geo.format_addr(start)} to {geo.format_addr(goal)}")

    def dfs(p, limit):
        x = p[-1]
        if x == goal:
            return list(p)
        for n in sorted((n for n in geo.neighbors(x) if n in dist), key=lambda n: dist[n]):
            if n in p or len(p) + dist[n] > limit:
                continue
            if any(geo.can_see(n, y) for y in p[:-1]):
                continue
            r = dfs(p + [n], limit)
            if r:
                return r
        return None

    for limit in range(dist[start] + 1, max_len + 1):
        r = dfs([start], limit)
        if r:
            return r
    raise BuildError(f"no path from {geo.format_addr(start)} to {geo.format_addr(goal)}")


# Underground part of the tunnel's crossing track, found by
# :func:`find_path` with the over track and its neighbours excluded.
TUNNEL_UNDER = ("u:(3)-4", "b:(3)-4", "b:(3)-1", "b:(3)-1_7", "b:0_6", "b:0_6_10",
                "b:0_10", "b:(1)-1_6", "b:(1)-1", "b:(1)-3", "u:(1)-3")


def build_tunnel() -> Layout:
    """Two tracks crossing at the central tile.  The over track runs on
    H_u through the central tile from sector 4 to sector 2.  The under
    track follows the row from sector 3 to sector 1, goes below H at
    (3)-4 and comes back at (1)-3.  No cell of its underground part sees
    the central cell of the over track."""
    lay = Layout("tunnel")
    back = geo.straight_line(CENTRAL, PentaCoord(4, 1), 5, 2)
    fwd = geo.straight_line(CENTRAL, PentaCoord(2, 1), 5, 3)
    over = [DodecaAddr(t) for t in list(reversed(back[1:])) + fwd]
    lay.add_path("over", over, [PATTERN[i % 3] for i in range(len(over))])
    a = geo.straight_line(CENTRAL, PentaCoord(3, 1), 5, 2)
    b = geo.straight_line(CENTRAL, PentaCoord(1, 1), 5, 3)
    row = list(reversed(a[1:])) + b
    under = [DodecaAddr(t) for t in row[:2]] + _cells(*TUNNEL_UNDER) + [DodecaAddr(t) for t in row[-2:]]
    lay.add_path("under", under, [PATTERN[i % 3] for i in range(len(under))])
    lay.underground = [geo.canonical(c) for c in under if c.layer == "b" or c.stack]
    return finish(lay, over + under)


# -- locomotives --------------------------------------------------------------

@dataclass(frozen=True)
class LocomotivePlacement:
    """A locomotive in state ``state`` arriving at element ``index`` of a
    path; it sits in the previous element, which holds that state."""
    index: int
    state: object = None
    path: str = None


def place_locomotive(c: Layout, spec: LocomotivePlacement) -> Layout:
    name = spec.path or next(iter(c.paths))
    cells = c.paths[name]
    if not 0 <= spec.index < len(cells):
        raise BuildError(f"element {spec.index} outside path {name}")
    target = c.elements[cells[spec.index]]
    entry = target.kind.states[0]
    state = entry if spec.state is None else spec.state
    if entry is None or state != entry:
        raise BuildError(f"a {target.kind.name} element is entered by a {getattr(entry, 'name', None)} "
                         f"locomotive, not {getattr(state, 'name', state)}")
    if spec.index == 0:
        raise BuildError("the first element of a path has no predecessor to hold the locomotive")
    prev = c.elements[cells[spec.index - 1]]
    if prev.inside != state:
        raise BuildError(f"element {spec.index - 1} is a {prev.kind.name}: it cannot hold {state.name}")
    out = _clone(c)
    out[prev.cell] = state
    return out


def put(c: Layout, cell, state) -> Layout:
    """Copy of ``c`` with one cell overwritten (no checks)."""
    out = _clone(c)
    out[cell] = state
    return out


def _clone(c):
    out = Layout(c.name)
    out._cells = dict(c._cells)
    out.generation = c.generation
    out.elements = c.elements
    out.paths = c.paths
    out.paired = c.paired
    out.fixed = c.fixed
    for k in ("underground",):
        if hasattr(c, k):
            setattr(out, k, getattr(c, k))
    return out


def expected_trace(spec, placement: LocomotivePlacement, generations=None):
    """Closed-form schedule on a plain track: rows of element states, one
    per generation, the locomotive advancing one element per generation."""
    kinds = spec.kinds if isinstance(spec, TrackSpec) else list(spec)
    n = len(kinds)
    pos = placement.index - 1
    if generations is None:
        generations = n - pos
    rows = []
    for t in range(generations + 1):
        row = [W] * n
        if 0 <= pos + t < n:
            row[pos + t] = kinds[pos + t].states[1]
        rows.append(row)
    return rows


def frame(kinds, row):
    """Text frame: kind digits, the locomotive as a letter."""
    return "".join(s.name if s != W else k.symbol for k, s in zip(kinds, row))
