"""Addressing and adjacency for the pentagrid and the near-H dodecagrid.

Tiles of the pentagrid {5,4} are named ``0`` (central tile) or ``(s)-n``:
sector ``s`` in 1..5 and index ``n`` in the Fibonacci spanning tree of that
sector.  The tree is numbered level by level; in every node the sons are
listed counterclockwise starting from the boundary with the previous sector,
black nodes (2 sons) before white ones (3 sons).  With this numbering the
lines 1, 3, 8, 21 and 1, 4, 12, 33 of a sector are straight and (4)-2 is the
tile wedged between the heads of sectors 3 and 4.

Cells of the dodecagrid are elements of the right-angled reflection group
(see :mod:`dodecagrid.coxeter`).  A cell address is ``(base, layer, stack)``:
the cell sitting on the pentagrid tile ``base`` upon (``u``) or below
(``b``) the plane H, and then a short path of faces leaving it.

Face labels of an on-H cell: 0 lies on H, 1..5 are the lateral faces,
6..10 the far crown (6 between 5 and 1, 7 between 1 and 2, ...), 11 is
opposite to 0.  Face 1 sits over the side shared with the parent tile in the
sector tree; for the central tile it is the side shared with (3)-1.  Faces
turn clockwise when the cell is looked at from its own side of H, so the
upper and lower cells over one tile are mirror images of each other.  A
stacked cell inherits the labels of its base by reflection in the shared
face; hence ``T_6_7`` is the fourth cell around the edge 6-7 of ``T`` and
equals ``T_7_6``.

CHIRALITY: the sector numbering runs counterclockwise and the faces of a
cell upon H run clockwise when seen from above.  A mirror image of the whole
construction behaves identically under an outer totalistic rule.
"""
from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import coxeter as cx

MAX_LEVEL = 7
# cells up to this many faces away from their base tile are addressable;
# non-blank cells must stay one layer inside so their neighbours exist
MAX_STACK = 4
CENTRAL_FACE1_SIDE = 3
LAYERS = ("u", "b")


class AddressError(ValueError):
    """Malformed tile or cell address."""


class RegionError(LookupError):
    """Cell outside the modeled near-H region."""


@dataclass(frozen=True, order=True)
class PentaCoord:
    sector: int
    index: int = 0

    def __post_init__(self):
        if self.sector == 0:
            if self.index != 0:
                raise AddressError("central tile takes no index")
        elif not (1 <= self.sector <= 5 and self.index >= 1):
            raise AddressError(f"bad tile ({self.sector})-{self.index}")

    def __str__(self):
        return "0" if self.sector == 0 else f"({self.sector})-{self.index}"


CENTRAL = PentaCoord(0)


# -- pentagrid --------------------------------------------------------------

def _sector_of(word):
    ld = cx.left_descents(word)
    for s in ld:
        if s % 5 + 1 not in ld:
            return s
    raise AssertionError(word)


class _Pentagrid:
    def __init__(self, max_level):
        self.max_level = max_level
        self.word_of = {CENTRAL: ()}
        self.coord_of = {(): CENTRAL}
        self.parent_side = {(): CENTRAL_FACE1_SIDE}
        self.level = {CENTRAL: 0}
        for s in range(1, 6):
            self._grow_sector(s)

    def _grow_sector(self, s):
        head = (s,)
        self._add(head, PentaCoord(s, 1), s, 1)
        level, idx = [head], 2
        for k in range(2, self.max_level + 1):
            order, owner = [], {}
            for p in level:
                # sons listed counterclockwise from the parent side; the
                # transported labels flip orientation with word parity
                d = -1 if len(p) % 2 else 1
                ps = self.parent_side[p]
                for j in range(1, 5):
                    side = (ps - 1 + d * j) % 5 + 1
                    c = cx.mul(p, side)
                    if len(c) == k and _sector_of(c) == s:
                        if c not in owner:
                            order.append(c)
                        # a son shared by two nodes goes to the later one
                        owner[c] = side
            for c in order:
                self._add(c, PentaCoord(s, idx), owner[c], k)
                idx += 1
            level = order

    def _add(self, word, coord, pside, k):
        self.word_of[coord] = word
        self.coord_of[word] = coord
        self.parent_side[word] = pside
        self.level[coord] = k

    def word(self, c):
        try:
            return self.word_of[c]
        except KeyError:
            raise RegionError(f"tile {c} beyond level {self.max_level}") from None

    def coord(self, word):
        try:
            return self.coord_of[word]
        except KeyError:
            raise RegionError(f"tile word {word} beyond level {self.max_level}") from None


_GRID = None


def pentagrid():
    global _GRID
    if _GRID is None:
        _GRID = _Pentagrid(MAX_LEVEL)
    return _GRID


def tile_level(c: PentaCoord) -> int:
    """Pentagrid distance from the central tile."""
    g = pentagrid()
    g.word(c)
    return g.level[c]


def all_tiles(max_level=None):
    g = pentagrid()
    m = g.max_level if max_level is None else max_level
    return sorted((c for c, k in g.level.items() if k <= m))


# -- face labels ------------------------------------------------------------

def _upper_between(a, b):
    (u,) = [f for f in cx.UPPER if a in cx.ADJACENT[f] and b in cx.ADJACENT[f]]
    return u


@lru_cache(maxsize=None)
def _labels(word, layer):
    """Map from the cell's face labels to group generators."""
    g = pentagrid()
    p = g.parent_side[word]
    even = len(word) % 2 == 0
    # clockwise seen from the cell's own side of H
    d = -1 if even else 1
    if layer == "b":
        d = -d
    pi = {0: 0, 11: 11}
    for j in range(1, 6):
        pi[j] = (p - 1 + d * (j - 1)) % 5 + 1
    for j in range(5):
        pi[6 + j] = _upper_between(pi[5 if j == 0 else j], pi[j + 1])
    inv = {v: k for k, v in pi.items()}
    return pi, inv


# -- cells --------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class DodecaAddr:
    base: PentaCoord
    layer: str = "u"
    stack: tuple = ()

    def __post_init__(self):
        if self.layer not in LAYERS:
            raise AddressError(f"bad layer {self.layer!r}")
        if len(self.stack) > MAX_STACK:
            raise RegionError(f"stack deeper than {MAX_STACK}")
        if any(not (0 <= f <= 11) for f in self.stack):
            raise AddressError(f"bad face in {self.stack}")

    @property
    def on_h(self):
        return not self.stack

    def __str__(self):
        return format_addr(self)


def element(a: DodecaAddr):
    """Group element of a cell (any spelling, not necessarily canonical)."""
    w = pentagrid().word(a.base)
    e = w if a.layer == "u" else cx.mul(w, 0)
    pi, _ = _labels(w, a.layer)
    for f in a.stack:
        e = cx.mul(e, pi[f])
    return e


@lru_cache(maxsize=None)
def address(elem) -> DodecaAddr:
    """Canonical address of a group element; raises RegionError if the cell
    is not within the modeled region."""
    w, v = cx.split_parabolic(elem, (1, 2, 3, 4, 5))
    base = pentagrid().coord(w)
    layer = "u"
    if v and v[0] == 0:
        layer, v = "b", v[1:]
    if len(v) > MAX_STACK:
        raise RegionError(f"cell {elem} is {len(v)} layers away from H")
    _, inv = _labels(w, layer)
    best = min(tuple(inv[x] for x in spelling) for spelling in cx.rewrites(v))
    return DodecaAddr(base, layer, best)


@lru_cache(maxsize=None)
def canonical(a: DodecaAddr) -> DodecaAddr:
    return address(element(a))


def depth(a: DodecaAddr) -> int:
    """Number of faces between the cell and its on-H base cell."""
    return len(canonical(a).stack)


def interior(a: DodecaAddr) -> bool:
    """True when every neighbour of ``a`` is inside the region, which is
    required for a cell allowed to hold a non-blank state."""
    return all(n is not None for n in neighbors(a))


@lru_cache(maxsize=None)
def dodeca_neighbor(a: DodecaAddr, f: int) -> DodecaAddr:
    """The cell sharing face ``f`` of cell ``a``."""
    if not 0 <= f <= 11:
        raise AddressError(f"bad face {f}")
    a = canonical(a)
    e = element(a)
    w = pentagrid().word(a.base)
    pi, _ = _labels(w, a.layer)
    # labels of a stacked cell are those of its base, reflected
    return address(cx.mul(e, pi[f]))


@lru_cache(maxsize=None)
def neighbors(a: DodecaAddr) -> tuple:
    """The 12 neighbours of ``a`` in face order; None where out of region."""
    out = []
    for f in range(12):
        try:
            out.append(dodeca_neighbor(a, f))
        except RegionError:
            out.append(None)
    return tuple(out)


def face_towards(a: DodecaAddr, b: DodecaAddr):
    """Face of ``a`` shared with ``b``, or None."""
    for f, n in enumerate(neighbors(a)):
        if n == b:
            return f
    return None


def can_see(a, b):
    return face_towards(a, b) is not None


def edge_cells(a: DodecaAddr, f: int, g: int):
    """The four cells around the edge shared by faces f and g of ``a``."""
    if g not in cx.ADJACENT[f]:
        raise AddressError(f"faces {f} and {g} share no edge")
    a = canonical(a)
    w = pentagrid().word(a.base)
    pi, _ = _labels(w, a.layer)
    e = element(a)
    pf, pg = pi[f], pi[g]
    return [address(x) for x in (e, cx.mul(e, pf), cx.mul(e, pg),
                                 cx.mul(cx.mul(e, pf), pg))]


def penta_neighbors(c: PentaCoord):
    """Side neighbours of a tile, listed by face 1..5 of its upper cell."""
    if not isinstance(c, PentaCoord):
        raise AddressError(f"not a tile: {c!r}")
    a = DodecaAddr(c, "u")
    out = []
    for f in range(1, 6):
        n = dodeca_neighbor(a, f)
        out.append(n.base)
    return out


def side_towards(c: PentaCoord, d: PentaCoord):
    """Face (1..5) of the upper cell over ``c`` lying over the side shared
    with tile ``d``."""
    for f, n in enumerate(penta_neighbors(c), start=1):
        if n == d:
            return f
    raise AddressError(f"{c} and {d} are not neighbours")


# -- lines of the pentagrid ---------------------------------------------------

def turn(line, i):
    """Face offset (exit side minus entry side, mod 5) at ``line[i]``."""
    e = side_towards(line[i], line[i - 1])
    x = side_towards(line[i], line[i + 1])
    return (x - e) % 5


def straight_line(first: PentaCoord, second: PentaCoord, n: int, offset: int = 2):
    """Row of ``n`` tiles along one side of a line of the pentagrid.

    Consecutive tiles of such a row share a side perpendicular to the
    line; going through a tile the exit side is ``offset`` (2 or 3) faces
    after the entry side.  The two offsets give the rows on both sides."""
    if offset not in (2, 3):
        raise ValueError("offset must be 2 or 3")
    if second not in penta_neighbors(first):
        raise AddressError(f"{first} and {second} are not neighbours")
    out = [first, second]
    while len(out) < n:
        a, b = out[-2], out[-1]
        e = side_towards(b, a)
        out.append(penta_neighbors(b)[(e - 1 + offset) % 5])
    return out[:n]


def line_side(line, i):
    """Face of ``line[i]`` lying on the line the row follows."""
    if len(line) < 2:
        raise ValueError("a row has at least two tiles")
    if 0 < i < len(line) - 1:
        e = side_towards(line[i], line[i - 1])
        d = 1 if turn(line, i) == 2 else -1
        return (e - 1 + d) % 5 + 1
    j = 1 if i == 0 else len(line) - 2
    d = 1 if turn(line, j) == 2 else -1 if len(line) > 2 else 1
    if i == 0:
        x = side_towards(line[0], line[1])
        return (x - 1 - d) % 5 + 1
    e = side_towards(line[i], line[i - 1])
    return (e - 1 + d) % 5 + 1


def mirror_row(line):
    """Row of tiles on the other side of the line followed by ``line``."""
    return [penta_neighbors(t)[line_side(line, i) - 1] for i, t in enumerate(line)]


# -- metric -------------------------------------------------------------------

def _bfs(center, stop=None, limit=None):
    dist = {center: 0}
    q = deque([center])
    while q:
        x = q.popleft()
        if stop is not None and x == stop:
            break
        if limit is not None and dist[x] >= limit:
            continue
        for n in neighbors(x):
            if n is not None and n not in dist:
                dist[n] = dist[x] + 1
                q.append(n)
    return dist


def distance(a: DodecaAddr, b: DodecaAddr) -> int:
    a, b = canonical(a), canonical(b)
    d = _bfs(a, stop=b)
    if b not in d:
        raise RegionError(f"{b} unreachable from {a} inside the region")
    return d[b]


def ball(center: DodecaAddr, r: int):
    if r < 0:
        raise ValueError("negative radius")
    return set(_bfs(canonical(center), limit=r))


def disc(center: DodecaAddr, r: int):
    center = canonical(center)
    return {x for x in ball(center, r) if x.on_h and x.layer == center.layer}


def window(c: PentaCoord, layer="u"):
    """Disc of radius 3 around a tile: the usual figure window."""
    return disc(DodecaAddr(c, layer), 3)


# -- text syntax --------------------------------------------------------------

_ADDR_RE = re.compile(r"^(?:(?P<layer>[ub]):)?(?:(?P<zero>0)|\((?P<s>\d)\)-(?P<n>\d+))"
                      r"(?P<stack>(?:_\d+)*)$")


def parse_tile(text: str) -> PentaCoord:
    a = parse_addr(text)
    if a.stack or a.layer != "u":
        raise AddressError(f"{text!r} is not a plain tile")
    return a.base


def parse_addr(text: str) -> DodecaAddr:
    """Parse ``0``, ``(4)-3``, ``b:(3)-1_6_7`` and the like."""
    m = _ADDR_RE.match(text.strip())
    if not m:
        raise AddressError(f"cannot parse address {text!r}")
    base = CENTRAL if m["zero"] else PentaCoord(int(m["s"]), int(m["n"]))
    stack = tuple(int(x) for x in m["stack"].split("_")[1:])
    return DodecaAddr(base, m["layer"] or "u", stack)


def format_addr(a: DodecaAddr) -> str:
    s = f"{a.layer}:{a.base}"
    return s + "".join(f"_{f}" for f in a.stack)


# -- planar coordinates (Poincare disc) ----------------------------------------

_COSH_INRADIUS = math.cos(math.pi / 4) / math.sin(math.pi / 5)
_INRADIUS = math.acosh(_COSH_INRADIUS)
# side s of the central tile faces direction 126 + 72 (s - 1) degrees, so
# that (3)-1 lies straight below the central tile
_SIDE_ANGLE = {s: math.radians(126 + 72 * (s - 1)) for s in range(1, 6)}
_J = np.diag([-1.0, 1.0, 1.0])


def _reflection(theta):
    n = np.array([math.sinh(_INRADIUS), _COSH_INRADIUS * math.cos(theta),
                  _COSH_INRADIUS * math.sin(theta)])
    return np.eye(3) - 2 * np.outer(n, _J @ n)


_REFL = {s: _reflection(_SIDE_ANGLE[s]) for s in range(1, 6)}


@lru_cache(maxsize=None)
def _tile_matrix(word):
    m = np.eye(3)
    for s in word:
        m = m @ _REFL[s]
    return m


def _to_disc(x):
    return (x[1] / (1 + x[0]), x[2] / (1 + x[0]))


def tile_center(c: PentaCoord):
    return _to_disc(_tile_matrix(pentagrid().word(c)) @ np.array([1.0, 0, 0]))


def tile_polygon(c: PentaCoord):
    """Vertices of a tile in the Poincare disc, one per side pair."""
    cosh_r = 1 / (math.tan(math.pi / 5) * math.tan(math.pi / 4))
    r = math.acosh(cosh_r)
    m = _tile_matrix(pentagrid().word(c))
    pts = []
    for s in range(1, 6):
        t = _SIDE_ANGLE[s] + math.radians(36)
        x = np.array([math.cosh(r), math.sinh(r) * math.cos(t), math.sinh(r) * math.sin(t)])
        pts.append(_to_disc(m @ x))
    return pts


def face_anchor(c: PentaCoord, layer: str, f: int):
    """Point inside the tile where a stacked cell on face ``f`` is drawn."""
    w = pentagrid().word(c)
    pi, _ = _labels(w, layer)
    cx_, cy = tile_center(c)
    if f == 11 or f == 0:
        return (cx_, cy)
    sides = [s for s in cx.LATERAL if s == pi[f] or s in cx.ADJACENT[pi[f]]]
    m = _tile_matrix(w)
    pts = []
    for s in sides:
        t = _SIDE_ANGLE[s]
        x = np.array([_COSH_INRADIUS, math.sinh(_INRADIUS) * math.cos(t),
                      math.sinh(_INRADIUS) * math.sin(t)])
        pts.append(_to_disc(m @ x))
    px = sum(p[0] for p in pts) / len(pts)
    py = sum(p[1] for p in pts) / len(pts)
    return (cx_ + 0.55 * (px - cx_), cy + 0.55 * (py - cy))
