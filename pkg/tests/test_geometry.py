from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from dodecagrid import coxeter as cx
from dodecagrid import geometry as geo
from dodecagrid.geometry import CENTRAL, DodecaAddr, PentaCoord

U0 = DodecaAddr(CENTRAL)


def tiles_by_distance(limit):
    dist = {CENTRAL: 0}
    q = deque([CENTRAL])
    while q:
        x = q.popleft()
        if dist[x] == limit:
            continue
        for n in geo.penta_neighbors(x):
            if n is not None and n not in dist:
                dist[n] = dist[x] + 1
                q.append(n)
    return dist


def fibonacci_level_sizes(levels):
    """Tiles per level in one sector, from the substitution white -> black
    white white, black -> black white, starting from a white root."""
    white, black = 1, 0
    sizes = []
    for _ in range(levels):
        sizes.append(white + black)
        white, black = 2 * white + black, white + black
    return sizes


TILES = sorted(tiles_by_distance(4), key=lambda t: (t.sector, t.index))


def test_central_neighbours_are_the_sector_roots():
    assert sorted(geo.penta_neighbors(CENTRAL)) == sorted(PentaCoord(s, 1) for s in range(1, 6))


def test_penta_neighbors_symmetric_up_to_index_50():
    tiles = [t for t in tiles_by_distance(5) if t.index <= 50]
    assert len(tiles) > 100
    for t in tiles:
        nb = geo.penta_neighbors(t)
        assert len(nb) == 5
        for n in nb:
            if n is not None and geo.tile_level(n) < geo.MAX_LEVEL:
                assert t in geo.penta_neighbors(n)


def test_tiles_per_distance_match_sector_trees():
    counts = {}
    for t, d in tiles_by_distance(5).items():
        counts[d] = counts.get(d, 0) + 1
    sizes = fibonacci_level_sizes(5)
    assert [counts[d] for d in range(1, 6)] == [5 * s for s in sizes]
    # frozen from the two oracles above
    assert [counts[d] for d in range(6)] == [1, 5, 15, 40, 105, 275]


def test_tile_level_is_distance_from_the_centre():
    assert all(geo.tile_level(t) == d for t, d in tiles_by_distance(5).items())


def test_malformed_coordinate():
    with pytest.raises(geo.AddressError):
        geo.parse_addr("(7)-1")
    with pytest.raises(geo.AddressError):
        geo.parse_addr("u:(1)")


CELLS = sorted(geo.ball(U0, 2))


@pytest.mark.parametrize("a", CELLS[::3], ids=str)
def test_adjacency_involution(a):
    for f, b in enumerate(geo.neighbors(a)):
        if b is None:
            continue
        g = geo.face_towards(b, a)
        assert g is not None
        assert geo.dodeca_neighbor(b, g) == a
        assert geo.dodeca_neighbor(a, f) == b


def test_face_zero_crosses_h_and_lateral_faces_follow_the_pentagrid():
    for t in TILES[:40]:
        for layer, other in (("u", "b"), ("b", "u")):
            a = geo.canonical(DodecaAddr(t, layer))
            if any(n is None for n in geo.neighbors(a)):
                continue
            assert geo.dodeca_neighbor(a, 0) == geo.canonical(DodecaAddr(t, other))
            lateral = {geo.dodeca_neighbor(a, f) for f in range(1, 6)}
            assert lateral == {geo.canonical(DodecaAddr(n, layer)) for n in geo.penta_neighbors(t)}
            assert all(x.on_h for x in lateral)


def test_upper_crown_cells_are_stacked():
    for f in range(6, 12):
        n = geo.dodeca_neighbor(U0, f)
        assert n.stack and geo.depth(n) == 1


def test_second_layer_identification_across_a_shared_side():
    # u:0 and u:(3)-1 share a side; the cells stacked on the upper faces
    # along that side share a face, and the path 0 -> 6 -> 1 lands on the
    # cell the other tile reaches in one step
    a, b = U0, geo.parse_addr("u:(3)-1")
    assert geo.can_see(a, b)
    x, y = geo.parse_addr("u:0_6"), geo.parse_addr("u:(3)-1_7")
    assert geo.can_see(x, y)
    assert geo.canonical(DodecaAddr(CENTRAL, "u", (6, 1))) == geo.canonical(y)


def test_cells_on_two_upper_faces_do_not_see_each_other():
    d6, d7 = geo.dodeca_neighbor(U0, 6), geo.dodeca_neighbor(U0, 7)
    assert 6 in cx.ADJACENT[7]
    assert not geo.can_see(d6, d7)


@pytest.mark.parametrize("a", CELLS[::7], ids=str)
def test_four_cells_around_every_edge(a):
    if any(n is None for n in geo.neighbors(a)):
        pytest.skip("boundary cell")
    for f in range(12):
        for g in cx.ADJACENT[f]:
            if g < f:
                continue
            try:
                cells = geo.edge_cells(a, f, g)
            except geo.RegionError:
                continue
            assert len(set(cells)) == 4
            e, p, q, far = cells
            assert geo.can_see(e, p) and geo.can_see(e, q) and not geo.can_see(p, q)
            assert geo.can_see(far, p) and geo.can_see(far, q)


def test_edge_cells_rejects_opposite_faces():
    with pytest.raises(geo.AddressError):
        geo.edge_cells(U0, 0, 11)


@given(st.sampled_from(CELLS))
def test_canonical_idempotent(a):
    assert geo.canonical(geo.canonical(a)) == geo.canonical(a)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(sorted(geo.ball(U0, 2))), st.sampled_from(sorted(geo.ball(U0, 2))))
def test_distance_symmetric(a, b):
    assert geo.distance(a, b) == geo.distance(b, a)
    assert (geo.distance(a, b) == 0) == (a == b)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(CELLS), st.sampled_from(CELLS), st.sampled_from(CELLS))
def test_triangle_inequality(a, b, c):
    assert geo.distance(a, c) <= geo.distance(a, b) + geo.distance(b, c)


def test_balls_nest():
    assert geo.ball(U0, 0) == {U0}
    prev = set()
    for r in range(4):
        b = geo.ball(U0, r)
        assert prev <= b
        prev = b
    discs = [geo.disc(U0, r) for r in range(5)]
    assert all(x <= y for x, y in zip(discs, discs[1:]))
    with pytest.raises(ValueError):
        geo.ball(U0, -1)


def own_disc(center, r):
    """Breadth-first search over cells sharing a face, kept to the
    on-H cells of the centre's layer."""
    seen = {center: 0}
    q = deque([center])
    while q:
        x = q.popleft()
        if seen[x] == r:
            continue
        for f in range(12):
            n = geo.dodeca_neighbor(x, f)
            if n is not None and n not in seen:
                seen[n] = seen[x] + 1
                q.append(n)
    return {x for x in seen if x.on_h and x.layer == center.layer}


def test_disc_of_radius_3():
    d = geo.disc(U0, 3)
    assert d == own_disc(U0, 3)
    assert len(d) == 61
    assert geo.window(CENTRAL) == d


def test_address_text_round_trip():
    for a in CELLS:
        assert geo.canonical(geo.parse_addr(geo.format_addr(a))) == a


def test_stack_limit():
    with pytest.raises(geo.RegionError):
        DodecaAddr(CENTRAL, "u", (6,) * (geo.MAX_STACK + 1))


def test_poincare_coordinates_inside_the_disc():
    for t in TILES[:30]:
        for x, y in geo.tile_polygon(t):
            assert x * x + y * y < 1
        assert geo.tile_center(CENTRAL) == pytest.approx((0.0, 0.0), abs=1e-12)
