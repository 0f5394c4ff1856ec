"""Right-angled Coxeter group of the dodecagrid.

Every cell of the {5,3,4} tessellation is the image of a base dodecahedron
under a unique element of the group generated by the reflections in its 12
faces.  Two face reflections commute exactly when the faces share an edge
(dihedral angle pi/2), so the group is right-angled and words can be put in
a canonical form by commutation and cancellation alone.

Elements are tuples of face labels in lexicographic normal form.  A cell
reached across face ``f`` of cell ``w`` is ``w * f``; its face labels are the
ones transported from the base cell by ``w``.
"""
from functools import lru_cache

N_FACES = 12


def _face_adjacency():
    adj = {f: set() for f in range(N_FACES)}

    def link(a, b):
        adj[a].add(b)
        adj[b].add(a)

    for i in range(1, 6):
        link(0, i)
        link(i, i % 5 + 1)
        # lateral i carries upper faces 5+i and 6+i (cyclic in 6..10)
        link(i, 6 + (i - 1))
        link(i, 6 + i % 5)
    for j in range(5):
        link(6 + j, 6 + (j + 1) % 5)
        link(6 + j, 11)
    return {f: frozenset(s) for f, s in adj.items()}


ADJACENT = _face_adjacency()
LATERAL = (1, 2, 3, 4, 5)
UPPER = (6, 7, 8, 9, 10)


def commute(a, b):
    return a == b or b in ADJACENT[a]


def _front_candidates(word):
    """Indices of letters that can be moved to the front of ``word``."""
    out = []
    for i, x in enumerate(word):
        if all(commute(word[k], x) for k in range(i)):
            out.append(i)
    return out


def normalize(word):
    """Lexicographic normal form of a reduced word."""
    rest = list(word)
    res = []
    while rest:
        idx = min(_front_candidates(rest), key=lambda i: rest[i])
        res.append(rest.pop(idx))
    return tuple(res)


@lru_cache(maxsize=None)
def mul(word, s):
    """Right-multiply a normal-form word by generator ``s``."""
    for j in range(len(word) - 1, -1, -1):
        x = word[j]
        if x == s:
            return normalize(word[:j] + word[j + 1:])
        if not commute(x, s):
            break
    return normalize(word + (s,))


def mul_word(word, letters):
    for s in letters:
        word = mul(word, s)
    return word


def left_descents(word):
    return frozenset(word[i] for i in _front_candidates(word))


def right_descents(word):
    rev = word[::-1]
    return frozenset(rev[i] for i in _front_candidates(rev))


def split_parabolic(word, letters):
    """Split ``word`` as ``w * v`` with ``w`` in the subgroup generated by
    ``letters`` and ``v`` of minimal length in its coset."""
    rest = list(word)
    head = []
    while True:
        pick = [i for i in _front_candidates(rest) if rest[i] in letters]
        if not pick:
            break
        head.append(rest.pop(pick[0]))
    return normalize(head), tuple(rest)


def rewrites(word):
    """All reduced spellings of an element (small words only)."""
    if not word:
        return [()]
    out = set()
    for i in _front_candidates(list(word)):
        rest = word[:i] + word[i + 1:]
        for tail in rewrites(rest):
            out.add((word[i],) + tail)
    return sorted(out)
