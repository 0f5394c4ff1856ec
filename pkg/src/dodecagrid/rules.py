"""States, rules and the outer totalistic projection of the rule table."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from importlib import resources
from itertools import combinations


class CellState(enum.IntEnum):
    W = 0
    B = 1
    R = 2
    G = 3

    @property
    def weight(self):
        return int(self)

    @classmethod
    def parse(cls, ch):
        try:
            return cls[ch]
        except KeyError:
            raise RuleFormatError(f"bad state letter {ch!r}") from None


W, B, R, G = CellState.W, CellState.B, CellState.R, CellState.G


class RuleFormatError(ValueError):
    pass


class RuleKind(enum.Enum):
    CONSERVATIVE = "conservative"
    MOTION = "motion"


@dataclass(frozen=True)
class Rule:
    number: int
    old: CellState
    neighborhood: tuple
    new: CellState

    def __post_init__(self):
        if len(self.neighborhood) != 12:
            raise RuleFormatError(f"rule {self.number}: {len(self.neighborhood)} neighbours, expected 12")

    @property
    def weight(self):
        return sum(s.weight for s in self.neighborhood)

    @property
    def total_weight(self):
        return self.weight + self.old.weight

    @property
    def kind(self):
        return RuleKind.CONSERVATIVE if self.old == self.new else RuleKind.MOTION

    @property
    def key(self):
        return (self.old, self.weight)

    def __str__(self):
        nb = "".join(s.name for s in self.neighborhood)
        return f"{self.number} {self.old.name}.{nb}.{self.new.name} {self.weight}"


_LINE = re.compile(r"^(\d+)\s+(\w)\.(\w*)\.(\w)\s+(\d+)$")


def parse_rule_file(text: str) -> list:
    """Parse rule lines; ``#`` starts a comment.  Declared weights are
    checked, and a repeated number must repeat its rule verbatim."""
    rules, seen = [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise RuleFormatError(f"line {lineno}: cannot parse {raw!r}")
        n, old, nb, new, w = m.groups()
        rule = Rule(int(n), CellState.parse(old), tuple(CellState.parse(c) for c in nb),
                    CellState.parse(new))
        if rule.weight != int(w):
            raise RuleFormatError(f"line {lineno}: rule {n} declares weight {w}, states sum to {rule.weight}")
        prev = seen.get(rule.number)
        if prev is not None and prev != rule:
            raise RuleFormatError(f"line {lineno}: rule {n} repeated with a different content")
        seen[rule.number] = rule
        rules.append(rule)
    return rules


def load_rules(name="rules.txt") -> list:
    """Load a shipped table: ``rules.txt`` (as printed) or
    ``rules_erratum.txt`` (printed table with the repairs, used by the engine)."""
    text = resources.files("dodecagrid").joinpath("data", name).read_text()
    return parse_rule_file(text)


def distinct(rules):
    """One rule per number, first occurrence kept."""
    out = {}
    for r in rules:
        out.setdefault(r.number, r)
    return [out[k] for k in sorted(out)]


@dataclass(frozen=True)
class Conflict:
    key: tuple
    first: Rule
    second: Rule


class TotalisticTable:
    """Partial map (state, neighbour weight sum) -> new state."""

    def __init__(self, mapping=None, sources=None):
        self._map = dict(mapping or {})
        self._sources = dict(sources or {})

    @classmethod
    def from_rules(cls, rules):
        table, conflicts = project(rules)
        if conflicts:
            c = conflicts[0]
            raise ValueError(f"rules {c.first.number} and {c.second.number} conflict on {c.key}")
        return table

    def lookup(self, state, total):
        return self._map.get((CellState(state), total))

    def __contains__(self, key):
        return key in self._map

    def __getitem__(self, key):
        return self._map[key]

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        return isinstance(other, TotalisticTable) and self._map == other._map

    def items(self):
        return sorted(self._map.items())

    def rules_for(self, key):
        return self._sources.get(key, [])

    def max_weight(self):
        return max((k[1] for k in self._map), default=0)

    def as_array(self, size=37):
        """Dense lookup array ``a[state, sum]``; -1 marks a miss."""
        import numpy as np
        a = np.full((4, size), -1, dtype=np.int8)
        for (s, w), n in self._map.items():
            a[int(s), w] = int(n)
        return a


def project(rules):
    """Bucket rules by (old, weight); returns (table, conflicts)."""
    mapping, sources, conflicts = {}, {}, []
    for r in rules:
        bucket = sources.setdefault(r.key, [])
        for other in bucket:
            if other.new != r.new and other.number != r.number:
                conflicts.append(Conflict(r.key, other, r))
        if r not in bucket:
            bucket.append(r)
        mapping.setdefault(r.key, r.new)
    return TotalisticTable(mapping, sources), conflicts


def check_outer_totalistic(rules):
    """Projected table when conflict-free, else the list of conflicts."""
    table, conflicts = project(rules)
    return conflicts if conflicts else table


def check_not_fully_totalistic(rules):
    """Pairs of rules with equal total weight (own state included) and
    different new states."""
    rs = distinct(rules)
    return [(a.number, b.number) for a, b in combinations(rs, 2)
            if a.total_weight == b.total_weight and a.new != b.new]


def same_key_groups(rules, old=W):
    """Weights at which several distinct neighbourhoods share (old, weight)."""
    groups = {}
    for r in distinct(rules):
        if r.old == old:
            groups.setdefault(r.weight, set()).add(r.neighborhood)
    return sorted(w for w, nbs in groups.items() if len(nbs) > 1)


def permuted_image(rule: Rule, sigma) -> Rule:
    """Rule with neighbour i moved to position sigma[i]."""
    sigma = list(sigma)
    if sorted(sigma) != list(range(12)):
        raise ValueError("sigma is not a permutation of 0..11")
    nb = [None] * 12
    for i, j in enumerate(sigma):
        nb[j] = rule.neighborhood[i]
    return Rule(rule.number, rule.old, tuple(nb), rule.new)
