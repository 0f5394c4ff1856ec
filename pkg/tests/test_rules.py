import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from dodecagrid import rules as rl
from dodecagrid.rules import B, G, R, W, CellState

PRINTED = rl.load_rules()
REPAIRED = rl.load_rules("rules_erratum.txt")


def test_state_weights():
    assert [s.weight for s in (W, B, R, G)] == [0, 1, 2, 3]


def test_parse_single_lines():
    r, = rl.parse_rule_file("1 W.WWWWWWWWWWWW.W 0")
    assert (r.number, r.old, r.new, r.weight) == (1, W, W, 0)
    r, = rl.parse_rule_file("18 W.GGWBWWWWWWWW.R 7")
    assert (r.number, r.weight, r.new) == (18, 7, R)
    assert r.kind == rl.RuleKind.MOTION


@pytest.mark.parametrize("line", [
    "18 W.GGWBWWWWWWWW.R 8",        # declared weight off by one
    "18 W.GGWXWWWWWWWW.R 7",        # unknown state letter
    "18 W.GGWBWWWWWWW.R 7",         # eleven neighbours
    "18 W.GGWBWWWWWWWWW.R 7",       # thirteen
])
def test_parse_errors(line):
    with pytest.raises(rl.RuleFormatError):
        rl.parse_rule_file(line)


def test_repeated_number_must_be_verbatim():
    ok = "6 W.GGWWWWWWWWWW.W 6\n6 W.GGWWWWWWWWWW.W 6\n"
    assert len(rl.parse_rule_file(ok)) == 2
    with pytest.raises(rl.RuleFormatError):
        rl.parse_rule_file("6 W.GGWWWWWWWWWW.W 6\n6 W.GRWWWWWWWWWW.W 5\n")


def test_shipped_table_counts():
    assert len(rl.distinct(PRINTED)) == 35
    assert len(PRINTED) == 36            # rule 6 printed twice
    assert max(r.weight for r in PRINTED) <= 21
    assert max(r.weight for r in REPAIRED) == 21


def test_kinds():
    by = {r.number: r for r in PRINTED}
    assert by[1].kind == rl.RuleKind.CONSERVATIVE
    assert by[18].kind == rl.RuleKind.MOTION


def brute_conflicts(rules):
    return sorted({tuple(sorted((a.number, b.number))) for a, b in itertools.combinations(rules, 2)
                   if a.key == b.key and a.new != b.new})


def test_projection_has_no_conflict():
    table = rl.check_outer_totalistic(PRINTED)
    assert isinstance(table, rl.TotalisticTable)
    assert brute_conflicts(PRINTED) == []
    for r in REPAIRED:
        assert rl.check_outer_totalistic(REPAIRED).lookup(r.old, r.weight) == r.new


def test_injected_rule_conflicts_with_rule_18():
    bad = rl.parse_rule_file("99 W.GGWBWWWWWWWW.G 7")[0]
    rules = PRINTED + [bad]
    report = rl.check_outer_totalistic(rules)
    assert isinstance(report, list)
    assert sorted((c.first.number, c.second.number) for c in report) == [(18, 99)]
    assert brute_conflicts(rules) == [(18, 99)]
    with pytest.raises(ValueError):
        rl.TotalisticTable.from_rules(rules)


def test_empty_rules():
    table = rl.check_outer_totalistic([])
    assert len(table) == 0


def test_not_fully_totalistic_witnesses():
    w = rl.check_not_fully_totalistic(PRINTED)
    oracle = sorted((a.number, b.number) for a, b in itertools.combinations(rl.distinct(PRINTED), 2)
                    if a.total_weight == b.total_weight and a.new != b.new)
    assert w == oracle
    assert (25, 27) in w


def test_toy_totalistic_table_has_no_witness():
    toy = rl.parse_rule_file("1 W.WWWWWWWWWWWW.W 0\n2 W.GWWWWWWWWWWW.W 3\n3 B.BWWWWWWWWWWW.B 1\n")
    assert rl.check_not_fully_totalistic(toy) == []


def test_same_key_groups_with_blank_current_state():
    assert rl.same_key_groups(PRINTED) == [9]
    table = rl.check_outer_totalistic(PRINTED)
    assert len(table.rules_for((W, 9))) == 2


def test_permuted_image_identity_and_errors():
    r = PRINTED[17]
    assert rl.permuted_image(r, range(12)) == r
    with pytest.raises(ValueError):
        rl.permuted_image(r, [0] * 12)


@given(st.permutations(range(12)))
def test_permuted_rule_18_keeps_its_key(sigma):
    r = next(x for x in PRINTED if x.number == 18)
    p = rl.permuted_image(r, sigma)
    assert (p.old, p.weight, p.new) == (r.old, r.weight, r.new)


@settings(max_examples=20)
@given(st.randoms())
def test_projection_is_permutation_invariant(rnd):
    perm = []
    for r in PRINTED:
        sigma = list(range(12))
        rnd.shuffle(sigma)
        perm.append(rl.permuted_image(r, sigma))
    assert rl.check_outer_totalistic(perm) == rl.check_outer_totalistic(PRINTED)


def test_dense_array():
    a = rl.check_outer_totalistic(REPAIRED).as_array()
    assert a.shape == (4, 37)
    assert a[int(W), 7] == int(R)
    assert a[int(W), 4] == -1
