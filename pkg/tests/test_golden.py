from pathlib import Path

import pytest

from dodecagrid import cli

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("name", cli.scenario_names())
def test_scenario_matches_golden(name):
    run = cli.run_scenario(cli.read_scenario(name))
    lines = cli.golden_lines(run)
    assert cli.first_divergence(lines, (GOLDEN / f"{name}.trace").read_text()) is None


def test_every_scenario_has_a_golden():
    assert sorted(p.stem for p in GOLDEN.glob("*.trace")) == sorted(cli.scenario_names())


def test_divergence_is_located():
    run = cli.run_scenario(cli.read_scenario("track_motion"))
    lines = cli.golden_lines(run)
    text = (GOLDEN / "track_motion.trace").read_text()
    g = cli.parse_golden(text)
    gen, frames, _ = g.generations[3]
    bad = text.replace(f"frame track {frames['track']}\n",
                       f"frame track {frames['track'][::-1]}\n", 1)
    d = cli.first_divergence(lines, bad)
    assert d is not None and d[0] <= 3
