import json
import subprocess
import sys

import pytest

from dodecagrid import cli
from dodecagrid.rules import W

RULES = cli.rl.load_rules("rules.txt")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "nosuch")[0] == 2
    assert run(capsys, "build", "nosuch")[0] == 2
    assert run(capsys, "build", "track", "bogus=1")[0] == 2
    assert run(capsys, "run", "no_such_scenario")[0] == 2
    assert run(capsys, "render", "idle_track", "--generation", "999")[0] == 2
    assert run(capsys, "simulate-machine", "--program", "nosuch")[0] == 2
    assert run(capsys, "simulate-machine", "--program", "addition", "--inputs", "1,-2")[0] == 2
    assert run(capsys, "check-rules", "--table", "/nonexistent")[0] == 2


def test_check_rules_json(capsys):
    code, out, _ = run(capsys, "check-rules", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["rules"] == 35 and rep["conflicts"] == [] and rep["max_weight"] <= 21
    assert [25, 27] in rep["witnesses"]


def test_check_rules_corrupted_table(capsys, tmp_path):
    from importlib import resources
    text = resources.files("dodecagrid").joinpath("data", "rules.txt").read_text()
    text += "99 W.GGWBWWWWWWWW.G 7\n"
    f = tmp_path / "bad.txt"
    f.write_text(text)
    code, out, _ = run(capsys, "check-rules", "--table", str(f))
    assert code == 1 and "conflict" in out


def test_build_prints_layout(capsys):
    code, out, _ = run(capsys, "build", "track", "n=4")
    assert code == 0
    assert out.startswith("# path track:")
    assert out.count(":") > 4


def test_run_deterministic(capsys):
    a = run(capsys, "run", "fork_motion")
    b = run(capsys, "run", "fork_motion")
    assert a[0] == 0 and a == b


def test_run_golden(capsys, tmp_path):
    g = tmp_path / "t.trace"
    assert run(capsys, "run", "track_motion", "--write", str(g))[0] == 0
    code, out, _ = run(capsys, "run", "track_motion", "--golden", str(g))
    assert code == 0 and "match" in out
    g.write_text(g.read_text().replace("frame track 3B", "frame track 3G"))
    assert run(capsys, "run", "track_motion", "--golden", str(g))[0] == 1


def test_run_scenario_file(capsys, tmp_path):
    f = tmp_path / "s.scn"
    f.write_text("name mine\nbuild track n=6 phase=1\nloco track 2 B\nsteps 4\ntrace track\n")
    code, out, _ = run(capsys, "run", str(f))
    assert code == 0
    spec = cli.bd.straight_track(6, "u", 1)
    want = [cli.bd.frame(spec.kinds, r) for r in cli.bd.expected_trace(spec, cli.bd.LocomotivePlacement(2), 5)]
    got = [line.split("track=")[1] for line in out.splitlines()]
    assert len(got) == 5 and got == want[:5]


def test_render(capsys, tmp_path):
    o = tmp_path / "x.svg"
    assert run(capsys, "render", "track_motion", "--generation", "2", "-o", str(o))[0] == 0
    svg = o.read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    states = cli.svg_states(svg)
    assert states and set(v.name for v in states.values()) <= {"W", "B", "R", "G"}
    assert any(v != W for v in states.values())
    code, out, _ = run(capsys, "render", "track_motion", "--generation", "2")
    assert out == svg
    assert run(capsys, "render", "idle_track", "--radius", "5")[0] == 2


def test_simulate_circuit(capsys, tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("block m one_bit_memory bit=0\ncomponent e terminal\ncomponent z terminal\n"
                 "component o terminal\nedge m.E e.in\nedge m.b0 z.in\nedge m.b1 o.in\ntoken m.W\n")
    code, out, _ = run(capsys, "simulate-circuit", str(f))
    assert code == 0
    assert "# bit m 1" in out
    first = out.splitlines()[0].split()
    assert first[0] == "1" and first[2] == "m.W.in"
    f.write_text("component r relay\ntoken r.in\n")
    assert run(capsys, "simulate-circuit", str(f))[0] == 1
    f.write_text("component r nosuch\n")
    assert run(capsys, "simulate-circuit", str(f))[0] == 2


def test_simulate_machine(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate-machine", "--program", "addition", "--inputs", "2,3")
    assert code == 0 and out.splitlines()[-2].endswith("done 5,0") and "halted" in out
    code, out, _ = run(capsys, "simulate-machine", "--program", "max", "--inputs", "3,1", "--cosim")
    assert code == 0 and "verdict: equal" in out
    f = tmp_path / "p.txt"
    f.write_text("a: INC r0 a\n")
    code, out, _ = run(capsys, "simulate-machine", "--program", str(f), "--budget", "3")
    assert code == 0 and "budget exhausted" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "dodecagrid", "check-rules"], capture_output=True, text=True)
    assert r.returncode == 0 and "35 rules" in r.stdout
