"""Command-line front end.

Subcommands: check-rules, build, run, render, simulate-circuit,
simulate-machine.  Exit codes: 0 ok, 1 audit or comparison failure,
2 usage error.

Scenario files (``*.scn``) are line oriented::

    name   <text>
    build  <structure> [key=value ...]    # several builds are composed
    loco   <path> <index> [state]      # see builders.LocomotivePlacement
    set    <address> <state>
    steps  <n>
    trace  <path> [<path> ...]         # paths whose frames are recorded

A golden trace records the idle layout once and then, per generation, the
largest neighbour sum met by the engine, the frames of the traced paths and
every cell that differs from the idle layout::

    idle <address> <state>
    gen <n> <max neighbour sum>
    frame <path> <frame>
    diff <address> <state>
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from xml.sax.saxutils import quoteattr

from . import builders as bd
from . import engine
from . import geometry as geo
from . import machine as mc
from . import railway as rw
from . import rules as rl
from .rules import CellState, W

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


# -- structures and scenarios -------------------------------------------------------

STRUCTURES = {
    "track": lambda n="12", layer="u", phase="0": bd.build_track(bd.straight_track(int(n), layer, int(phase))),
    "track_pair": lambda n="12", phase="0": bd.build_track_pair(bd.straight_track(int(n), "u", int(phase))),
    "switch": lambda variant="1": bd.build_fixed_switch(int(variant)),
    "switch1": lambda: bd.build_fixed_switch(1),
    "switch2": lambda: bd.build_fixed_switch(2),
    "switch3": lambda: bd.build_fixed_switch(3),
    "fork": bd.build_fork,
    "controller": lambda: bd.build_controller(True),
    "controller_blocking": lambda: bd.build_controller(False),
    "tunnel": bd.build_tunnel,
    "detour": bd.build_detour,
    "switch_window": bd.build_switch_window,
}


@dataclass
class Scenario:
    name: str = ""
    builds: list = field(default_factory=list)      # (structure, params)
    locomotives: list = field(default_factory=list)
    sets: list = field(default_factory=list)
    steps: int = 0
    traced: list = field(default_factory=list)


def parse_scenario(text) -> Scenario:
    sc = Scenario()
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        op, args = words[0], words[1:]
        try:
            if op == "name":
                sc.name = " ".join(args)
            elif op == "build":
                if args[0] not in STRUCTURES:
                    raise UsageError(f"unknown structure {args[0]!r}")
                sc.builds.append((args[0], dict(a.split("=", 1) for a in args[1:])))
            elif op == "loco":
                state = CellState[args[2]] if len(args) > 2 else None
                sc.locomotives.append(bd.LocomotivePlacement(int(args[1]), state, args[0]))
            elif op == "set":
                sc.sets.append((geo.parse_addr(args[0]), CellState[args[1]]))
            elif op == "steps":
                sc.steps = int(args[0])
            elif op == "trace":
                sc.traced.extend(args)
            else:
                raise UsageError(f"unknown directive {op!r}")
        except (IndexError, KeyError, ValueError) as e:
            raise UsageError(f"line {lineno}: {e}") from None
    if not sc.builds:
        raise UsageError("scenario has no build line")
    return sc


def scenario_names():
    d = resources.files("dodecagrid").joinpath("data", "scenarios")
    return sorted(p.name[:-4] for p in d.iterdir() if p.name.endswith(".scn"))


def read_scenario(ref) -> Scenario:
    """A path, or the name of a shipped scenario."""
    p = Path(ref)
    if p.exists():
        text = p.read_text()
    else:
        f = resources.files("dodecagrid").joinpath("data", "scenarios", f"{ref}.scn")
        if not f.is_file():
            raise UsageError(f"no scenario file or shipped scenario {ref!r}")
        text = f.read_text()
    sc = parse_scenario(text)
    sc.name = sc.name or p.stem
    return sc


_LAYOUTS = {}


def build_structure(name, params=None):
    key = (name, tuple(sorted((params or {}).items())))
    if key not in _LAYOUTS:
        _LAYOUTS[key] = STRUCTURES[name](**(params or {}))
    return _LAYOUTS[key]


@dataclass
class ScenarioRun:
    scenario: Scenario
    layout: bd.Layout
    configs: list
    reports: list

    @property
    def max_sum(self):
        return max((r.max_neighbor_sum for r in self.reports), default=0)

    def frames(self, g):
        c = self.configs[g]
        return {p: bd.frame(self.layout.kinds(p), [c[x] for x in self.layout.path(p)])
                for p in self.scenario.traced}


def compose(layouts):
    """Union of layouts.  A cell given two different states, or used as
    an element of two kinds, is a load error; path names that clash are
    prefixed with the layout's position."""
    if len(layouts) == 1:
        return layouts[0]
    out = bd.Layout(" + ".join(x.name for x in layouts))
    for i, lay in enumerate(layouts):
        for a, s in lay.items():
            if out._cells.get(a, s) != s:
                raise bd.BuildError(f"collision at {geo.format_addr(a)}: "
                                    f"{out._cells[a].name} vs {s.name}")
            out._cells[a] = s
        for c, e in lay.elements.items():
            if c in out.elements and out.elements[c].kind != e.kind:
                raise bd.BuildError(f"{geo.format_addr(c)} used with two kinds")
            out.elements.setdefault(c, e)
        for name, cells in lay.paths.items():
            out.paths[name if name not in out.paths else f"{i}.{name}"] = cells
        out.paired |= lay.paired
        out.fixed.update(lay.fixed)
    return out


def run_scenario(sc: Scenario) -> ScenarioRun:
    lay = compose([build_structure(n, p) for n, p in sc.builds])
    if len(sc.builds) > 1:
        bad = bd.visibility_audit(lay)
        if bad:
            raise bd.VisibilityError(bad)
    c = lay
    for placement in sc.locomotives:
        c = bd.place_locomotive(c, placement)
    for a, s in sc.sets:
        c = bd.put(c, a, s)
    configs, reports = [c], []
    for _ in range(sc.steps):
        c, rep = engine.step(c)
        configs.append(c)
        reports.append(rep)
    return ScenarioRun(sc, lay, configs, reports)


def golden_lines(run: ScenarioRun):
    lay = run.layout
    out = [f"# scenario {run.scenario.name}"]
    out += [f"idle {geo.format_addr(a)} {s.name}" for a, s in lay.items()]
    for g, c in enumerate(run.configs):
        m = run.reports[g - 1].max_neighbor_sum if g else 0
        out.append(f"gen {g} {m}")
        for p, fr in run.frames(g).items():
            out.append(f"frame {p} {fr}")
        cells = sorted(set(c._cells) | set(lay._cells))
        out += [f"diff {geo.format_addr(a)} {c[a].name}" for a in cells if c[a] != lay[a]]
    return out


@dataclass
class Golden:
    idle: engine.Configuration
    generations: list      # (max sum, frames, full configuration)


def parse_golden(text) -> Golden:
    idle = engine.Configuration()
    gens = []
    for raw in text.splitlines():
        w = raw.split()
        if not w or w[0].startswith("#"):
            continue
        if w[0] == "idle":
            idle[geo.parse_addr(w[1])] = CellState[w[2]]
        elif w[0] == "gen":
            c = idle.copy()
            c.generation = int(w[1])
            gens.append((int(w[2]), {}, c))
        elif w[0] == "frame":
            gens[-1][1][w[1]] = w[2]
        elif w[0] == "diff":
            gens[-1][2][geo.parse_addr(w[1])] = CellState[w[2]]
        else:
            raise UsageError(f"bad golden line {raw!r}")
    return Golden(idle, gens)


def first_divergence(lines, golden_text):
    """Generation of the first line that differs, or None."""
    want = [x for x in golden_text.splitlines() if x.strip()]
    gen = 0
    for i in range(max(len(lines), len(want))):
        a = lines[i] if i < len(lines) else None
        b = want[i] if i < len(want) else None
        for x in (a, b):
            if x and x.startswith("gen "):
                gen = int(x.split()[1])
        if a != b:
            return gen, a, b
    return None


# -- SVG rendering -------------------------------------------------------------------

COLORS = {"W": "#ffffff", "B": "#3060d0", "R": "#d03030", "G": "#30a040"}
MAX_RADIUS = 4


def _tiles_within(center, radius):
    dist = {center: 0}
    todo = [center]
    while todo:
        nxt = []
        for t in todo:
            if dist[t] == radius:
                continue
            for n in geo.penta_neighbors(t):
                if n is not None and n not in dist and geo.tile_level(n) <= geo.MAX_LEVEL - 1:
                    dist[n] = dist[t] + 1
                    nxt.append(n)
        todo = nxt
    return sorted(dist, key=lambda t: (dist[t], str(t)))


def _pts(points, scale=200.0):
    return " ".join(f"{scale * (1 + x):.3f},{scale * (1 - y):.3f}" for x, y in points)


def render_svg(c: engine.Configuration, center=geo.CENTRAL, radius=3, title=""):
    """Projection on H: one pentagon per tile (its upper cell), a smaller
    pentagon for the cell below H, and a disc on the face of the base cell
    for every non-blank stacked cell."""
    if not 0 <= radius <= MAX_RADIUS:
        raise UsageError(f"radius must be between 0 and {MAX_RADIUS}")
    tiles = _tiles_within(center, radius)
    S = 200.0
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * S:.0f}" height="{2 * S:.0f}" '
           f'viewBox="0 0 {2 * S:.0f} {2 * S:.0f}" data-generation="{c.generation}">',
           f"<title>{title}</title>" if title else "",
           f'<circle cx="{S}" cy="{S}" r="{S}" fill="#f4f4f4" stroke="#888"/>']
    tileset = set(tiles)
    for t in tiles:
        poly = geo.tile_polygon(t)
        cx, cy = geo.tile_center(t)
        for layer, k in (("u", 1.0), ("b", 0.45)):
            a = geo.canonical(geo.DodecaAddr(t, layer))
            pts = [(cx + k * (x - cx), cy + k * (y - cy)) for x, y in poly]
            s = c[a].name
            out.append(f'<polygon data-addr={quoteattr(geo.format_addr(a))} data-state="{s}" '
                       f'points="{_pts(pts, S)}" fill="{COLORS[s]}" stroke="#444" stroke-width="0.6"/>')
    for a, s in c.items():
        if not a.stack or a.base not in tileset:
            continue
        x, y = geo.face_anchor(a.base, a.layer, a.stack[0])
        r = max(1.0, 6.0 - 1.5 * len(a.stack)) * (0.6 if a.layer == "b" else 1.0)
        out.append(f'<circle data-addr={quoteattr(geo.format_addr(a))} data-state="{s.name}" '
                   f'cx="{S * (1 + x):.3f}" cy="{S * (1 - y):.3f}" r="{r:.2f}" fill="{COLORS[s.name]}" '
                   f'stroke="#222" stroke-width="0.3"/>')
    out.append("</svg>")
    return "\n".join(x for x in out if x) + "\n"


def svg_states(svg_text):
    """Mapping address -> state read back from ``data-*`` attributes."""
    import re
    return {geo.canonical(geo.parse_addr(a)): CellState[s]
            for a, s in re.findall(r'data-addr="([^"]+)" data-state="(\w)"', svg_text)}


def window_cells(center=geo.CENTRAL, radius=3):
    return set(_tiles_within(center, radius))


# -- commands --------------------------------------------------------------------------

def cmd_check_rules(args):
    try:
        if args.table:
            rules = rl.parse_rule_file(Path(args.table).read_text())
        else:
            rules = rl.load_rules(args.name)
    except (OSError, rl.RuleFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    table, conflicts = rl.project(rules)
    witnesses = rl.check_not_fully_totalistic(rules)
    distinct = rl.distinct(rules)
    report = {
        "rules": len(distinct),
        "conflicts": [[c.first.number, c.second.number, c.key[0].name, c.key[1]] for c in conflicts],
        "witnesses": witnesses,
        "max_weight": max(r.weight for r in distinct),
        "ww_weights": sorted(w for (s, w), n in table.items() if s == W and n == W),
    }
    if args.json:
        print(json.dumps(report, indent=1, sort_keys=True))
    else:
        print(f"{report['rules']} rules, {len(conflicts)} conflicts, max weight {report['max_weight']}"
              f"{' <= 21' if report['max_weight'] <= 21 else ' > 21'}")
        for a, b, s, w in report["conflicts"]:
            print(f"conflict: rules {a} and {b} on ({s}, {w})")
        print(f"non-totalistic witnesses: {len(witnesses)} pairs, e.g. "
              + ", ".join(f"{a}/{b}" for a, b in witnesses[:8]))
    return EXIT_FAIL if conflicts else EXIT_OK


def cmd_build(args):
    params = dict(p.split("=", 1) for p in args.param)
    if args.structure not in STRUCTURES:
        print(f"unknown structure {args.structure!r}; known: {', '.join(STRUCTURES)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        lay = STRUCTURES[args.structure](**params)
    except TypeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except bd.BuildError as e:
        print(f"audit failure: {e}", file=sys.stderr)
        return EXIT_FAIL
    bad = bd.visibility_audit(lay)
    for p, cells in lay.paths.items():
        print(f"# path {p}: " + " ".join(f"{geo.format_addr(c)}:{lay.elements[c].kind.symbol}" for c in cells))
    sys.stdout.write(lay.dump())
    for b in bad:
        print(f"audit: {b}", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


def _load(args):
    try:
        return read_scenario(args.scenario)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return None


def cmd_run(args):
    sc = _load(args)
    if sc is None:
        return EXIT_USAGE
    try:
        run = run_scenario(sc)
    except engine.LookupMiss as e:
        print(f"lookup miss: {e}", file=sys.stderr)
        for a, nb in e.report.neighborhoods.items():
            print(f"  {geo.format_addr(a)} neighbours {''.join(nb)}", file=sys.stderr)
        return EXIT_FAIL
    except bd.BuildError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    lines = golden_lines(run)
    if args.write:
        Path(args.write).write_text("\n".join(lines) + "\n")
    if args.golden:
        d = first_divergence(lines, Path(args.golden).read_text())
        if d:
            g, a, b = d
            print(f"diverges from {args.golden} at generation {g}: got {a!r}, expected {b!r}")
            return EXIT_FAIL
        print(f"{sc.name}: {sc.steps} generations match {args.golden}; max neighbour sum {run.max_sum}")
        return EXIT_OK
    if not args.write:
        for g in range(len(run.configs)):
            fr = " ".join(f"{p}={f}" for p, f in run.frames(g).items())
            m = run.reports[g - 1].max_neighbor_sum if g else 0
            print(f"{g} max={m} {fr}".rstrip())
    print(f"# max neighbour sum {run.max_sum}", file=sys.stderr)
    return EXIT_OK


def cmd_render(args):
    sc = _load(args)
    if sc is None:
        return EXIT_USAGE
    if not 0 <= args.generation <= sc.steps:
        print(f"generation must be in 0..{sc.steps}", file=sys.stderr)
        return EXIT_USAGE
    sc.steps = args.generation
    try:
        center = geo.parse_tile(args.center)
        svg = render_svg(run_scenario(sc).configs[-1], center, args.radius,
                         f"{sc.name} generation {args.generation}")
    except (UsageError, geo.AddressError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        Path(args.output).write_text(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def cmd_simulate_circuit(args):
    try:
        c, blocks = rw.parse_circuit(Path(args.circuit).read_text())
    except (OSError, rw.CircuitError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        c.run(args.max_steps)
    except rw.CircuitError as e:
        for line in c.trace_lines():
            print(line)
        print(f"circuit failure: {e}", file=sys.stderr)
        return EXIT_FAIL
    for line in c.trace_lines():
        print(line)
    for cid, s in c.snapshot().items():
        print(f"# state {cid} {s}")
    for name, b in blocks.items():
        if hasattr(b, "bit"):
            print(f"# bit {name} {b.bit}")
    return EXIT_OK


def cmd_simulate_machine(args):
    try:
        text = Path(args.program).read_text() if Path(args.program).exists() else mc.SAMPLES[args.program]
        p = mc.parse_program(text)
        inputs = tuple(int(x) for x in args.inputs.split(",")) if args.inputs else ()
        if any(x < 0 for x in inputs):
            raise ValueError("inputs are non-negative")
    except (KeyError, ValueError, mc.ProgramError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    oracle = mc.interpret(p, inputs, args.budget)
    if not args.cosim:
        for s in oracle.states:
            print(f"{s.steps} {s.pc} {','.join(map(str, s.registers))}")
        print("halted" if oracle.halted else "budget exhausted")
        return EXIT_OK
    v = mc.cosimulate(p, inputs, args.budget)
    for s in v.circuit.states:
        print(f"{s.steps} {s.pc} {','.join(map(str, s.registers))}")
    print(f"verdict: {v.describe()}")
    return EXIT_OK if v.equal else EXIT_FAIL


def make_parser():
    ap = argparse.ArgumentParser(prog="dodecagrid", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-rules", help="audit a rule table")
    p.add_argument("--table", help="rule file (default: shipped table)")
    p.add_argument("--name", default="rules.txt", help="shipped table: rules.txt or rules_erratum.txt")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_rules)

    p = sub.add_parser("build", help="build a structure and print its idle layout")
    p.add_argument("structure")
    p.add_argument("param", nargs="*", help="key=value")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("run", help="run a scenario")
    p.add_argument("scenario", help="scenario file or shipped scenario name")
    p.add_argument("--golden", help="compare with a golden trace")
    p.add_argument("--write", help="write the golden trace to this file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("render", help="SVG of a scenario generation")
    p.add_argument("scenario")
    p.add_argument("--generation", type=int, default=0)
    p.add_argument("--center", default="0")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("simulate-circuit", help="run a railway circuit description")
    p.add_argument("circuit")
    p.add_argument("--max-steps", type=int, default=100000)
    p.set_defaults(func=cmd_simulate_circuit)

    p = sub.add_parser("simulate-machine", help="run a register machine program")
    p.add_argument("--program", required=True, help="program file or sample name")
    p.add_argument("--inputs", default="")
    p.add_argument("--budget", type=int, default=10000)
    p.add_argument("--cosim", action="store_true", help="also run the compiled circuit and compare")
    p.set_defaults(func=cmd_simulate_machine)
    return ap


def main(argv=None):
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
