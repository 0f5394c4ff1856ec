"""Register machines: parser, interpreter and compiler to railway circuits.

Program text, one instruction per line (``#`` starts a comment)::

    L: INC r J        add 1 to register r, go to J
    L: DEC r J K      if r > 0 subtract 1 and go to J, else go to K
    L: HALT

The first instruction is the start.  Registers are numbered from 0 and
may be written ``r0``, ``R0`` or ``0``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import railway as rw


class ProgramError(ValueError):
    pass


@dataclass(frozen=True)
class Inc:
    register: int
    next: str


@dataclass(frozen=True)
class Dec:
    register: int
    on_success: str
    on_zero: str


@dataclass(frozen=True)
class Halt:
    pass


@dataclass
class Program:
    instructions: dict
    start: str

    @property
    def registers(self):
        regs = [i.register for i in self.instructions.values() if not isinstance(i, Halt)]
        return max(regs) + 1 if regs else 0

    def validate(self):
        if self.start not in self.instructions:
            raise ProgramError(f"start label {self.start!r} undefined")
        for label, ins in self.instructions.items():
            targets = {Inc: lambda i: [i.next], Dec: lambda i: [i.on_success, i.on_zero],
                       Halt: lambda i: []}[type(ins)](ins)
            for t in targets:
                if t not in self.instructions:
                    raise ProgramError(f"{label}: jump to undefined label {t!r}")
        return self


_LINE = re.compile(r"^\s*([A-Za-z_][\w]*)\s*:\s*(.*)$")


def _reg(tok):
    m = re.fullmatch(r"[rR]?(\d+)", tok)
    if not m:
        raise ProgramError(f"bad register {tok!r}")
    return int(m.group(1))


def parse_program(text: str) -> Program:
    instructions, start = {}, None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ProgramError(f"line {lineno}: expected 'label: instruction'")
        label, rest = m.group(1), m.group(2).split()
        if label in instructions:
            raise ProgramError(f"line {lineno}: duplicate label {label!r}")
        op = rest[0].upper() if rest else ""
        try:
            if op == "INC" and len(rest) == 3:
                ins = Inc(_reg(rest[1]), rest[2])
            elif op == "DEC" and len(rest) == 4:
                ins = Dec(_reg(rest[1]), rest[2], rest[3])
            elif op == "HALT" and len(rest) == 1:
                ins = Halt()
            else:
                raise ProgramError(f"cannot parse {' '.join(rest)!r}")
        except ProgramError as e:
            raise ProgramError(f"line {lineno}: {e}") from None
        instructions[label] = ins
        start = start or label
    if start is None:
        raise ProgramError("empty program")
    return Program(instructions, start).validate()


@dataclass(frozen=True)
class MachineState:
    pc: str
    registers: tuple
    steps: int


@dataclass
class Trace:
    states: list
    halted: bool

    @property
    def final(self):
        return self.states[-1]

    def pairs(self):
        return [(s.pc, s.registers) for s in self.states]


def _inputs(p, inputs):
    regs = list(inputs or ())
    if any(v < 0 for v in regs):
        raise ProgramError("register inputs are non-negative")
    return regs + [0] * max(0, p.registers - len(regs))


def interpret(p: Program, inputs=(), max_steps=10000) -> Trace:
    regs = _inputs(p, inputs)
    pc, steps = p.start, 0
    states = [MachineState(pc, tuple(regs), 0)]
    while not isinstance(p.instructions[pc], Halt) and steps < max_steps:
        ins = p.instructions[pc]
        if isinstance(ins, Inc):
            regs[ins.register] += 1
            pc = ins.next
        elif regs[ins.register] > 0:
            regs[ins.register] -= 1
            pc = ins.on_success
        else:
            pc = ins.on_zero
        steps += 1
        states.append(MachineState(pc, tuple(regs), steps))
    return Trace(states, isinstance(p.instructions[pc], Halt))


# -- compilation -----------------------------------------------------------------

@dataclass
class CompiledMachine:
    program: Program
    circuit: rw.Circuit
    stations: dict
    registers: list
    DI: dict = field(default_factory=dict)
    DD: dict = field(default_factory=dict)
    DO: dict = field(default_factory=dict)
    idle: dict = field(default_factory=dict)

    def dispatch_blocks(self):
        for kind in ("DI", "DD", "DO"):
            for r, b in sorted(getattr(self, kind).items()):
                yield f"{kind}[{r}]", b

    def contents(self):
        return tuple(r.content for r in self.registers)

    def audit(self):
        """Names of dispatch components away from their idle state (switch
        A of D_D and D_O exempted) and register invariant failures."""
        bad = []
        for name, b in self.dispatch_blocks():
            bad += [f"{name}:{x}" for x in b.idle_diff(self.idle[name])]
        for r in self.registers:
            try:
                r.check()
            except rw.InvariantError as e:
                bad.append(str(e))
        return bad

    def unit_counts(self):
        return {f"{k}[{r}]": len(getattr(b, "memories", None) or getattr(b, "dmem", []))
                for k in ("DI", "DD") for r, b in getattr(self, k).items()}

    def reachable_labels(self):
        """Labels whose station can be reached from the start station by
        following edges."""
        succ = {}
        for (s, _), (d, _, _) in self.circuit.edges.items():
            succ.setdefault(s, set()).add(d)
        # blocks route through internal components; follow everything
        start = self.stations[self.program.start].id
        seen, todo = {start}, [start]
        while todo:
            for n in succ.get(todo.pop(), ()):
                if n not in seen:
                    seen.add(n)
                    todo.append(n)
        return {lab for lab, st in self.stations.items() if st.id in seen}


def compile(p: Program, inputs=()) -> CompiledMachine:
    """One register (with its D_I, D_D and D_O) per register used; one D_I
    unit per INC and one D_D unit per DEC on that register."""
    p.validate()
    regs = _inputs(p, inputs)
    c = rw.Circuit()
    stations = {lab: c.add(rw.Station(f"L.{lab}", lab)) for lab in p.instructions}
    cm = CompiledMachine(p, c, stations, [])
    incs = {r: [] for r in range(len(regs))}
    decs = {r: [] for r in range(len(regs))}
    for lab, ins in p.instructions.items():
        if isinstance(ins, Inc):
            incs[ins.register].append(lab)
        elif isinstance(ins, Dec):
            decs[ins.register].append(lab)

    def fault(name):
        t = c.add(rw.Terminal(name))
        return (t.id, "in")

    def to_station(src, lab, tag):
        c.connect(src, (stations[lab].id, tag))

    for r, value in enumerate(regs):
        reg = rw.build_register(c, f"r{r}", value)
        cm.registers.append(reg)
        if not incs[r] and not decs[r]:
            continue
        do = cm.DO[r] = rw.build_DO(c, f"DO{r}")
        c.connect(reg.outputs["R"], do.inputs["ret"])
        c.connect(reg.outputs["Z"], do.inputs["zret"])
        c.connect(do.outputs["reg"], reg.inputs["D"])
        if incs[r]:
            di = cm.DI[r] = rw.build_DI(c, f"DI{r}", len(incs[r]))
            c.connect(di.outputs["reg"], reg.inputs["I"])
            c.connect(do.outputs["inc"], di.inputs["ret"])
            for k, lab in enumerate(incs[r]):
                c.connect((stations[lab].id, "out"), di.inputs[f"in{k}"])
                to_station(di.outputs[f"prog{k}"], p.instructions[lab].next, f"from.{lab}")
        else:
            c.connect(do.outputs["inc"], fault(f"DO{r}.no_inc"))
        if decs[r]:
            dd = cm.DD[r] = rw.build_DD(c, f"DD{r}", len(decs[r]))
            c.connect(dd.outputs["reg"], do.inputs["dec"])
            c.connect(do.outputs["dtrack"], dd.inputs["dret"])
            c.connect(do.outputs["ztrack"], dd.inputs["zret"])
            for k, lab in enumerate(decs[r]):
                ins = p.instructions[lab]
                c.connect((stations[lab].id, "out"), dd.inputs[f"in{k}"])
                to_station(dd.outputs[f"succ{k}"], ins.on_success, f"from.{lab}.succ")
                to_station(dd.outputs[f"zero{k}"], ins.on_zero, f"from.{lab}.zero")
        else:
            c.connect(do.outputs["dtrack"], fault(f"DO{r}.no_dec"))
            c.connect(do.outputs["ztrack"], fault(f"DO{r}.no_zdec"))
    cm.idle = {name: b.state() for name, b in cm.dispatch_blocks()}
    return cm


@dataclass
class CircuitRun:
    trace: Trace
    events: int
    time: int
    audits: list


def run_compiled(cm: CompiledMachine, budget=10000, max_steps=10 ** 6, keep_log=False) -> CircuitRun:
    """Drive the single program locomotive; every station arrival is one
    completed instruction.  Between two instructions the circuit is run
    until no toggle locomotive is left, then audited."""
    c, p = cm.circuit, cm.program
    c.keep_log = keep_log
    c.inject((cm.stations[p.start].id, "start"))
    states, audits, events = [], [], 0
    while True:
        c.run(max_steps)
        if len(c.held) != 1:
            raise rw.CircuitError(f"expected one locomotive at a station, found {c.held}")
        sid = c.held.pop()
        label = c.components[sid].label
        audits.append(cm.audit())
        states.append(MachineState(label, cm.contents(), len(states)))
        if isinstance(p.instructions[label], Halt) or len(states) > budget:
            break
        c.emit(sid, "out")
    return CircuitRun(Trace(states, isinstance(p.instructions[label], Halt)),
                      len(c.log), c.time, audits)


@dataclass
class Verdict:
    equal: bool
    divergence: int | None
    oracle: Trace
    circuit: Trace
    audits_clean: bool

    def describe(self):
        if self.equal:
            return f"equal ({len(self.oracle.states) - 1} instructions)"
        i = self.divergence
        o = self.oracle.states[i] if i < len(self.oracle.states) else None
        k = self.circuit.states[i] if i < len(self.circuit.states) else None
        return f"diverge at step {i}: oracle {o}, circuit {k}"


def cosimulate(p: Program, inputs=(), budget=10000) -> Verdict:
    oracle = interpret(p, inputs, budget)
    cm = compile(p, inputs)
    run = run_compiled(cm, budget)
    a, b = oracle.pairs(), run.trace.pairs()
    div = next((i for i, (x, y) in enumerate(zip(a, b)) if x != y), None)
    if div is None and len(a) != len(b):
        div = min(len(a), len(b))
    clean = all(not x for x in run.audits)
    return Verdict(div is None and clean, div, oracle, run.trace, clean)


# -- sample programs ---------------------------------------------------------------

ADDITION = """\
# r0 := r0 + r1, r1 := 0
loop: DEC r1 add done
add:  INC r0 loop
done: HALT
"""

SUBTRACTION = """\
# r0 := r0 - r1 when r0 >= r1; otherwise r2 := 1 flags the underflow
sub:  DEC r1 take done
take: DEC r0 sub neg
neg:  INC r2 done
done: HALT
"""

MAXIMUM = """\
# r2 := max(r0, r1), r0 and r1 emptied
m0:  DEC r0 m1 t1
m1:  DEC r1 m2 t0p
m2:  INC r2 m0
t0p: INC r2 t0
t0:  DEC r0 t0i h
t0i: INC r2 t0
t1:  DEC r1 t1i h
t1i: INC r2 t1
h:   HALT
"""

SAMPLES = {"addition": ADDITION, "subtraction": SUBTRACTION, "max": MAXIMUM}
