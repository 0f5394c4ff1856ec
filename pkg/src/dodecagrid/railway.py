"""Discrete-event simulation of the railway circuits.

A :class:`Circuit` is a set of primitive components joined by directed
edges (``(component, out_port) -> (component, in_port, delay)``).  Tokens
(locomotives) travel along edges; when a token reaches an input port the
component decides which output ports it leaves from: none (absorbed), one,
or two (fork).  Time advances one unit per :meth:`Circuit.des_step`.

Composite structures are built from forks, controllers and fixed switches
only, following the constructions of the switches in the cellular
automaton: the flip-flop and the memory switch change their selection by
sending toggle locomotives to their controllers.  Those toggles race with
the main locomotive, so every composite declares which pending arrivals
must not overlap, and the simulator raises :class:`RaceError` if they do.
"""
from __future__ import annotations

import heapq
import itertools
from collections import Counter
from dataclasses import dataclass, field


class CircuitError(RuntimeError):
    pass


class DanglingPort(CircuitError):
    pass


class Collision(CircuitError):
    pass


class RaceError(CircuitError):
    pass


class InvariantError(CircuitError):
    pass


# -- primitive components -------------------------------------------------------

class Component:
    kind = "component"
    inputs: tuple = ()
    outputs: tuple = ()

    def __init__(self, cid):
        self.id = cid
        # input port -> ports (cid, port) that must have no pending token
        # when a token arrives there
        self.guards = {}

    def receive(self, port, circuit):
        raise NotImplementedError

    def state(self):
        return None

    def set_state(self, value):
        if value is not None:
            raise CircuitError(f"{self.id} has no state")

    def check_input(self, port):
        if port not in self.inputs:
            raise DanglingPort(f"{self.id} ({self.kind}) has no input port {port!r}")

    def __repr__(self):
        return f"{type(self).__name__}({self.id!r})"


class Relay(Component):
    """Pass-through used to name gates and paths."""
    kind = "relay"
    inputs = ("in",)
    outputs = ("out",)

    def receive(self, port, circuit):
        return ["out"]


class Fixed(Component):
    """Passive fixed switch: from b or c to a."""
    kind = "fixed"
    inputs = ("b", "c")
    outputs = ("a",)

    def receive(self, port, circuit):
        return ["a"]


class Fork(Component):
    kind = "fork"
    inputs = ("a",)
    outputs = ("b", "c")

    def receive(self, port, circuit):
        return ["b", "c"]


class Controller(Component):
    """Lets a locomotive through when permissive, kills it when blocking;
    a locomotive on ``toggle`` exchanges the two modes and vanishes."""
    kind = "controller"
    inputs = ("in", "toggle")
    outputs = ("out",)

    def __init__(self, cid, permissive=True):
        super().__init__(cid)
        self.permissive = bool(permissive)
        self.guards["toggle"] = [(cid, "in")]

    def receive(self, port, circuit):
        if port == "toggle":
            self.permissive = not self.permissive
            return []
        return ["out"] if self.permissive else []

    def state(self):
        return "permissive" if self.permissive else "blocking"

    def set_state(self, value):
        if value not in ("permissive", "blocking"):
            raise CircuitError(f"bad controller mode {value!r}")
        self.permissive = value == "permissive"


class _Selecting(Component):
    def __init__(self, cid, selected=0):
        super().__init__(cid)
        if selected not in (0, 1):
            raise CircuitError("selection is 0 (track b) or 1 (track c)")
        self.selected = selected

    def state(self):
        return self.selected

    def set_state(self, value):
        if value not in (0, 1):
            raise CircuitError(f"bad selection {value!r}")
        self.selected = value


class FlipFlop(_Selecting):
    """Active only: a to the selected track, then the other one."""
    kind = "flipflop"
    inputs = ("a",)
    outputs = ("b", "c")

    def receive(self, port, circuit):
        out = "bc"[self.selected]
        self.selected ^= 1
        return [out]


class MemoryActive(_Selecting):
    kind = "memory_active"
    inputs = ("a",)
    outputs = ("b", "c")

    def receive(self, port, circuit):
        return ["bc"[self.selected]]


class MemoryPassive(_Selecting):
    """Passive half: a passage through the non-selected track selects it
    here and in the active half ``partner``."""
    kind = "memory_passive"
    inputs = ("b", "c")
    outputs = ("a",)

    def __init__(self, cid, selected=0, partner=None):
        super().__init__(cid, selected)
        self.partner = partner

    def receive(self, port, circuit):
        side = "bc".index(port)
        if side != self.selected:
            self.selected = side
            if self.partner is not None:
                circuit.components[self.partner].selected = side
        return ["a"]


class Crossing(Component):
    kind = "crossing"
    inputs = ("a1", "a2")
    outputs = ("b1", "b2")

    def receive(self, port, circuit):
        return ["b" + port[1]]


class Terminal(Component):
    """Absorbs and records arrivals."""
    kind = "terminal"
    inputs = ("in",)

    def __init__(self, cid):
        super().__init__(cid)
        self.arrivals = []

    def receive(self, port, circuit):
        self.arrivals.append(circuit.time)
        return []


class Station(Component):
    """Program label: records arrivals and holds the locomotive until the
    driver releases it with :meth:`Circuit.emit`."""
    kind = "station"
    outputs = ("out",)

    def __init__(self, cid, label=None):
        super().__init__(cid)
        self.label = cid if label is None else label
        self.arrivals = []

    def check_input(self, port):
        pass

    def receive(self, port, circuit):
        self.arrivals.append(circuit.time)
        circuit.held.append(self.id)
        return []


class Extender(Relay):
    """Relay which calls ``hook`` on its first arrival."""
    kind = "extender"
    inputs = ("I", "D")
    outputs = ("I", "D")

    def __init__(self, cid, hook=None):
        super().__init__(cid)
        self.hook = hook

    def receive(self, port, circuit):
        if self.hook is not None:
            hook, self.hook = self.hook, None
            hook()
        return [port]


PRIMITIVES = {c.kind: c for c in (Relay, Fixed, Fork, Controller, FlipFlop, MemoryActive,
                                   MemoryPassive, Crossing, Terminal, Station)}


# -- circuit --------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    time: int
    token: int
    component: str
    port: str

    def __str__(self):
        return f"{self.time} {self.token} {self.component}.{self.port}"


class Circuit:
    def __init__(self):
        self.components = {}
        self.edges = {}
        self.time = 0
        self.log = []
        self.keep_log = True
        self.held = []
        self.absorbed = 0
        self.spawned = 0
        self._pending = []
        self._targets = Counter()
        self._ids = itertools.count(1)
        self._seq = itertools.count()

    # -- construction
    def add(self, comp):
        if comp.id in self.components:
            raise CircuitError(f"duplicate component {comp.id}")
        self.components[comp.id] = comp
        return comp

    def connect(self, src, dst, delay=1):
        (s, sp), (d, dp) = src, dst
        if sp not in self.components[s].outputs:
            raise DanglingPort(f"{s} has no output port {sp!r}")
        self.components[d].check_input(dp)
        if delay < 1:
            raise CircuitError("edge delays are at least 1")
        if (s, sp) in self.edges:
            raise CircuitError(f"output {s}.{sp} already connected")
        self.edges[(s, sp)] = (d, dp, delay)

    # -- tokens
    @property
    def pending(self):
        return len(self._pending)

    @property
    def quiet(self):
        return not self._pending

    def inject(self, dst, delay=1):
        """New locomotive arriving at ``dst`` after ``delay`` steps."""
        d, p = dst
        self.components[d].check_input(p)
        tok = next(self._ids)
        self._push(self.time + delay, d, p, tok)
        return tok

    def emit(self, cid, port="out", token=None):
        """Send a locomotive out of ``cid.port`` now."""
        if (cid, port) not in self.edges:
            raise DanglingPort(f"{cid}.{port} is not connected")
        d, p, delay = self.edges[(cid, port)]
        tok = next(self._ids) if token is None else token
        self._push(self.time + delay, d, p, tok)
        return tok

    def _push(self, t, d, p, tok):
        heapq.heappush(self._pending, (t, d, p, next(self._seq), tok))
        self._targets[(d, p)] += 1

    def pending_to(self, cid, port):
        return self._targets[(cid, port)]

    def des_step(self):
        """Advance time by one unit and process the arrivals due."""
        self.time += 1
        now, pending, targets = self.time, self._pending, self._targets
        due = []
        while pending and pending[0][0] <= now:
            t, d, p, _, tok = heapq.heappop(pending)
            targets[(d, p)] -= 1
            due.append((d, p, tok))
        if len(due) > 1 and len({(d, p) for d, p, _ in due}) < len(due):
            raise Collision(f"two locomotives reach one port at time {now}: {due}")
        comps, edges = self.components, self.edges
        for d, p, tok in due:
            comp = comps[d]
            if comp.guards:
                for g in comp.guards.get(p, ()):
                    if targets[g]:
                        raise RaceError(f"at time {now} a locomotive reaches {d}.{p} "
                                        f"while another is still on its way to {g[0]}.{g[1]}")
            if self.keep_log:
                self.log.append(Event(now, tok, d, p))
            outs = comp.receive(p, self)
            if not outs:
                self.absorbed += 1
            for i, o in enumerate(outs):
                e = edges.get((d, o))
                if e is None:
                    raise DanglingPort(f"{d}.{o} is not connected (time {now})")
                if i:
                    tok = next(self._ids)
                    self.spawned += 1
                dd, dp, delay = e
                heapq.heappush(pending, (now + delay, dd, dp, next(self._seq), tok))
                targets[(dd, dp)] += 1
        return due

    def run(self, max_steps=100000):
        """Step until no locomotive is moving; returns the time elapsed.
        Steps in which nothing arrives are skipped over."""
        start = self.time
        while self._pending:
            if self.time - start >= max_steps:
                raise CircuitError(f"still running after {max_steps} steps")
            self.time = max(self.time, self._pending[0][0] - 1)
            self.des_step()
        return self.time - start

    def snapshot(self, ids=None):
        ids = self.components if ids is None else ids
        return {i: self.components[i].state() for i in ids
                if self.components[i].state() is not None}

    def trace_lines(self):
        return [str(e) for e in self.log]


# -- composite blocks -------------------------------------------------------------

@dataclass
class Block:
    """Named group of components with external gates."""
    name: str
    circuit: Circuit
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    parts: list = field(default_factory=list)
    exempt: set = field(default_factory=set)

    def add(self, comp):
        self.circuit.add(comp)
        self.parts.append(comp.id)
        return comp

    def child(self, block):
        self.parts.extend(block.parts)
        self.exempt |= block.exempt
        return block

    def gate(self, name):
        if name in self.inputs:
            return self.inputs[name]
        if name in self.outputs:
            return self.outputs[name]
        raise KeyError(f"{self.name} has no gate {name!r}")

    def state(self):
        return self.circuit.snapshot(self.parts)

    def idle_diff(self, reference):
        """Components whose state differs from ``reference``, exemptions
        left out."""
        now = self.state()
        return sorted(k for k in now if now[k] != reference.get(k) and k not in self.exempt)


def _wire(c, src, dst, delay=1):
    c.connect(src, dst, delay)


# Edge delays inside the composites.  A toggle takes the long way so that
# it reaches the controllers after the locomotive they are about to route.
TOGGLE_DELAY = 3
NOTIFY_DELAY = 2


class FlipFlopSwitch(Block):
    """Fork C sends the locomotive towards L and to fork A; A sends it to
    R and to fork S, which toggles both controllers.  The track leaving
    the permissive controller is the selected one."""

    @property
    def selected(self):
        L = self.circuit.components[self.ids["L"]]
        R = self.circuit.components[self.ids["R"]]
        if L.permissive == R.permissive:
            raise InvariantError(f"{self.name}: both controllers {L.state()}")
        return 0 if L.permissive else 1

    def set_selected(self, s):
        self.circuit.components[self.ids["L"]].permissive = s == 0
        self.circuit.components[self.ids["R"]].permissive = s == 1


def build_flipflop_switch(circuit=None, name="flipflop", selected=0) -> FlipFlopSwitch:
    c = circuit or Circuit()
    b = FlipFlopSwitch(name, c)
    n = lambda x: f"{name}.{x}"
    C, A, S = (b.add(Fork(n(x))) for x in "CAS")
    L = b.add(Controller(n("L"), selected == 0))
    R = b.add(Controller(n("R"), selected == 1))
    _wire(c, (C.id, "b"), (L.id, "in"))
    _wire(c, (C.id, "c"), (A.id, "a"))
    _wire(c, (A.id, "b"), (R.id, "in"))
    _wire(c, (A.id, "c"), (S.id, "a"), TOGGLE_DELAY)
    _wire(c, (S.id, "b"), (L.id, "toggle"), TOGGLE_DELAY)
    _wire(c, (S.id, "c"), (R.id, "toggle"), TOGGLE_DELAY)
    C.guards["a"] = [(S.id, "a"), (L.id, "toggle"), (R.id, "toggle")]
    b.ids = {"C": C.id, "A": A.id, "S": S.id, "L": L.id, "R": R.id}
    b.inputs = {"a": (C.id, "a")}
    b.outputs = {"b": (L.id, "out"), "c": (R.id, "out")}
    return b


class MemorySwitch(Block):
    """Active half: fork C and controllers L, R.  Passive half: forks P
    and Q feeding the fixed switch F and the controllers L2, R2; a
    locomotive let through by L2 or R2 reaches fork U by the fixed switch
    T, and U toggles both halves through the forks S (active) and S2
    (passive).  Selection s: the active controller on side s and the
    passive controller on the other side are permissive."""

    def _ctrl(self, k):
        return self.circuit.components[self.ids[k]]

    @property
    def selected(self):
        L, R, L2, R2 = (self._ctrl(k) for k in ("L", "R", "L2", "R2"))
        if L.permissive == R.permissive or L2.permissive == R2.permissive:
            raise InvariantError(f"{self.name}: controllers of one half agree")
        act = 0 if L.permissive else 1
        pas = 0 if R2.permissive else 1
        if act != pas:
            raise InvariantError(f"{self.name}: halves select {act} and {pas}")
        return act

    def set_selected(self, s):
        self._ctrl("L").permissive = s == 0
        self._ctrl("R").permissive = s == 1
        self._ctrl("L2").permissive = s == 1
        self._ctrl("R2").permissive = s == 0


def build_memory_switch(circuit=None, name="memory", selected=0) -> MemorySwitch:
    c = circuit or Circuit()
    b = MemorySwitch(name, c)
    n = lambda x: f"{name}.{x}"
    C = b.add(Fork(n("C")))
    L = b.add(Controller(n("L"), selected == 0))
    R = b.add(Controller(n("R"), selected == 1))
    S = b.add(Fork(n("S")))
    P, Q, U, S2 = (b.add(Fork(n(x))) for x in ("P", "Q", "U", "S2"))
    F, T = b.add(Fixed(n("F"))), b.add(Fixed(n("T")))
    L2 = b.add(Controller(n("L2"), selected == 1))
    R2 = b.add(Controller(n("R2"), selected == 0))
    _wire(c, (C.id, "b"), (L.id, "in"))
    _wire(c, (C.id, "c"), (R.id, "in"))
    _wire(c, (S.id, "b"), (L.id, "toggle"))
    _wire(c, (S.id, "c"), (R.id, "toggle"))
    _wire(c, (P.id, "b"), (F.id, "b"))
    _wire(c, (P.id, "c"), (L2.id, "in"))
    _wire(c, (Q.id, "b"), (F.id, "c"))
    _wire(c, (Q.id, "c"), (R2.id, "in"))
    _wire(c, (L2.id, "out"), (T.id, "b"))
    _wire(c, (R2.id, "out"), (T.id, "c"))
    _wire(c, (T.id, "a"), (U.id, "a"))
    _wire(c, (U.id, "b"), (S.id, "a"), NOTIFY_DELAY)
    _wire(c, (U.id, "c"), (S2.id, "a"))
    _wire(c, (S2.id, "b"), (L2.id, "toggle"), TOGGLE_DELAY)
    _wire(c, (S2.id, "c"), (R2.id, "toggle"), TOGGLE_DELAY)
    C.guards["a"] = [(S.id, "a"), (L.id, "toggle"), (R.id, "toggle"), (U.id, "a"), (T.id, "b"),
                     (T.id, "c"), (L2.id, "in"), (R2.id, "in")]
    for x in (P, Q):
        x.guards["a"] = [(S2.id, "a"), (L2.id, "toggle"), (R2.id, "toggle")]
    b.ids = {"C": C.id, "L": L.id, "R": R.id, "S": S.id, "P": P.id, "Q": Q.id, "U": U.id,
             "S2": S2.id, "F": F.id, "T": T.id, "L2": L2.id, "R2": R2.id}
    b.inputs = {"a": (C.id, "a"), "pb": (P.id, "a"), "pc": (Q.id, "a")}
    b.outputs = {"b": (L.id, "out"), "c": (R.id, "out"), "pa": (F.id, "a")}
    return b


class OneBitMemory(Block):
    @property
    def bit(self):
        w = self.flipflop.selected
        r = self.memory.selected
        if w != r:
            raise InvariantError(f"{self.name}: flip-flop selects {w}, memory switch {r}")
        return w

    def set_bit(self, bit):
        self.flipflop.set_selected(bit)
        self.memory.set_selected(bit)


def build_one_bit_memory(circuit=None, name="bit", bit=0) -> OneBitMemory:
    """Gates W, R (inputs) and E, b0, b1 (outputs).  The flip-flop at W
    sends the locomotive to the passive half of the memory switch at E by
    the track of the opposite symbol; the active half sits at R."""
    c = circuit or Circuit()
    b = OneBitMemory(name, c)
    gates = {g: b.add(Relay(f"{name}.{g}")) for g in ("W", "R", "E", "b0", "b1")}
    b.flipflop = b.child(build_flipflop_switch(c, f"{name}.ffW", bit))
    b.memory = b.child(build_memory_switch(c, f"{name}.msR", bit))
    ff, ms = b.flipflop, b.memory
    _wire(c, (gates["W"].id, "out"), ff.inputs["a"])
    _wire(c, ff.outputs["b"], ms.inputs["pc"])
    _wire(c, ff.outputs["c"], ms.inputs["pb"])
    _wire(c, ms.outputs["pa"], (gates["E"].id, "in"))
    _wire(c, (gates["R"].id, "out"), ms.inputs["a"])
    _wire(c, ms.outputs["b"], (gates["b0"].id, "in"))
    _wire(c, ms.outputs["c"], (gates["b1"].id, "in"))
    b.inputs = {"W": (gates["W"].id, "in"), "R": (gates["R"].id, "in")}
    b.outputs = {g: (gates[g].id, "out") for g in ("E", "b0", "b1")}
    return b


# -- dispatch structures ------------------------------------------------------------

def _merge(b, cid):
    return b.add(Fixed(cid))


def _fault(b, cid):
    return b.add(Terminal(cid))


class DI(Block):
    """Remembers which incrementing instruction is running."""

    def bits(self):
        return [m.bit for m in self.memories]


def build_DI(circuit=None, name="DI", units=1) -> DI:
    """Unit k: gate ``in<k>`` (from the program) to the W-gate of its
    memory; the memory's E-gate reaches the flip-flop A<k>, which first
    sends to the register (output ``reg``) and then to ``prog<k>``.
    Input ``ret`` scans the memories through their R-gates: b0 leads to
    the next unit, b1 back to the W-gate of the same memory."""
    if units < 1:
        raise CircuitError("at least one unit")
    c = circuit or Circuit()
    b = DI(name, c)
    ret = b.add(Relay(f"{name}.ret"))
    fault = _fault(b, f"{name}.fault")
    b.memories, b.switches = [], []
    regs = [_merge(b, f"{name}.reg{k}") for k in range(units)]
    for k in range(units):
        entry = b.add(Relay(f"{name}.in{k}"))
        wm = _merge(b, f"{name}.w{k}")
        m = b.child(build_one_bit_memory(c, f"{name}.m{k}"))
        a = b.child(build_flipflop_switch(c, f"{name}.A{k}", 0))
        prog = b.add(Relay(f"{name}.prog{k}"))
        _wire(c, (entry.id, "out"), (wm.id, "b"))
        _wire(c, (wm.id, "a"), m.inputs["W"])
        _wire(c, m.outputs["b1"], (wm.id, "c"))
        _wire(c, m.outputs["E"], a.inputs["a"])
        _wire(c, a.outputs["b"], (regs[k].id, "b"))
        _wire(c, a.outputs["c"], (prog.id, "in"))
        b.inputs[f"in{k}"] = (entry.id, "in")
        b.outputs[f"prog{k}"] = (prog.id, "out")
        b.memories.append(m)
        b.switches.append(a)
    for k in range(units - 1):
        _wire(c, (regs[k + 1].id, "a"), (regs[k].id, "c"))
    _wire(c, (ret.id, "out"), b.memories[0].inputs["R"])
    for k in range(units):
        nxt = b.memories[k + 1].inputs["R"] if k + 1 < units else (fault.id, "in")
        _wire(c, b.memories[k].outputs["b0"], nxt)
    b.inputs["ret"] = (ret.id, "in")
    b.outputs["reg"] = (regs[0].id, "a")
    b.fault = fault
    return b


class DD(Block):
    """Remembers which decrementing instruction is running."""

    def bits(self):
        return [(d.bit, z.bit) for d, z in zip(self.dmem, self.zmem)]


def _dz_core(b, c, name, entry_src=None):
    """D- and Z-memory, flip-flop F and memory switch A shared by the
    units of D_D and by D_O.  Returns the pieces; the W-gate merge takes
    the entry on ``b`` and the passive memory switch output on ``c``."""
    wm = _merge(b, f"{name}.w")
    d = b.child(build_one_bit_memory(c, f"{name}.D"))
    z = b.child(build_one_bit_memory(c, f"{name}.Z"))
    f = b.child(build_flipflop_switch(c, f"{name}.F", 0))
    a = b.child(build_memory_switch(c, f"{name}.A", 0))
    b.exempt |= set(a.parts)
    # delay on the e-track: the notification from P must reach A first
    _wire(c, (wm.id, "a"), d.inputs["W"])
    _wire(c, d.outputs["E"], z.inputs["W"])                  # disc c
    _wire(c, z.outputs["E"], f.inputs["a"])                  # disc d
    _wire(c, f.outputs["c"], a.inputs["a"])
    _wire(c, d.outputs["b1"], a.inputs["pb"])                # disc a
    _wire(c, z.outputs["b1"], a.inputs["pc"])                # disc b
    _wire(c, a.outputs["pa"], (wm.id, "c"))                  # disc e
    return wm, d, z, f, a


def build_DD(circuit=None, name="DD", units=1) -> DD:
    """Unit k: gate ``in<k>`` to the W-gate of the D-memory, then the
    Z-memory, then flip-flop F<k>, first to the register side (output
    ``reg``), later to the memory switch A<k> whose tracks lead to
    ``succ<k>`` and ``zero<k>``.  Inputs ``dret`` and ``zret`` scan the
    D- and Z-memories."""
    if units < 1:
        raise CircuitError("at least one unit")
    c = circuit or Circuit()
    b = DD(name, c)
    dret, zret = b.add(Relay(f"{name}.dret")), b.add(Relay(f"{name}.zret"))
    fault = _fault(b, f"{name}.fault")
    regs = [_merge(b, f"{name}.reg{k}") for k in range(units)]
    b.dmem, b.zmem, b.flips, b.switches = [], [], [], []
    for k in range(units):
        entry = b.add(Relay(f"{name}.in{k}"))
        wm, d, z, f, a = _dz_core(b, c, f"{name}.u{k}")
        succ, zero = b.add(Relay(f"{name}.succ{k}")), b.add(Relay(f"{name}.zero{k}"))
        _wire(c, (entry.id, "out"), (wm.id, "b"))
        _wire(c, f.outputs["b"], (regs[k].id, "b"))
        _wire(c, a.outputs["b"], (succ.id, "in"))
        _wire(c, a.outputs["c"], (zero.id, "in"))
        b.inputs[f"in{k}"] = (entry.id, "in")
        b.outputs[f"succ{k}"] = (succ.id, "out")
        b.outputs[f"zero{k}"] = (zero.id, "out")
        b.dmem.append(d)
        b.zmem.append(z)
        b.flips.append(f)
        b.switches.append(a)
    for k in range(units - 1):
        _wire(c, (regs[k + 1].id, "a"), (regs[k].id, "c"))
    _wire(c, (dret.id, "out"), b.dmem[0].inputs["R"])
    _wire(c, (zret.id, "out"), b.zmem[0].inputs["R"])
    for mems in (b.dmem, b.zmem):
        for k in range(units):
            nxt = mems[k + 1].inputs["R"] if k + 1 < units else (fault.id, "in")
            if k + 1 == units and mems is b.zmem:
                nxt = (_fault(b, f"{name}.zfault").id, "in")
            _wire(c, mems[k].outputs["b0"], nxt)
    b.inputs.update(dret=(dret.id, "in"), zret=(zret.id, "in"))
    b.outputs["reg"] = (regs[0].id, "a")
    return b


class DO(Block):
    """Remembers whether the register operation is a decrementation."""

    def bits(self):
        return (self.dmem.bit, self.zmem.bit)


def build_DO(circuit=None, name="DO", units=1) -> DO:
    """Input ``dec`` (from D_D) writes both memories and leaves through
    flip-flop F to ``reg``.  Input ``ret`` (register's R-path) reads the
    D-memory: 0 goes to ``inc`` (back to D_I), 1 rewrites both memories
    and leaves through the memory switch A to ``dtrack``.  Input ``zret``
    (register's Z-path) reads the Z-memory and leaves to ``ztrack``."""
    if units != 1:
        raise CircuitError("D_O has a single unit")
    c = circuit or Circuit()
    b = DO(name, c)
    dec, ret, zret = (b.add(Relay(f"{name}.{g}")) for g in ("dec", "ret", "zret"))
    inc, dtrack, ztrack, reg = (b.add(Relay(f"{name}.{g}")) for g in ("inc", "dtrack", "ztrack", "reg"))
    wm, d, z, f, a = _dz_core(b, c, f"{name}.u")
    _wire(c, (dec.id, "out"), (wm.id, "b"))
    _wire(c, f.outputs["b"], (reg.id, "in"))
    _wire(c, a.outputs["b"], (dtrack.id, "in"))
    _wire(c, a.outputs["c"], (ztrack.id, "in"))
    _wire(c, (ret.id, "out"), d.inputs["R"])
    _wire(c, d.outputs["b0"], (inc.id, "in"))                # discs f1, f2
    _wire(c, (zret.id, "out"), z.inputs["R"])
    _wire(c, z.outputs["b0"], (_fault(b, f"{name}.fault").id, "in"))
    b.dmem, b.zmem, b.flip, b.switch = d, z, f, a
    b.inputs = {"dec": (dec.id, "in"), "ret": (ret.id, "in"), "zret": (zret.id, "in")}
    b.outputs = {g: (x.id, "out") for g, x in (("inc", inc), ("dtrack", dtrack),
                                                ("ztrack", ztrack), ("reg", reg))}
    return b


# -- register ---------------------------------------------------------------------

class Register(Block):
    """Unbounded register; unit n holds an I-memory and a D-memory.  Units
    are built when a locomotive first needs them."""

    def _unit(self, n):
        c, name = self.circuit, self.name
        im = self.child(build_one_bit_memory(c, f"{name}.{n}.I"))
        dm = self.child(build_one_bit_memory(c, f"{name}.{n}.D"))
        iw = _merge(self, f"{name}.{n}.iw")
        ret = _merge(self, f"{name}.{n}.ret")
        wd = self.add(Relay(f"{name}.{n}.{'wd1' if n % 2 == 0 else 'wd2'}"))
        ext = self.add(Extender(f"{name}.{n}.next", hook=lambda: self.ensure(n + 1)))
        _wire(c, im.outputs["b0"], (iw.id, "b"))
        _wire(c, (iw.id, "a"), im.inputs["W"])
        _wire(c, im.outputs["E"], dm.inputs["W"])            # disc s
        _wire(c, dm.outputs["E"], (ret.id, "b"))
        _wire(c, im.outputs["b1"], (ext.id, "I"))
        _wire(c, dm.outputs["b1"], (ext.id, "D"))
        _wire(c, dm.outputs["b0"], (wd.id, "in"))
        if n == 0:
            _wire(c, (wd.id, "out"), (self.zgate.id, "in"))
            _wire(c, (ret.id, "a"), (self.rgate.id, "in"))
            _wire(c, (self.igate.id, "out"), im.inputs["R"])
            _wire(c, (self.dgate.id, "out"), dm.inputs["R"])
        else:
            prev = self.units[n - 1]
            _wire(c, (wd.id, "out"), (prev["iw"].id, "c"))
            _wire(c, (ret.id, "a"), (prev["ret"].id, "c"))
            _wire(c, (prev["next"].id, "I"), im.inputs["R"])
            _wire(c, (prev["next"].id, "D"), dm.inputs["R"])
        self.units.append({"I": im, "D": dm, "iw": iw, "ret": ret, "wd": wd, "next": ext})

    def ensure(self, n):
        while len(self.units) <= n:
            self._unit(len(self.units))

    def bits(self):
        return [(u["I"].bit, u["D"].bit) for u in self.units]

    @property
    def content(self):
        self.check()
        return sum(1 for i, _ in self.bits() if i)

    def set_content(self, value):
        if value < 0:
            raise ValueError("register contents are non-negative")
        self.ensure(value)
        for n, u in enumerate(self.units):
            u["I"].set_bit(int(n < value))
            u["D"].set_bit(int(n < value))

    def check(self):
        """Both memories of a unit agree and the 1s form a prefix."""
        bits = self.bits()
        for n, (i, d) in enumerate(bits):
            if i != d:
                raise InvariantError(f"{self.name} unit {n}: bits {i} and {d}")
        ones = [i for i, _ in bits]
        if ones != sorted(ones, reverse=True):
            raise InvariantError(f"{self.name}: bits {ones} are not a prefix of 1s")


def build_register(circuit=None, name="reg", content=0) -> Register:
    """Gates I (increment) and D (decrement) in; R (return) and Z (empty)
    out.  The I-path reads I-memories until a 0, then writes both bits of
    that unit.  The D-path reads D-memories until a 0 at unit c; the wd
    path of that unit (wd1 at even c, wd2 at odd c) writes both bits of
    unit c-1, or leaves through Z when c = 0."""
    c = circuit or Circuit()
    b = Register(name, c)
    b.igate, b.dgate = b.add(Relay(f"{name}.I")), b.add(Relay(f"{name}.D"))
    b.rgate, b.zgate = b.add(Relay(f"{name}.R")), b.add(Relay(f"{name}.Z"))
    b.units = []
    b.ensure(0)
    b.set_content(content)
    b.inputs = {"I": (b.igate.id, "in"), "D": (b.dgate.id, "in")}
    b.outputs = {"R": (b.rgate.id, "out"), "Z": (b.zgate.id, "out")}
    return b


# -- standalone drivers ---------------------------------------------------------------

def _terminals(b, gates):
    out = {}
    for g in gates:
        t = b.circuit.add(Terminal(f"{b.name}.out.{g}"))
        _wire(b.circuit, b.outputs[g], (t.id, "in"))
        out[g] = t
    return out


def _exit(terms):
    hit = [g for g, t in terms.items() if t.arrivals]
    for t in terms.values():
        t.arrivals.clear()
    if len(hit) != 1:
        raise CircuitError(f"locomotive left through {hit or 'no gate'}")
    return hit[0]


class MemoryDriver:
    """One-bit memory with terminals on its output gates."""

    def __init__(self, bit=0):
        self.block = build_one_bit_memory(Circuit(), "bit", bit)
        self.block.circuit.keep_log = False
        self.terms = _terminals(self.block, ("E", "b0", "b1"))

    def enter(self, gate):
        c = self.block.circuit
        c.inject(self.block.inputs[gate])
        c.run()
        return _exit(self.terms)

    def read(self):
        return self.enter("R")

    def write(self):
        return self.enter("W")

    @property
    def bit(self):
        return self.block.bit


class RegisterDriver:
    """Register with terminals on R and Z; records the wd path used."""

    def __init__(self, content=0, keep_log=False):
        self.block = build_register(Circuit(), "reg", content)
        self.block.circuit.keep_log = keep_log
        self.terms = _terminals(self.block, ("R", "Z"))

    @property
    def content(self):
        return self.block.content

    def _go(self, gate):
        c = self.block.circuit
        c.inject(self.block.inputs[gate])
        used = []
        while not c.quiet:
            c.time = max(c.time, c._pending[0][0] - 1)
            for d, p, tok in c.des_step():
                if d.endswith((".wd1", ".wd2")):
                    used.append(d.rsplit(".", 1)[1])
        self.block.check()
        return _exit(self.terms), used

    def increment(self):
        tag, _ = self._go("I")
        return tag

    def decrement(self):
        """Exit gate ("R" or "Z") and the wd paths used."""
        return self._go("D")


def register_increment(r: RegisterDriver):
    return r.increment()


def register_decrement(r: RegisterDriver):
    return r.decrement()


# -- circuit description files ----------------------------------------------------------

BLOCKS = {
    "flipflop_switch": build_flipflop_switch,
    "memory_switch": build_memory_switch,
    "one_bit_memory": build_one_bit_memory,
    "register": build_register,
    "DI": build_DI,
    "DD": build_DD,
    "DO": build_DO,
}


def _value(v):
    if v in ("true", "false"):
        return v == "true"
    try:
        return int(v)
    except ValueError:
        return v


def parse_circuit(text):
    """Build a circuit from a description::

        component <id> <kind> [key=value ...]
        block <id> <kind> [key=value ...]
        edge <src>.<port> <dst>.<port> [delay]
        token <dst>.<port> [delay]

    Block gates are addressed as ``<block id>.<gate>``."""
    c = Circuit()
    blocks = {}
    tokens = []

    def ref(s, out):
        cid, _, port = s.rpartition(".")
        if cid in blocks:
            return blocks[cid].gate(port)
        if cid not in c.components:
            raise CircuitError(f"unknown component {cid!r}")
        return cid, port

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        try:
            op, args = line[0], line[1:]
            if op in ("component", "block"):
                cid, kind = args[0], args[1]
                kw = dict(a.split("=", 1) for a in args[2:])
                kw = {k: _value(v) for k, v in kw.items()}
                if op == "component":
                    if kind not in PRIMITIVES:
                        raise CircuitError(f"unknown component kind {kind!r}")
                    c.add(PRIMITIVES[kind](cid, **kw))
                else:
                    if kind not in BLOCKS:
                        raise CircuitError(f"unknown block kind {kind!r}")
                    blocks[cid] = BLOCKS[kind](c, cid, **kw)
            elif op == "edge":
                delay = int(args[2]) if len(args) > 2 else 1
                c.connect(ref(args[0], True), ref(args[1], False), delay)
            elif op == "token":
                tokens.append((ref(args[0], False), int(args[1]) if len(args) > 1 else 1))
            else:
                raise CircuitError(f"unknown directive {op!r}")
        except (IndexError, ValueError, TypeError) as e:
            raise CircuitError(f"line {lineno}: {e}") from None
        except CircuitError as e:
            raise CircuitError(f"line {lineno}: {e}") from None
    for dst, delay in tokens:
        c.inject(dst, delay)
    return c, blocks
