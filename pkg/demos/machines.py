"""Compile the sample register machines to railway circuits and compare
every instruction step with the direct interpreter."""
import itertools
import time

from dodecagrid import machine as mc

for name, text in mc.SAMPLES.items():
    p = mc.parse_program(text)
    t = time.perf_counter()
    verdicts = [mc.cosimulate(p, ab) for ab in itertools.product(range(4), repeat=2)]
    ok = sum(v.equal for v in verdicts)
    print(f"{name:12s} {ok}/{len(verdicts)} equal  ({time.perf_counter() - t:.2f}s)")

cm = mc.compile(mc.parse_program(mc.MAXIMUM), (3, 1))
run = mc.run_compiled(cm)
print(f"max(3, 1): {len(run.trace.states) - 1} instructions, {len(cm.circuit.components)} "
      f"components, circuit time {run.time}, registers {cm.contents()}")
print("units per dispatch structure:", cm.unit_counts())
