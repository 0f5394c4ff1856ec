"""Run a locomotive along a straight track and along a fixed switch, printing
one frame per generation (digits are element kinds, letters the locomotive)."""
from dodecagrid import cli

for name in ("track_motion", "switch1_right", "fork_motion"):
    run = cli.run_scenario(cli.read_scenario(name))
    print(f"== {name} (max neighbour sum {run.max_sum})")
    for g in range(len(run.configs)):
        print(f"{g:3d}  " + "  ".join(f"{p}={f}" for p, f in run.frames(g).items()))
