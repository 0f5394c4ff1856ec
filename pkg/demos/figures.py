"""Write one SVG per generation of the detour motion and of the idle switch
window into demos/out/."""
from pathlib import Path

from dodecagrid import cli

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
for name in ("detour_motion", "idle_switch_window"):
    run = cli.run_scenario(cli.read_scenario(name))
    for g, c in enumerate(run.configs):
        f = out / f"{name}_{g:02d}.svg"
        f.write_text(cli.render_svg(c, radius=4, title=f"{name} generation {g}"))
    print(f"{name}: {len(run.configs)} frames in {out}")
