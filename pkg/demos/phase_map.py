"""A coarse (V, T) phase map printed as text.

Each cell runs the pulsed-EL protocol and classifies the current oscillation
during the forward pulse. Letters: S stable, d damped, . absent, ? failed.
A 10 x 6 grid takes about half a minute; the default 20 x 12 grid is what
`pinosc sweep` runs.
"""
import sys

from pinosc.analysis import max_frequency_vs_temperature
from pinosc.cli_io import RunConfig, SweepSpec, sweep

workers = int(sys.argv[1]) if len(sys.argv) > 1 else 1
cfg = RunConfig(sweep=SweepSpec(voltage_count=10, temperature_count=6))
res = sweep(cfg, workers=workers)
pm = res.phase_map
glyph = {"stable": "S", "damped": "d", "absent": ".", "missing": "?"}

print("T (K) \\ V " + " ".join(f"{V:5.2f}" for V in pm.voltages))
for T, row in zip(pm.temperatures, pm.classes):
    print(f"{T:9.2f} " + " ".join(f"{glyph[c]:>5}" for c in row))
print("\nstable island:", pm.summary()["stable_island"])
for T, f in max_frequency_vs_temperature(pm):
    print(f"  T = {T:5.2f} K   highest oscillation frequency {f / 1e6:.3f} MHz")
