"""Optical generation suppresses the oscillation.

Adds a uniform optical generation rate at an in-island point and follows the
phase class and A/gamma of the current as the rate grows.
"""
from pinosc.cli_io import RunConfig, simulate_point
from pinosc.cli_io.config import GRSection

cfg = RunConfig()
print(f"{'g_opt (cm^-3/s)':>16}  {'class':>7}  {'A/gamma':>10}  {'f0 (MHz)':>9}")
for g in (0.0, 1e20, 3e20, 1e21, 2e21, 3e21, 1e22):
    gr = GRSection.from_mapping({**cfg.gr.as_dict(), "optical_generation": g})
    m = simulate_point(cfg.with_overrides(gr=gr), 8.6, 8.0).metrics
    print(f"{g:16.1e}  {m.phase_class:>7}  {m.strength:10.3e}  {m.peak_frequency / 1e6:9.3f}")
