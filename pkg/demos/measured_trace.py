"""Analyzing an externally recorded trace.

Writes a synthetic ringing current in the trace CSV format, reads it back as
if it came from an oscilloscope, and extracts the oscillation parameters both
from the spectrum and from a time-domain damped-cosine fit.
"""
import math
import os
import tempfile

import numpy as np

from pinosc.analysis import (
    TimeTrace, analyze_trace, fft_spectrum, fit_damped_cosine, fit_lorentzian_peak,
)
from pinosc.cli_io import read_traces_csv, write_traces_csv

f0, tau, dt = 1.5e6, 4e-6, 10e-9
t = np.arange(3000) * dt
rng = np.random.default_rng(1)
y = 2e-6 * np.exp(-t / tau) * np.cos(2 * np.pi * f0 * t) + rng.normal(0, 2e-8, t.size)

path = os.path.join(tempfile.mkdtemp(), "scope.csv")
write_traces_csv(path, [TimeTrace(0.0, dt, y, "A", "current")], {"instrument": "synthetic"})
(trace,), meta = read_traces_csv(path)
print(f"read {len(trace)} samples at {trace.dt * 1e9:.0f} ns from {path} ({meta})")

m = analyze_trace(trace)
# the default Hann taper reshapes a decaying record, so its linewidth is not 1/(pi tau)
print(f"pipeline (Hann): class {m.phase_class}, f0 {m.peak_frequency / 1e6:.4f} MHz, "
      f"gamma {m.linewidth / 1e3:.1f} kHz")

fit = fit_damped_cosine(trace, m.peak_frequency)
line = fit_lorentzian_peak(fft_spectrum(trace, 8, "rectangular"), (0.2 * f0, 3 * f0))
print(f"time domain: f {fit.f / 1e6:.4f} MHz, tau_d {fit.tau_d * 1e6:.3f} us "
      f"-> gamma = 1/(pi tau_d) = {fit.gamma / 1e3:.1f} kHz")
print(f"rectangular-window spectrum: gamma {line.gamma / 1e3:.1f} kHz "
      f"(true {1 / (math.pi * tau) / 1e3:.1f} kHz)")
