"""Drive programs, emission readout, photon counting and IV sweeps."""
from .iv import BurstNoise, IVCurve, iv_sweep, telegraph_signal
from .readout import (CountTrace, ReadoutModel, cell_rng, emission_rate, optical_generation_rate,
                      simulate_photon_counts)
from .sequences import (PulseSequence, Segment, build_dc_pl_sequence, build_pulsed_el_sequence,
                        constant_bias)

__all__ = [
    "BurstNoise", "IVCurve", "iv_sweep", "telegraph_signal", "CountTrace", "ReadoutModel",
    "cell_rng", "emission_rate", "optical_generation_rate", "simulate_photon_counts",
    "PulseSequence", "Segment", "build_dc_pl_sequence", "build_pulsed_el_sequence",
    "constant_bias",
]
