"""
Zero-dimensional simulator and analysis toolkit for generation-recombination
oscillations in a cryogenic P-I-N diode with an embedded defect ensemble.

Subpackages
-----------
carrier_statistics   static carrier physics (ionization, field, drift current)
gr_dynamics          rate equations, integrator, equilibria and Hopf boundary
protocols            drive programs, emission readout, photon counts, IV sweeps
analysis             spectra, line and decay fits, classification, phase maps
cli_io               configuration, data files, sweep harness, CLI
"""
__version__ = "0.1.0"
