"""Why a cryogenic diode conducts so little: the base-temperature carrier estimate.

Prints the ionized donor fraction at a few temperatures, the field across the
intrinsic region and the resulting drift flux of a nearly empty band.
"""
from pinosc.carrier_statistics import (
    MaterialParams, drift_current_density, field_from_bias, ionized_donor_fraction, mobility,
)

m = MaterialParams()
for T in (4.0, 10.0, 20.0, 77.0, 300.0):
    frac = ionized_donor_fraction(m.donor_energy, T)
    print(f"T = {T:5.0f} K   ionized fraction {frac:.3e}   N_d+ = {frac * m.donor_density:.3e} cm^-3")

E = field_from_bias(7.0, 565e-4)
charge, flux = drift_current_density(1e-3, 0.0, mobility(10.0, E, m), 0.0, E)
print(f"\n7 V across 565 um: E = {E:.1f} V/cm")
print(f"n = 1e-3 cm^-3 drifting at that field: {flux:.1f} electrons/cm^2/s, {charge:.2e} A/cm^2")
