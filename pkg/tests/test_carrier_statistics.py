import json
import math
import os

import pytest
from hypothesis import given, settings, strategies as st

from pinosc.carrier_statistics import (
    Q, ConfigError, DeviceParams, MaterialParams, drift_current_density, field_from_bias,
    ionized_donor_fraction, mobility, occupied_donor_fraction,
)

ORACLE = os.path.join(os.path.dirname(__file__), "oracles", "ionization.json")


def _oracle_rows():
    with open(ORACLE) as fh:
        return json.load(fh)["rows"]


@pytest.mark.parametrize("row", _oracle_rows(), ids=lambda r: f"T={r['T']}")
def test_ionized_fraction_matches_high_precision_oracle(row):
    got = ionized_donor_fraction(float(row["E_d"]), float(row["T"]))
    want = float(row["fraction"])
    assert abs(got - want) <= 1e-10 * want


def test_ionized_fraction_examples():
    assert ionized_donor_fraction(0.044, 1e9) == pytest.approx(0.5, abs=1e-6)
    assert ionized_donor_fraction(0.044, 300.0) == pytest.approx(0.1542, abs=5e-4)
    low = ionized_donor_fraction(0.044, 10.0)
    assert 6.7e-23 / 1.05 <= low <= 6.7e-23 * 1.05


@pytest.mark.parametrize("E_d, T", [(0.044, 0.0), (0.044, -1.0), (0.0, 10.0), (-0.01, 10.0)])
def test_ionized_fraction_domain_errors(E_d, T):
    with pytest.raises(ValueError):
        ionized_donor_fraction(E_d, T)


def test_ionized_fraction_underflows_to_zero():
    assert ionized_donor_fraction(0.044, 1e-3) == 0.0
    assert occupied_donor_fraction(0.044, 1e-3) == 1.0


@settings(max_examples=1000, deadline=None)
@given(E_d=st.floats(1e-4, 1.0), T=st.floats(0.5, 2000.0), dT=st.floats(1e-3, 100.0))
def test_ionized_fraction_monotone_in_temperature(E_d, T, dT):
    a = ionized_donor_fraction(E_d, T)
    b = ionized_donor_fraction(E_d, T + dT)
    assert 0.0 <= a <= b <= 0.5


@settings(max_examples=300, deadline=None)
@given(E_d=st.floats(1e-4, 1.0), T=st.floats(0.5, 2000.0), dE=st.floats(1e-5, 0.5))
def test_ionized_fraction_decreasing_in_level(E_d, T, dE):
    assert ionized_donor_fraction(E_d + dE, T) <= ionized_donor_fraction(E_d, T)


@settings(max_examples=300, deadline=None)
@given(E_d=st.floats(1e-4, 1.0), T=st.floats(0.5, 2000.0))
def test_ionized_and_occupied_sum_to_one(E_d, T):
    s = ionized_donor_fraction(E_d, T) + occupied_donor_fraction(E_d, T)
    assert s == pytest.approx(1.0, abs=1e-15)


def test_field_from_bias():
    assert field_from_bias(0.0, 0.0565) == 0.0
    E = field_from_bias(7.0, 0.0565)
    assert E == pytest.approx(7.0 / 0.0565, rel=1e-15)
    assert round(E, 1) == 123.9
    assert abs(E - 1.2e2) / 1.2e2 <= 0.04
    with pytest.raises(ValueError):
        field_from_bias(7.0, 0.0)
    with pytest.raises(ValueError):
        field_from_bias(7.0, -1.0)


def test_drift_flux_examples():
    assert drift_current_density(1e10, 1e10, 1350.0, 480.0, 0.0) == (0.0, 0.0)
    charge, flux = drift_current_density(1e-3, 0.0, 1350.0, 0.0, 1.2e2)
    assert flux == pytest.approx(1.62e2, rel=1e-12)
    assert abs(flux - 1.6e2) / 1.6e2 <= 0.03
    assert charge == pytest.approx(Q * flux, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(n=st.floats(0, 1e20), mu=st.floats(1.0, 1e5), E=st.floats(-1e5, 1e5))
def test_drift_symmetric_carriers(n, mu, E):
    charge, _ = drift_current_density(n, n, mu, mu, E)
    assert charge == pytest.approx(2 * Q * mu * n * E, rel=1e-12, abs=1e-300)


def test_drift_rejects_negative_density():
    with pytest.raises(ValueError):
        drift_current_density(-1.0, 0.0, 1350.0, 480.0, 1.0)


def test_mobility_modes():
    m = MaterialParams()
    assert mobility(10.0, 0.0, m) == 1350.0
    assert mobility(300.0, 1e4, m) == 1350.0
    flat = MaterialParams(mobility_model="power-law", mobility_exponent=0.0)
    assert mobility(4.0, 0.0, flat) == 1350.0
    lin = MaterialParams(mobility_model="power-law", mobility_exponent=1.0)
    assert mobility(150.0, 0.0, lin) == pytest.approx(2700.0, rel=1e-15)
    assert mobility(1e-3, 0.0, lin) == 1e5  # clamp
    with pytest.raises(ValueError):
        mobility(0.0, 0.0, m)


def test_parameter_validation_lists_every_problem():
    with pytest.raises(ConfigError) as exc:
        MaterialParams(donor_energy=-1.0, trap_density=-5.0, mobility_model="nope")
    names = {name for name, _ in exc.value.problems}
    assert names == {"donor_energy", "trap_density", "mobility_model"}
    with pytest.raises(ConfigError):
        DeviceParams(i_region_width=0.0)
    with pytest.raises(ConfigError):
        DeviceParams(junction_area=math.nan)
