import math

import pytest
from hypothesis import given, strategies as st

from mimo_noma_ee.config import ConfigError, SystemConfig, convert_units


def test_dbm_definition():
    assert convert_units(0, "dBm", "W") == pytest.approx(1e-3, rel=1e-15)
    assert convert_units(30, "dBm", "W") == pytest.approx(1.0, rel=1e-15)


def test_noise_density():
    # 10**((-170 - 30) / 10)
    assert convert_units(-170, "dBm/Hz", "W/Hz") == pytest.approx(1e-20, rel=1e-12)


def test_unknown_pair():
    with pytest.raises(ConfigError):
        convert_units(1.0, "dBm", "Hz")


def test_identity_unit():
    assert convert_units(3.5, "W", "W") == 3.5


@given(x=st.floats(-200, 100))
def test_db_round_trip(x):
    for a, b in [("dBm", "W"), ("dBm/Hz", "W/Hz"), ("dB", "linear")]:
        back = convert_units(convert_units(x, a, b), b, a)
        assert math.isclose(back, x, rel_tol=1e-12, abs_tol=1e-12)


@given(x=st.floats(1e-25, 1e3))
def test_linear_round_trip(x):
    back = convert_units(convert_units(x, "W", "dBm"), "dBm", "W")
    assert math.isclose(back, x, rel_tol=1e-12)


def test_defaults_follow_table():
    c = SystemConfig()
    assert (c.D, c.B, c.M, c.K, c.sigma2_dB, c.phi, c.R_T) == (500.0, 120e3, 128, 3, 10.0, 1.0, 3.0)
    assert c.N0 == pytest.approx(1e-20)
    assert c.noise_power == pytest.approx(1.2e-15)


@pytest.mark.parametrize("bad", [
    dict(K=0), dict(M=0), dict(B=0.0), dict(N0=-1.0), dict(P_T=0.0), dict(P_c=-1e-3),
    dict(R_T=-1.0), dict(epsilon=7.0), dict(epsilon=1.5), dict(d_min=250.0), dict(d_min=0.0),
])
def test_invariants_rejected(bad):
    with pytest.raises(ConfigError):
        SystemConfig(**bad)
