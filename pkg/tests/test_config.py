import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdd2d.config import (
    ConfigError,
    Mode,
    NetworkConfig,
    SCENARIO_MODES,
    Scenario,
    config_field_names,
    dbm_to_watts,
    load_config,
    parse_config_text,
    watts_to_dbm,
)

# frozen derived constants at the default parameter set
R_BAR = 668.7403049764221
O_P = 0.011761980531389113


def test_defaults():
    cfg = NetworkConfig()
    assert cfg.lambda_bs == 1e-5
    assert cfg.lambda_c == 1e-4
    assert cfg.lambda_d == 1e-4
    assert cfg.p_u == 0.2
    assert cfg.rho_min == 1e-12
    assert cfg.rho_c == 1e-11
    assert cfg.r1 == cfg.r2 == cfg.t_d == 0.2
    assert cfg.eta_c == cfg.eta_d == 4.0
    assert cfg.omega == 1.0
    assert cfg.zeta == 0.0
    assert cfg.sigma2 == 1e-12


def test_derived_constants():
    d = NetworkConfig().derived()
    assert d.rho_d == pytest.approx(5e-11, rel=1e-12)
    assert d.rho_e == pytest.approx(2.5e-10, rel=1e-12)
    assert d.r_bar == pytest.approx(R_BAR, rel=1e-12)
    assert d.o_p == pytest.approx(O_P, rel=1e-12)


def test_scenario_modes():
    assert SCENARIO_MODES[Scenario.FD] == (Mode.CELLULAR, Mode.F_D2D, Mode.R_D2D)
    assert SCENARIO_MODES[Scenario.HD] == (Mode.CELLULAR, Mode.F_D2D)
    assert SCENARIO_MODES[Scenario.TRADITIONAL] == (Mode.CELLULAR,)


@given(w=st.floats(min_value=1e-15, max_value=1e3))
@settings(max_examples=100, deadline=None)
def test_dbm_round_trip(w):
    assert dbm_to_watts(watts_to_dbm(w)) == pytest.approx(w, rel=1e-12)


def test_dbm_known_points():
    assert dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-12)
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
    assert watts_to_dbm(0.2) == pytest.approx(23.0102999566, rel=1e-10)


def test_parse_config_text_full():
    text = """
    # densities in per-km2
    lambda_bs_per_km2 = 10
    lambda_c_per_km2 = 100
    lambda_d_per_km2 = 100
    p_u_dbm = 23.0102999566398
    rho_min_dbm = -90
    rho_c_dbm = -80
    r1 = 0.2
    r2 = 0.2
    t_d = 0.2
    eta_c = 4
    eta_d = 4
    omega = 1
    zeta = 0
    sigma2_dbm = -90
    """
    cfg = parse_config_text(text)
    assert cfg.lambda_bs == pytest.approx(1e-5, rel=1e-12)
    assert cfg.lambda_c == pytest.approx(1e-4, rel=1e-12)
    assert cfg.p_u == pytest.approx(0.2, rel=1e-10)
    assert cfg.rho_c == pytest.approx(1e-11, rel=1e-10)
    assert cfg.sigma2 == pytest.approx(1e-12, rel=1e-10)


def test_parse_config_partial_keeps_defaults():
    cfg = parse_config_text("t_d = 1.5\n")
    assert cfg.t_d == 1.5
    assert cfg.r1 == 0.2
    assert cfg.lambda_bs == 1e-5


def test_parse_config_rejects_unknown_key():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("t_d = 1\nno_such_thing = 3\n")


def test_parse_config_rejects_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("t_d = 1\nt_d = 2\n")


def test_parse_config_rejects_bad_syntax():
    with pytest.raises(ConfigError):
        parse_config_text("t_d 0.2\n")
    with pytest.raises(ConfigError):
        parse_config_text("t_d = abc\n")


def test_load_config(tmp_path):
    p = tmp_path / "net.cfg"
    p.write_text("omega = 0.5\n")
    assert load_config(str(p)).omega == 0.5


def test_validation_errors():
    with pytest.raises(ConfigError):
        NetworkConfig(eta_c=2.0)  # needs eta > 2
    with pytest.raises(ConfigError):
        NetworkConfig(eta_d=1.5)
    with pytest.raises(ConfigError):
        NetworkConfig(omega=2.0)  # pair-distance PDF needs omega < 2
    with pytest.raises(ConfigError):
        NetworkConfig(omega=-0.1)
    with pytest.raises(ConfigError):
        NetworkConfig(zeta=1.5)
    with pytest.raises(ConfigError):
        NetworkConfig(t_d=-0.1)
    with pytest.raises(ConfigError):
        NetworkConfig(p_u=0.0)
    with pytest.raises(ConfigError):
        NetworkConfig(rho_c=0.3, p_u=0.2)  # inversion target above power cap
    with pytest.raises(ConfigError):
        NetworkConfig(rho_min=1e-10, rho_c=1e-11)
    with pytest.raises(ConfigError):
        NetworkConfig(lambda_c=1e-6, lambda_bs=1e-5)


def test_sparse_ue_density_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        NetworkConfig(lambda_c=2e-5)
    assert any("lambda_c" in str(w.message) for w in caught)


def test_config_field_names_cover_file_keys():
    names = config_field_names()
    assert "lambda_bs" in names and "sigma2" in names
    assert len(names) == 14


def test_t_d_zero_allowed():
    cfg = NetworkConfig(t_d=0.0)
    assert cfg.t_d == 0.0


def test_frozen():
    cfg = NetworkConfig()
    with pytest.raises(AttributeError):
        cfg.t_d = 0.3
