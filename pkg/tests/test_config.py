import math

import pytest

from qcdma.config import ConfigError, parse_config

GOOD = """\
[user1]
v_s = 100
v_0 = 1
[user2]
v_s = 100
[channel]
alpha_db_per_km = 0.25
distance_km = 10
w = 1
sigma = 1
[chaos]
m1 = 0.01
m2 = 0.01
[model]
beta = 1.0
"""


def test_parse_and_build_params():
    cfg = parse_config(GOOD, source="good.cfg")
    p = cfg.to_params()
    assert p.user1.v_a == 101.0
    assert p.user2.v_0 == 1.0  # defaulted
    assert p.m1 == 0.01
    assert p.channel.eta_value == pytest.approx(10 ** -0.25)
    assert p.psi_mode == "paper_literal"
    assert cfg.warnings == []


def test_distance_override():
    cfg = parse_config(GOOD)
    assert cfg.to_params(distance_km=0.0).channel.eta_value == 1.0


def test_comments_and_blank_lines():
    cfg = parse_config("# leading\n\n[user1]\nv_s = 5  # trailing\n")
    assert cfg.get("user1", "v_s") == 5.0


def test_unknown_key_reports_line_number():
    bad = "[user1]\nv_s = 1\nvs_typo = 2\n"
    with pytest.raises(ConfigError, match=r"bad\.cfg:3: unknown key 'vs_typo'"):
        parse_config(bad, source="bad.cfg")


def test_unknown_section_reports_line_number():
    with pytest.raises(ConfigError, match=r":1: unknown section \[nope\]"):
        parse_config("[nope]\nx = 1\n")


def test_key_outside_section():
    with pytest.raises(ConfigError, match="outside"):
        parse_config("v_s = 1\n")


def test_bad_number_reports_key():
    with pytest.raises(ConfigError, match=r":2: .*'v_s'"):
        parse_config("[user1]\nv_s = banana\n")


def test_missing_required_key_names_it():
    cfg = parse_config("[user1]\nv_s = 1\n[channel]\neta = 0.5\n")
    with pytest.raises(ConfigError, match=r"missing required key 'v_s'.*user2"):
        cfg.to_params()


def test_missing_channel_definition():
    cfg = parse_config("[user1]\nv_s = 1\n[user2]\nv_s = 1\n")
    with pytest.raises(ConfigError, match="eta or both"):
        cfg.to_params()


def test_eta_wins_with_warning():
    text = GOOD + "[channel]\n"  # would duplicate; build manually instead
    cfg = parse_config(
        "[user1]\nv_s = 1\n[user2]\nv_s = 1\n"
        "[channel]\nalpha_db_per_km = 0.25\ndistance_km = 40\neta = 0.7\n"
    )
    assert cfg.warnings and "eta takes precedence" in cfg.warnings[0]
    assert cfg.to_params().channel.eta_value == 0.7


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("[user1]\nv_s = 1\nv_s = 2\n")


def test_psd_keys_build_correction_factors():
    s0 = math.log(100.0) / (0.9 * math.pi)
    cfg = parse_config(
        "[user1]\nv_s = 1\n[user2]\nv_s = 1\n[channel]\neta = 0.5\n"
        f"[chaos]\npsd_omega_low = 1\npsd_omega_high = 10\npsd_density = {s0}\n"
    )
    p = cfg.to_params()
    assert p.m1 == pytest.approx(0.01, rel=1e-12)
    assert p.m1 == p.m2
    spec1, spec2 = cfg.psd_specs()
    assert spec1.omega_high == 10.0
    assert spec1 is spec2


def test_psd_and_m_keys_conflict():
    cfg = parse_config(
        "[user1]\nv_s = 1\n[user2]\nv_s = 1\n[channel]\neta = 0.5\n"
        "[chaos]\nm1 = 0.5\npsd_density = 1.0\npsd_omega_low = 1\npsd_omega_high = 10\n"
    )
    with pytest.raises(ConfigError, match="not both"):
        cfg.to_params()


def test_tuned_bands_from_m_values():
    cfg = parse_config(GOOD)
    spec1, spec2 = cfg.psd_specs()
    from qcdma.chaos import correction_factor_from_psd

    assert correction_factor_from_psd(spec1).m == pytest.approx(0.01, rel=1e-12)


def test_fixed_gamma_rule():
    cfg = parse_config(
        "[user1]\nv_s = 1\n[user2]\nv_s = 1\n[channel]\neta = 0.5\n"
        "[model]\ngamma_rule = fixed\ngamma = 50\ngamma0 = 2\n"
    )
    p = cfg.to_params()
    assert p.interference(1) == (50.0, 2.0)


def test_invalid_mode_strings():
    cfg = parse_config(
        "[user1]\nv_s = 1\n[user2]\nv_s = 1\n[channel]\neta = 0.5\n"
        "[model]\npsi_mode = upside_down\n"
    )
    with pytest.raises(ConfigError, match="psi_mode"):
        cfg.to_params()


def test_invalid_value_surfaces_as_config_error():
    cfg = parse_config(
        "[user1]\nv_s = -5\n[user2]\nv_s = 1\n[channel]\neta = 0.5\n"
    )
    with pytest.raises(ConfigError, match="modulation variance"):
        cfg.to_params()
