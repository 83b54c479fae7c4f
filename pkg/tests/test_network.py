import math
from dataclasses import replace

import numpy as np
import pytest

from qcdma.gaussian import symplectic_spectrum, von_neumann_entropy
from qcdma.network import (
    ChannelParams,
    QcdmaParams,
    UserParams,
    baseline_skr,
    bob_variance,
    build_eve_cm,
    conditional_variance,
    cross_covariances,
    eve_spectrum,
    holevo_bound,
    mutual_information,
    secret_key_rate,
    transmittance,
)

FIG_USER = UserParams(v_s=100.0, v_0=1.0)


def fig_params(d_km: float, m: float = 0.01, **kw) -> QcdmaParams:
    return QcdmaParams(
        user1=FIG_USER,
        user2=FIG_USER,
        channel=ChannelParams(alpha_db_per_km=0.25, distance_km=d_km, w=1.0, sigma=1.0),
        m1=m,
        m2=m,
        **kw,
    )


def random_params(rng, w_one: bool = False) -> QcdmaParams:
    mode = rng.choice(["paper_literal", "derived"])
    w = 1.0 if (w_one or mode == "paper_literal") else rng.uniform(1.0, 10.0)
    return QcdmaParams(
        user1=UserParams(rng.uniform(0.0, 200.0), rng.uniform(1.0, 2.0)),
        user2=UserParams(rng.uniform(0.0, 200.0), rng.uniform(1.0, 2.0)),
        channel=ChannelParams(
            eta=rng.uniform(1e-3, 1.0 - 1e-3), w=w, sigma=rng.uniform(1.0, 2.0)
        ),
        m1=rng.uniform(1e-3, 1.0),
        m2=rng.uniform(1e-3, 1.0),
        beta=rng.uniform(0.5, 1.0),
        psi_mode=mode,
        xi_mode=mode,
    )


def test_transmittance_exact_values():
    assert transmittance(0.25, 0.0) == 1.0
    assert transmittance(0.25, 40.0) == 0.1
    assert transmittance(0.2, 50.0) == 0.1


def test_transmittance_rejects_negative():
    with pytest.raises(ValueError):
        transmittance(-0.1, 10.0)
    with pytest.raises(ValueError):
        transmittance(0.2, -1.0)


def test_bob_variance_lossless_symmetric():
    p = QcdmaParams(
        user1=FIG_USER,
        user2=FIG_USER,
        channel=ChannelParams(eta=1.0, w=7.0, sigma=1.0),
        m1=1.0,
        m2=1.0,
    )
    # 101/4 + 0 + 101/4 + 1/2; the EPR variance drops out at eta = 1
    assert bob_variance(p, 1) == 51.0
    assert bob_variance(p, 2) == 51.0


def test_bob_variance_blocked_channel():
    p = QcdmaParams(
        user1=FIG_USER,
        user2=FIG_USER,
        channel=ChannelParams(eta=0.0, w=1.0, sigma=1.0),
        m1=1.0,
        m2=1.0,
    )
    assert bob_variance(p, 1) == 1.0


def test_conditional_variance_trivial_points():
    p = QcdmaParams(
        user1=FIG_USER,
        user2=FIG_USER,
        channel=ChannelParams(eta=1.0, w=1.0, sigma=1.0),
        m1=1.0,
        m2=1.0,
    )
    assert conditional_variance(p, 1) == 1.0
    p0 = replace(p, channel=ChannelParams(eta=0.0, w=1.0, sigma=1.0))
    assert conditional_variance(p0, 1) == 1.0


def test_conditional_never_exceeds_bob_variance():
    rng = np.random.default_rng(5)
    for _ in range(200):
        p = random_params(rng)
        for u in (1, 2):
            assert conditional_variance(p, u) <= bob_variance(p, u) + 1e-12


def test_mutual_information_trivial_ratios():
    base = QcdmaParams(
        user1=UserParams(0.0, 1.0),
        user2=UserParams(0.0, 1.0),
        channel=ChannelParams(eta=0.7, w=1.0, sigma=1.0),
        m1=1.0,
        m2=1.0,
    )
    assert mutual_information(base, 1) == 0.0
    # at eta = 1, v_s = 2 doubles the receiver variance: MI is exactly 1/2 bit
    p2 = replace(
        base,
        user1=UserParams(2.0, 1.0),
        user2=UserParams(2.0, 1.0),
        channel=ChannelParams(eta=1.0, w=1.0, sigma=1.0),
    )
    assert bob_variance(p2, 1) == 2.0 * conditional_variance(p2, 1)
    assert mutual_information(p2, 1) == 0.5


def test_eve_cm_limits():
    # lossless: pure EPR pair
    p = fig_params(0.0, m=0.01)
    cm = build_eve_cm(p)
    np.testing.assert_allclose(
        symplectic_spectrum(cm, "generic").values, (1.0, 1.0), atol=1e-9
    )
    # blocked: product state with the averaged input variance
    users = UserParams(2.0, 1.0)
    p0 = QcdmaParams(
        user1=users, user2=users, channel=ChannelParams(eta=0.0, w=2.0), m1=1.0, m2=1.0
    )
    cm0 = build_eve_cm(p0)
    np.testing.assert_allclose(cm0.block_a, 3.0 * np.eye(2))
    np.testing.assert_allclose(cm0.block_b, 2.0 * np.eye(2))
    np.testing.assert_allclose(cm0.block_d, 0.0 * np.eye(2))
    np.testing.assert_allclose(eve_spectrum(p0).values, (3.0, 2.0), rtol=1e-12)
    # vacuum ancilla: no coupling
    pw1 = replace(p0, channel=ChannelParams(eta=0.4, w=1.0))
    np.testing.assert_allclose(build_eve_cm(pw1).block_d, np.zeros((2, 2)))
    assert build_eve_cm(pw1).block_a[0, 0] == pytest.approx(0.6 * 3.0 + 0.4)


def test_eve_spectrum_closed_form_matches_generic():
    users = UserParams(2.0, 1.0)
    p = QcdmaParams(
        user1=users, user2=users, channel=ChannelParams(eta=0.5, w=2.0), m1=1.0, m2=1.0
    )
    np.testing.assert_allclose(
        eve_spectrum(p).values, (2.1374586088176875, 1.6374586088176875), rtol=1e-9
    )
    np.testing.assert_allclose(
        eve_spectrum(p).values,
        symplectic_spectrum(build_eve_cm(p), "generic").values,
        rtol=1e-9,
    )


def test_eve_spectrum_randomized_against_generic():
    rng = np.random.default_rng(17)
    for _ in range(300):
        p = random_params(rng)
        np.testing.assert_allclose(
            eve_spectrum(p).values,
            symplectic_spectrum(build_eve_cm(p), "generic").values,
            rtol=1e-9,
        )


def test_cross_covariances_vanish_at_channel_extremes():
    for eta in (0.0, 1.0):
        for mode in ("paper_literal", "derived"):
            p = replace(
                fig_params(0.0),
                channel=ChannelParams(eta=eta, w=1.0, sigma=1.0),
                xi_mode=mode,
                psi_mode=mode,
            )
            cc = cross_covariances(p, 1)
            assert cc.xi == 0.0
            assert cc.psi == 0.0


def test_cross_covariances_all_vacuum_cancellation():
    p = QcdmaParams(
        user1=UserParams(0.0, 1.0),
        user2=UserParams(0.0, 1.0),
        channel=ChannelParams(eta=0.5, w=1.0, sigma=1.0),
        m1=1.0,
        m2=1.0,
    )
    for mode in ("paper_literal", "derived"):
        cc = cross_covariances(replace(p, xi_mode=mode, psi_mode=mode), 1)
        assert cc.xi == pytest.approx(0.0, abs=1e-15)


def test_cross_covariance_modes_differ_only_in_interference_term():
    p = fig_params(10.0, m=0.01)
    lit = cross_covariances(replace(p, xi_mode="paper_literal"), 1)
    der = cross_covariances(replace(p, xi_mode="derived"), 1)
    eta = p.channel.eta_value
    root = math.sqrt(2.0 * p.m1 * eta * (1.0 - eta))
    gamma = p.user2.v_a
    expected_gap = 0.25 * root * (p.m2 - p.m2 * p.m2) * gamma
    assert der.xi - lit.xi == pytest.approx(expected_gap, rel=1e-12)


def test_psi_modes():
    p = replace(fig_params(10.0), channel=ChannelParams(0.25, 10.0, w=2.0))
    eta = p.channel.eta_value
    lit = cross_covariances(replace(p, psi_mode="paper_literal"), 1)
    der = cross_covariances(replace(p, psi_mode="derived"), 1)
    assert lit.psi == pytest.approx(math.sqrt((1 - eta) * 3.0), rel=1e-12)
    assert der.psi == pytest.approx(
        math.sqrt(p.m1 * (1 - eta) / 2.0) * math.sqrt(3.0), rel=1e-12
    )


def test_holevo_zero_at_unit_transmittance():
    for mode in ("paper_literal", "derived"):
        p = replace(fig_params(0.0), xi_mode=mode, psi_mode=mode)
        assert holevo_bound(p, 1) == 0.0
        assert holevo_bound(p, 2) == 0.0


def test_holevo_positive_when_conditioning_bites():
    p = QcdmaParams(
        user1=UserParams(50.0, 1.0),
        user2=UserParams(50.0, 1.0),
        channel=ChannelParams(eta=0.5, w=1.0, sigma=1.0),
        m1=0.5,
        m2=0.5,
    )
    cc = cross_covariances(p, 1)
    assert cc.psi == 0.0 and cc.xi != 0.0
    assert holevo_bound(p, 1) > 0.0


def test_holevo_dual_path_at_reference_point():
    p = fig_params(10.0, m=0.01)
    closed = holevo_bound(p, 1, "closed_form")
    generic = holevo_bound(p, 1, "generic")
    assert closed == pytest.approx(generic, rel=1e-9)
    assert closed == pytest.approx(0.33074395883480073, rel=1e-9)


def test_holevo_dual_path_randomized():
    rng = np.random.default_rng(31)
    for _ in range(300):
        p = random_params(rng)
        for u in (1, 2):
            a = holevo_bound(p, u, "closed_form")
            b = holevo_bound(p, u, "generic")
            assert abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def test_conditioned_spectrum_dips_below_vacuum_at_reference_point():
    # the amplitude-averaged model puts the conditioned eigenvalue below
    # the vacuum floor here; the entropy continuation keeps chi finite
    from qcdma.gaussian import homodyne_condition

    p = fig_params(10.0, m=0.01)
    cc = cross_covariances(p, 1)
    cond = homodyne_condition(build_eve_cm(p), cc.xi, cc.psi, bob_variance(p, 1))
    v3, v4 = symplectic_spectrum(cond).values
    assert v4 == pytest.approx(0.889522, abs=1e-5)
    assert v3 == pytest.approx(1.0, abs=1e-12)


def test_secret_key_rate_breakdown_consistency():
    p = fig_params(10.0, m=0.01)
    bd = secret_key_rate(p)
    for u, rate in ((1, bd.user1), (2, bd.user2)):
        assert rate.v_b == bob_variance(p, u)
        assert rate.v_b_given_a == conditional_variance(p, u)
        assert rate.i_ab == mutual_information(p, u)
        assert rate.chi == max(0.0, rate.chi_raw)
        assert rate.r == max(0.0, p.beta * rate.i_ab - rate.chi)
    assert bd.r_total == bd.user1.r + bd.user2.r
    assert bd.eta == p.channel.eta_value
    assert bd.r_baseline == baseline_skr(p.user1, p.channel, p.beta)


def test_rate_clamps_at_zero():
    p = replace(fig_params(10.0, m=0.01), beta=0.05)
    bd = secret_key_rate(p)
    assert bd.user1.chi > p.beta * bd.user1.i_ab
    assert bd.user1.r == 0.0
    assert bd.r_total == 0.0


def test_symmetric_users_have_equal_rates():
    bd = secret_key_rate(fig_params(25.0, m=0.01))
    assert bd.user1.r == bd.user2.r


def test_user_swap_symmetry_is_bit_exact():
    rng = np.random.default_rng(8)
    for _ in range(30):
        p = random_params(rng)
        bd = secret_key_rate(p)
        swapped = secret_key_rate(p.swapped())
        assert bd.user1.r == swapped.user2.r
        assert bd.user2.r == swapped.user1.r
        assert bd.user1.chi_raw == swapped.user2.chi_raw
        assert bd.user1.i_ab == swapped.user2.i_ab


def test_baseline_lossless_noiseless():
    channel = ChannelParams(eta=1.0, w=1.0, sigma=1.0)
    r = baseline_skr(FIG_USER, channel)
    assert r == pytest.approx(0.5 * math.log2(101.0), rel=1e-12)


def test_baseline_blocked_channel_is_zero():
    channel = ChannelParams(eta=0.0, w=2.0, sigma=1.0)
    assert baseline_skr(FIG_USER, channel) == 0.0


def test_baseline_monotone_in_distance():
    rates = [
        baseline_skr(FIG_USER, ChannelParams(0.25, float(d), w=1.0)) for d in range(61)
    ]
    assert all(b < a for a, b in zip(rates, rates[1:]))
    # spot-check the closed-form route against the generic eigensolver
    for d in (0.5, 7.0, 33.0, 60.0):
        ch = ChannelParams(0.25, d, w=1.0)
        assert baseline_skr(FIG_USER, ch, method="closed_form") == pytest.approx(
            baseline_skr(FIG_USER, ch, method="generic"), rel=1e-9
        )


def test_all_outputs_nonnegative_and_variances_positive():
    rng = np.random.default_rng(23)
    for _ in range(100):
        p = random_params(rng)
        bd = secret_key_rate(p)
        for rate in (bd.user1, bd.user2):
            assert rate.r >= 0.0
            assert rate.chi >= 0.0
            assert rate.v_b > 0.0
            assert rate.v_b_given_a > 0.0
        assert bd.r_total >= 0.0
        assert bd.r_baseline >= 0.0


def test_param_validation():
    with pytest.raises(ValueError):
        UserParams(-1.0, 1.0)
    with pytest.raises(ValueError):
        UserParams(1.0, 0.5)
    with pytest.raises(ValueError):
        ChannelParams(eta=1.5)
    with pytest.raises(ValueError):
        ChannelParams(w=0.5)
    with pytest.raises(ValueError):
        fig_params(10.0, m=0.0)
    with pytest.raises(ValueError):
        replace(fig_params(10.0), beta=0.0)
    with pytest.raises(ValueError):
        replace(fig_params(10.0), gamma_rule="fixed")
    with pytest.raises(ValueError):
        replace(fig_params(10.0), gamma_rule="fixed", gamma=1.0, gamma0=2.0)
    with pytest.raises(ValueError):
        replace(fig_params(10.0), xi_mode="exact")


def test_eta_precedence_over_fiber_model():
    ch = ChannelParams(alpha_db_per_km=0.25, distance_km=40.0, eta=0.7)
    assert ch.eta_value == 0.7
    assert ch.at_distance(10.0).eta_value == transmittance(0.25, 10.0)


def test_interference_rules():
    p = QcdmaParams(
        user1=UserParams(10.0, 1.0),
        user2=UserParams(30.0, 2.0),
        channel=ChannelParams(eta=0.5),
        m1=0.5,
        m2=0.25,
    )
    assert p.interference(1) == (32.0, 2.0)
    assert p.interference(2) == (11.0, 1.0)
    fixed = replace(p, gamma_rule="fixed", gamma=50.0, gamma0=3.0)
    assert fixed.interference(1) == (50.0, 3.0)
    assert fixed.interference(2) == (50.0, 3.0)
