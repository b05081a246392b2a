import numpy as np
import pytest

from radgas.diagnostics import lp_norm
from radgas.elliptic import HalfLineGrid
from radgas.flux_model import RiemannData, flux_by_name
from radgas.hopf_cole import wtilde_table
from radgas.profiles import (
    exact_rarefaction,
    fan_core_mask,
    modified_profile,
    profile_property_suite,
    profile_w_table,
    residuals_R1_R2,
    riemann_wstates,
    smooth_profile_w,
    suite_grid,
)


@pytest.fixture
def grid():
    return HalfLineGrid.from_length(1025, 120.0)


def test_rarefaction_fan_value(burgers, data_zero):
    assert exact_rarefaction(burgers, data_zero, 0.5, 1.0) == pytest.approx(0.5)


def test_rarefaction_right_state(burgers, data_zero):
    assert exact_rarefaction(burgers, data_zero, 2.0, 1.0) == pytest.approx(1.0)


def test_rarefaction_left_state(burgers):
    data = RiemannData.create(burgers, 0.25, 1.0)
    assert exact_rarefaction(burgers, data, 0.1, 1.0) == pytest.approx(0.25)


def test_rarefaction_requires_positive_time(burgers, data_zero):
    with pytest.raises(ValueError):
        exact_rarefaction(burgers, data_zero, 1.0, 0.0)


def test_rarefaction_continuous_and_bounded(burgers, data_positive):
    x = np.linspace(0.0, 50.0, 2001)
    r = exact_rarefaction(burgers, data_positive, x, 30.0)
    assert np.all(r >= data_positive.u_minus - 1e-14)
    assert np.all(r <= data_positive.u_plus + 1e-14)
    assert np.max(np.abs(np.diff(r))) <= 2.0 * (x[1] - x[0]) / 30.0


def test_burgers_profile_equals_wtilde(burgers, data_positive):
    # f' is the identity, so w and wtilde coincide at every order
    x = np.linspace(0.0, 30.0, 301)
    t = 7.0
    wm, wp = riemann_wstates(burgers, data_positive)
    T_w = profile_w_table(burgers, data_positive, x, t, order=3)
    T_wt = wtilde_table(wm, wp, x, t, order=3)
    for kl in T_w:
        assert np.max(np.abs(T_w[kl] - T_wt[kl])) <= 1e-12


def test_profile_gradient_positive(quartic):
    data = RiemannData.create(quartic, 0.5, 1.0)
    grid = HalfLineGrid.from_length(2049, 150.0)
    for t in (1.0, 10.0, 100.0):
        b = modified_profile(quartic, data, grid, t, order=2)
        core = fan_core_mask(quartic, data, grid, t)
        assert b.w[(1, 0)][core].min() > 0.0
        assert b.w[(1, 0)].min() >= 0.0


def test_profile_gradient_is_wtilde_over_fpp(quartic):
    data = RiemannData.create(quartic, 0.5, 1.0)
    x = np.linspace(0.0, 40.0, 401)
    T = profile_w_table(quartic, data, x, 5.0, order=1)
    wm, wp = riemann_wstates(quartic, data)
    Twt = wtilde_table(wm, wp, x, 5.0, order=1)
    expect = Twt[(1, 0)] / quartic.fpp(T[(0, 0)])
    assert np.max(np.abs(T[(1, 0)] - expect)) <= 1e-12


def test_profile_derivative_richardson_order(quartic):
    # central differences of w converge to the analytic w_x at order >= 1.9
    data = RiemannData.create(quartic, 0.5, 1.0)
    x, t = 1.0, 1.0
    wx = smooth_profile_w(quartic, data, x, t, k=1)
    errs = []
    for h in (0.08, 0.04):
        fd = (smooth_profile_w(quartic, data, x + h, t)
              - smooth_profile_w(quartic, data, x - h, t)) / (2 * h)
        errs.append(abs(fd - wx))
    assert np.log2(errs[0] / errs[1]) >= 1.9


def test_boundary_pinned_exactly(quartic, grid):
    data = RiemannData.create(quartic, 0.5, 1.0)
    for t in (1.0, 5.0, 50.0):
        b = modified_profile(quartic, data, grid, t)
        assert b.u_tilde[0] - data.u_minus == 0.0
        assert b.q_tilde_x[0] == 0.0


def test_boundary_gap_small_and_decaying(burgers, grid):
    data = RiemannData.create(burgers, 0.5, 1.0)
    gaps = [modified_profile(burgers, data, grid, t, order=2).boundary["gap"]
            for t in (1.0, 10.0, 40.0, 100.0)]
    assert all(0.0 <= g <= data.delta for g in gaps)
    assert gaps[-1] < gaps[0] * 1e-2


def test_correction_layer_bound(quartic, grid):
    data = RiemannData.create(quartic, 0.5, 1.0)
    b = modified_profile(quartic, data, grid, 3.0, order=2)
    gap = b.boundary["gap"]
    assert np.all(np.abs(b.u_tilde - b.w[(0, 0)]) <= gap * np.exp(-grid.x) + 1e-300)


def test_zero_regime_has_no_corrections(quartic, grid):
    data = RiemannData.create(quartic, 0.0, 1.0)
    b = modified_profile(quartic, data, grid, 5.0)
    assert np.all(b.u_hat == 0.0) and np.all(b.q_hat == 0.0)
    assert abs(b.boundary["w0"]) <= 1e-14
    assert b.u_tilde[0] == 0.0


def test_burgers_zero_regime_r1_vanishes(burgers, grid, data_zero):
    R1, _ = residuals_R1_R2(burgers, data_zero, grid, 5.0)
    assert np.max(np.abs(R1)) <= 1e-15


def test_zero_regime_r2_is_third_derivative(quartic, grid):
    data = RiemannData.create(quartic, 0.0, 1.0)
    b = modified_profile(quartic, data, grid, 5.0)
    assert np.max(np.abs(b.R2 + b.w[(3, 0)])) <= 1e-14


def test_modified_profile_equation_residual(quartic, grid):
    # u_tilde_t + f(u_tilde)_x - u_tilde_xx must balance the correction
    # terms and the curvature source exactly (analytic identity)
    data = RiemannData.create(quartic, 0.5, 1.0)
    b = modified_profile(quartic, data, grid, 4.0)
    flux = quartic
    w0v, w1 = b.w[(0, 0)], b.w[(1, 0)]
    ex = np.exp(-grid.x)
    gap, wt0 = b.boundary["gap"], b.boundary["wt0"]
    u_hat_t = wt0 * ex
    u_tilde_x = b.u_tilde_x
    u_tilde_xx = b.w[(2, 0)] - gap * ex
    lhs = b.u_tilde_t + flux.fp(b.u_tilde) * u_tilde_x - u_tilde_xx
    rhs = (gap * ex - u_hat_t
           - (flux.fp(w0v) * w1 - flux.fp(b.u_tilde) * u_tilde_x)
           + (flux.f3(w0v) / flux.fpp(w0v)) * w1 * w1)
    assert np.max(np.abs(lhs - rhs)) <= 1e-8


def test_residual_decay_rates(quartic):
    data = RiemannData.create(quartic, 0.5, 1.0)
    times = np.geomspace(5.0, 200.0, 9)
    grid = suite_grid(quartic, data, 200.0)
    r1 = [lp_norm(modified_profile(quartic, data, grid, t, order=3).R1, grid.h, 1.0)
          for t in times]
    from radgas.diagnostics import fit_decay

    fit = fit_decay(times, np.array(r1), "R1_L1", (5.0, 200.0),
                    paper_exponent=-1.0, band=0.25)
    assert fit.passed


def test_property_suite_passes(burgers):
    data = RiemannData.create(burgers, 0.0, 1.5)
    times = np.geomspace(2.0, 120.0, 9)
    report = profile_property_suite(burgers, data, times)
    assert report["pass"], [c for c in report["checks"] if not c["pass"]]
    assert report["monotone_wx"]["pass"]
    assert report["boundary_gap"]["pass"]


def test_property_suite_positive_regime(burgers):
    data = RiemannData.create(burgers, 0.3, 1.5)
    times = np.geomspace(2.0, 120.0, 9)
    report = profile_property_suite(burgers, data, times)
    assert report["monotone_wx"]["pass"]
    assert report["boundary_gap"]["fitted_exp_rate"] < 0.0


def test_property_suite_needs_enough_times(burgers, data_zero):
    with pytest.raises(ValueError):
        profile_property_suite(burgers, data_zero, [1.0, 2.0, 3.0])
