import io

import numpy as np
import pytest

from radgas.diagnostics import (
    DecayFit,
    FitRefusedError,
    NormSeries,
    check_2d_decay,
    check_l1_growth,
    check_monotonicity_and_signs,
    decompose_perturbations,
    fit_decay,
    field_norms,
    grad_fields_2d,
    lp_norm,
    lp_norm_2d,
)
from radgas.elliptic import HalfLineGrid, HalfPlaneGrid
from radgas.flux_model import RiemannData
from radgas.profiles import modified_profile

# frozen OLS slope of log((1+t)^-1/2 log^3(2+t)) on log(1+t),
# 24 log-spaced samples on [10, 1000]; computed with numpy lstsq
LOG3_SYNTHETIC_SLOPE = 0.16631961583273


def test_zero_field_norms():
    assert lp_norm(np.zeros(100), 0.1, 1.0) == 0.0
    assert lp_norm(np.zeros(100), 0.1, np.inf) == 0.0


def test_exponential_closed_form_norms():
    g = HalfLineGrid.from_length(40001, 40.0)
    f = np.exp(-g.x)
    assert lp_norm(f, g.h, 1.0) == pytest.approx(1.0, abs=1e-6)
    assert lp_norm(f, g.h, 2.0) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-6)
    assert lp_norm(f, g.h, np.inf) == 1.0


def test_norm_quadrature_second_order():
    errs = []
    for n in (1001, 2001):
        g = HalfLineGrid.from_length(n, 20.0)
        errs.append(abs(lp_norm(np.exp(-g.x), g.h, 1.0) - (1.0 - np.exp(-20.0))))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)


def test_gradient_norm_of_planar_field():
    g2 = HalfPlaneGrid.from_lengths(64, 10.0, 16, 4.0)
    f1d = np.sin(g2.x)
    f = np.repeat(f1d[:, None], g2.ny, axis=1)
    fx, fy = grad_fields_2d(f, g2)
    assert np.max(np.abs(fy)) == 0.0
    assert lp_norm_2d(np.hypot(fx, fy), g2, np.inf) == pytest.approx(
        np.max(np.abs(fx)))


def test_field_norms_labels():
    g = HalfLineGrid.from_length(101, 10.0)
    out = field_norms(np.ones(101), g.h, "V", max_deriv=1)
    assert set(out) == {"V_L1", "V_L2", "V_Linf", "Vx_L1", "Vx_L2", "Vx_Linf"}


def test_fit_exact_power_law():
    t = np.geomspace(1.0, 1000.0, 40)
    y = (1.0 + t) ** -0.5
    fit = fit_decay(t, y, "y", (1.0, 1000.0), paper_exponent=-0.5, band=0.01)
    assert fit.fitted_exponent == pytest.approx(-0.5, abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-10)
    assert fit.passed


def test_fit_log_cubed_synthetic():
    # the logarithmic factor dominates this window: the apparent slope is
    # positive even though the power-law part decays
    t = np.geomspace(10.0, 1000.0, 24)
    y = (1.0 + t) ** -0.5 * np.log(2.0 + t) ** 3
    fit = fit_decay(t, y, "log3", (10.0, 1000.0))
    assert fit.fitted_exponent == pytest.approx(LOG3_SYNTHETIC_SLOPE, abs=1e-9)


def test_fit_refuses_sparse_window():
    t = np.array([1.0, 2.0, 3.0, 200.0])
    with pytest.raises(FitRefusedError, match="samples"):
        fit_decay(t, np.ones_like(t), "y", (100.0, 300.0))


def test_fit_refuses_nonpositive():
    t = np.geomspace(1.0, 100.0, 10)
    y = np.ones_like(t)
    y[4] = 0.0
    with pytest.raises(FitRefusedError, match="nonpositive"):
        fit_decay(t, y, "y", (1.0, 100.0))


def test_decay_fit_record_roundtrip():
    fit = DecayFit("V", (1.0, 10.0), -0.5, 0.1, 0.99, -0.5, 0.2, 8)
    rec = fit.to_record()
    assert rec["pass"] and rec["label"] == "V"


def test_norm_series_ordering_and_csv():
    s = NormSeries()
    s.add(0.0, {"a": 1.0})
    s.add(1.0, {"a": 0.5})
    with pytest.raises(ValueError):
        s.add(0.5, {"a": 0.1})
    buf = io.StringIO()
    s.write_csv(buf)
    assert buf.getvalue().splitlines()[0] == "t,a"


def test_norm_series_rejects_negative():
    s = NormSeries()
    with pytest.raises(ValueError):
        s.add(0.0, {"a": -1.0})


def test_decompose_trivial(burgers, data_positive):
    grid = HalfLineGrid.from_length(257, 60.0)
    b = modified_profile(burgers, data_positive, grid, 2.0)
    V, P = decompose_perturbations(b.u_tilde, b.q_tilde, b)
    assert np.max(np.abs(V)) == 0.0 and np.max(np.abs(P)) == 0.0
    with pytest.raises(ValueError, match="grids"):
        decompose_perturbations(np.zeros(99), np.zeros(99), b)


def test_monotonicity_record_cases():
    h = 0.1
    U = np.full(64, 0.5)
    rec = check_monotonicity_and_signs(U, np.zeros(64), h)
    assert rec["pass"] and rec["min_Ux"] == 0.0

    U = np.tanh(np.linspace(-3, 3, 64))
    rec = check_monotonicity_and_signs(U, -np.ones(64), h)
    assert rec["pass"]

    U = np.sin(np.linspace(0, 6, 64))  # hypothesis violated
    rec = check_monotonicity_and_signs(U, np.zeros(64), h, hypothesis_met=False)
    assert rec["status"] == "hypothesis-unmet"
    assert rec["pass"]


def test_l1_growth_exact_bound():
    # a series equal to the bound itself gives a constant ratio
    t = np.linspace(0.0, 100.0, 51)
    delta, C = 0.2, 1.7
    v_l1 = 0.3 + C * delta * np.log(2.0 + t)
    base_shift = C * delta * np.log(2.0)
    rec = check_l1_growth(t, v_l1 - (v_l1[0] - 0.3) + base_shift, delta)
    ratios_const = rec["C_emp"]
    assert rec["pass"]
    assert ratios_const == pytest.approx(C, rel=1e-12)


def test_l1_growth_decaying_series_passes():
    t = np.linspace(0.0, 100.0, 51)
    v_l1 = 0.3 / (1.0 + 0.1 * t)
    rec = check_l1_growth(t, v_l1, 0.2)
    assert rec["pass"] and rec["C_emp"] <= 0.0 + 1e-12


def test_l1_growth_tail_blowup_fails():
    t = np.linspace(0.0, 100.0, 51)
    v_l1 = 0.3 + 0.001 * t**1.5
    rec = check_l1_growth(t, v_l1, 0.2)
    assert not rec["pass"]


def test_2d_decay_records():
    t = np.linspace(0.0, 100.0, 101)
    series = {
        "dec": 1.0 / (1.0 + t),
        "floor": np.full_like(t, 1e-15),
        "grow": 1e-3 * (1.0 + t / 100.0),
    }
    recs = {r["label"]: r for r in check_2d_decay(t, series)}
    assert recs["dec"]["passed"] and recs["dec"]["status"] == "trend"
    assert recs["floor"]["passed"] and recs["floor"]["status"] == "at-floor"
    assert not recs["grow"]["passed"]
