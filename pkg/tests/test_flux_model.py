import numpy as np
import pytest

from radgas.flux_model import (
    FluxPair,
    RiemannData,
    StateOrderingError,
    check_assumptions,
    flux_by_name,
    inverse_fprime,
    inverse_fprime_array,
    polynomial_flux,
)


def test_builtin_burgers_values(burgers):
    assert burgers.f(2.0) == 2.0
    assert burgers.fp(3.0) == 3.0
    assert burgers.fpp(0.7) == 1.0
    assert burgers.f3(0.7) == 0.0
    assert burgers.g(2.0) == 2.0


def test_quartic_derivatives(quartic):
    u = 1.3
    assert quartic.f(u) == pytest.approx(u**2 / 2 + u**4 / 12, rel=1e-15)
    assert quartic.fp(u) == pytest.approx(u + u**3 / 3, rel=1e-15)
    assert quartic.fpp(u) == pytest.approx(1 + u**2, rel=1e-15)
    assert quartic.f3(u) == pytest.approx(2 * u, rel=1e-15)
    assert quartic.f4(u) == pytest.approx(2.0, rel=1e-15)
    assert quartic.f_deriv(u, 5) == 0.0


def test_check_assumptions_pass(burgers):
    data = RiemannData.create(burgers, 0.0, 1.0)
    rep = check_assumptions(burgers, data)
    assert rep.passed
    assert rep.min_fpp == pytest.approx(1.0)


def test_reversed_ordering_rejected(burgers):
    with pytest.raises(StateOrderingError, match="f'"):
        RiemannData.create(burgers, 1.0, 0.0)


def test_negative_fprime_at_left_rejected(burgers):
    with pytest.raises(StateOrderingError, match="u_minus"):
        RiemannData.create(burgers, -0.5, 0.5)


def test_degenerate_convexity_fails():
    # f(u) = u^4 has f''(0) = 0, below any positive floor
    flux = polynomial_flux((0.0, 0.0, 0.0, 0.0, 1.0), alpha=0.1, name="u4")
    data = RiemannData(0.0, 1.0)
    rep = check_assumptions(flux, data)
    assert not rep.passed
    assert any("alpha" in msg for msg in rep.failures)


def test_unnormalized_flux_fails():
    flux = polynomial_flux((1.0, 0.5, 0.5), alpha=1.0, name="shifted")
    rep = check_assumptions(flux, RiemannData(0.0, 1.0))
    assert not rep.passed
    assert any("f(0)" in m for m in rep.failures)
    assert any("f'(0)" in m for m in rep.failures)


def test_check_assumptions_deterministic(burgers):
    data = RiemannData.create(burgers, 0.1, 0.3)
    a = check_assumptions(burgers, data, samples=129).to_json()
    b = check_assumptions(burgers, data, samples=129).to_json()
    assert a == b


def test_check_assumptions_needs_samples(burgers, data_positive):
    with pytest.raises(ValueError):
        check_assumptions(burgers, data_positive, samples=1)


def test_regime_classification(burgers):
    assert RiemannData.create(burgers, 0.0, 1.0).regime == "fprime_zero"
    assert RiemannData.create(burgers, 0.1, 1.0).regime == "fprime_positive"


def test_inverse_fprime_identity_flux(burgers):
    assert inverse_fprime(burgers, 0.5, (0.0, 1.0)) == pytest.approx(0.5, abs=1e-12)


def test_inverse_fprime_endpoint(quartic):
    up = 1.0
    xi = float(quartic.fp(up))
    assert inverse_fprime(quartic, xi, (0.0, 1.0)) == pytest.approx(up, abs=1e-10)


def test_inverse_fprime_quartic_point(quartic):
    # f'(1) = 1 + 1/3 = 4/3 by direct evaluation
    assert float(quartic.fp(1.0)) == pytest.approx(4.0 / 3.0, rel=1e-15)
    assert inverse_fprime(quartic, 4.0 / 3.0, (0.0, 2.0)) == pytest.approx(1.0, abs=1e-10)


def test_inverse_fprime_out_of_range(quartic):
    with pytest.raises(ValueError, match="outside"):
        inverse_fprime(quartic, 10.0, (0.0, 1.0))


def test_inverse_composed_with_fprime_is_identity(quartic, rng):
    us = rng.uniform(0.0, 2.0, 100)
    xi = quartic.fp(us)
    back = inverse_fprime_array(quartic, xi, 0.0, 2.0)
    assert np.max(np.abs(back - us)) <= 1e-10


def test_flux_by_name_unknown():
    with pytest.raises(KeyError, match="unknown flux"):
        flux_by_name("cubic")


def test_fluxpair_is_frozen(burgers):
    with pytest.raises(Exception):
        burgers.alpha = 2.0
