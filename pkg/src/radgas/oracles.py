"""Independent verification routes for the analytic building blocks.

These deliberately avoid the closed forms and recursions used by the
production code: the smoothed Riemann solution is evaluated by adaptive
quadrature of the heat-kernel representation, and the half-line image
kernels by direct adaptive quadrature of the kernel integral.  Slow but
trustworthy; used by the acceptance suite and the unit tests.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad


def wtilde_heat_quadrature(w_minus: float, w_plus: float, x: float, t: float) -> float:
    """Smoothed Riemann solution via the heat-kernel representation.

    w(x,t) = int (x-y)/t * exp(-eta) dy / int exp(-eta) dy with
    eta(y) = (x-y)^2/(4t) + 0.5 * int_0^y w0; the minimum of eta is
    subtracted before exponentiating for stability.
    """
    if not t > 0.0:
        raise ValueError("quadrature oracle requires t > 0")

    def eta(y):
        prim = w_minus * y if y < 0.0 else w_plus * y
        return (x - y) ** 2 / (4.0 * t) + 0.5 * prim

    span = 50.0 * np.sqrt(t) + (abs(w_minus) + abs(w_plus)) * t + 10.0
    lo, hi = x - span, x + span
    # locate the minimum of eta: candidates are the two parabola minima
    # (shifted by the drift of each state) and the kink at y = 0
    cands = [min(max(x - w_minus * t, lo), 0.0), max(min(x - w_plus * t, hi), 0.0), 0.0]
    e0 = min(eta(y) for y in cands)
    pts = sorted({0.0, float(np.clip(x, lo, hi))})

    def num_f(y):
        return (x - y) / t * np.exp(-(eta(y) - e0))

    def den_f(y):
        return np.exp(-(eta(y) - e0))

    num = quad(num_f, lo, hi, points=pts, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    den = quad(den_f, lo, hi, points=pts, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    return num / den


def half_line_kernel_quadrature(f, x: float, L: float, sign: int,
                                far_field: float = 0.0) -> float:
    """Image-kernel application by adaptive quadrature.

    Evaluates 0.5 * int_0^inf (e^{-|x-y|} + sign * e^{-(x+y)}) f(y) dy,
    with f extended by ``far_field`` beyond L.  ``f`` is a callable.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 (Neumann) or -1 (Dirichlet)")

    def integrand(y):
        return 0.5 * (np.exp(-abs(x - y)) + sign * np.exp(-(x + y))) * f(y)

    val = quad(integrand, 0.0, L, points=[min(x, L)], limit=400,
               epsabs=1e-13, epsrel=1e-12)[0]
    # analytic tail for the constant extension beyond L
    if far_field != 0.0:
        tail = np.exp(-(L - x)) if x <= L else 1.0
        val += 0.5 * far_field * (tail + sign * np.exp(-(x + L)))
    return val


def richardson_derivative(f, x: float, h: float, order: int = 1) -> float:
    """Central finite difference with one Richardson extrapolation step."""
    if order == 1:
        d = lambda hh: (f(x + hh) - f(x - hh)) / (2.0 * hh)
    elif order == 2:
        d = lambda hh: (f(x + hh) - 2.0 * f(x) + f(x - hh)) / (hh * hh)
    else:
        raise ValueError("order must be 1 or 2")
    return (4.0 * d(h / 2.0) - d(h)) / 3.0
