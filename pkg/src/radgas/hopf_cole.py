"""Closed-form smoothed Riemann solutions of the viscous Burgers equation.

The two-state Riemann problem for w_t + w w_x = w_xx has a closed-form
solution: a logistic blend of the end states whose weight is a ratio of
scaled complementary error functions,

    w(x,t) = w- + (w+ - w-) * sigma,   sigma = B / (A + B),
    A = erfcx(xi-),  B = erfcx(-xi+),  xi_pm = (x - w_pm t) / (2 sqrt(t)),

obtained by completing squares in the heat-kernel representation of the
Cole transform (the Gaussian terms cancel identically).  All evaluation
is done in the log domain so that no finite input produces NaN or inf.

Space derivatives come from Taylor-coefficient recursions: the logarithm
of erfcx satisfies the Riccati equation L'' = 2 + 2 z L' - (L')^2, and
the logistic weight satisfies sigma' = sigma (1 - sigma) m' for the
log-ratio m = log B - log A.  Time derivatives are generated from the
equation itself, w_t = w_xx - w w_x, applied recursively (this avoids
the catastrophic cancellations of differentiating the closed form in t).
"""

from __future__ import annotations

from math import comb, factorial

import numpy as np
from scipy.special import erfcx

MAX_TOTAL_ORDER = 4
_LOG_CUT = -25.0  # erfcx overflows near z = -26.6
_TWO_OVER_SQRTPI = 2.0 / np.sqrt(np.pi)


def log_erfcx(z):
    """log(erfcx(z)), valid for all finite z including large negative."""
    z = np.asarray(z, dtype=float)
    safe = z > _LOG_CUT
    zs = np.where(safe, z, 0.0)
    out = np.log(erfcx(zs))
    # erfcx(z) = 2 exp(z^2) - erfcx(-z); the correction underflows here
    zb = np.where(safe, 0.0, z)
    with np.errstate(under="ignore"):
        corr = np.log(2.0 - erfcx(-zb) * np.exp(-zb * zb))
    out = np.where(safe, out, zb * zb + corr)
    return out if out.ndim else float(out)


def _lambda0(z):
    """d/dz log erfcx(z), stable for all finite z."""
    z = np.asarray(z, dtype=float)
    safe = z > _LOG_CUT
    zs = np.where(safe, z, 0.0)
    inv = 1.0 / erfcx(zs)
    # below the cut 1/erfcx(z) = exp(-z^2)/(2 - ...) underflows to 0
    inv = np.where(safe, inv, 0.0)
    return 2.0 * z - _TWO_OVER_SQRTPI * inv


def _logerfcx_taylor(z0, n: int) -> np.ndarray:
    """Taylor coefficients of log(erfcx) at z0, orders 1..n.

    Returns array L of shape (n+1,) + z0.shape with L[m] the m-th Taylor
    coefficient (L[0] is left at zero; only derivatives are needed).
    """
    z0 = np.asarray(z0, dtype=float)
    a = np.zeros((n + 1,) + z0.shape)
    a[0] = _lambda0(z0)
    for m in range(n):
        sq = np.zeros_like(z0)
        for j in range(m + 1):
            sq = sq + a[j] * a[m - j]
        rhs = 2.0 * z0 * a[m] - sq
        if m == 0:
            rhs = rhs + 2.0
        if m >= 1:
            rhs = rhs + 2.0 * a[m - 1]
        a[m + 1] = rhs / (m + 1)
    L = np.zeros_like(a)
    for m in range(1, n + 1):
        L[m] = a[m - 1] / m
    return L


def _logistic(m):
    """1/(1 + exp(-m)) without overflow."""
    m = np.asarray(m, dtype=float)
    with np.errstate(under="ignore"):
        pos = 1.0 / (1.0 + np.exp(-np.abs(m)))
    return np.where(m >= 0.0, pos, 1.0 - pos)


def wtilde_xjet(w_minus: float, w_plus: float, x, t: float, nx: int) -> np.ndarray:
    """Space derivatives of the smoothed Riemann solution at fixed t > 0.

    Returns array of shape (nx+1,) + x.shape with entry k holding
    d^k/dx^k w(x, t).
    """
    if not t > 0.0:
        raise ValueError("derivative evaluation requires t > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = 1.0 / (2.0 * np.sqrt(t))
    xim = (x - w_minus * t) * s
    xip = (x - w_plus * t) * s

    Lm = _logerfcx_taylor(xim, nx)
    Lp = _logerfcx_taylor(-xip, nx)

    # Taylor coefficients (in x) of m = log B - log A; the inner maps are
    # affine in x so composition is a plain power rescale
    mc = np.zeros((nx + 1,) + x.shape)
    mc[0] = log_erfcx(-xip) - log_erfcx(xim)
    sk = 1.0
    for k in range(1, nx + 1):
        sk *= s
        sgn = -sk if k % 2 else sk
        mc[k] = sgn * Lp[k] - sk * Lm[k]

    # logistic weight as a Taylor series: (n+1) sig_{n+1} = sum g_j m'_{n-j}
    sig = np.zeros_like(mc)
    sig[0] = _logistic(mc[0])
    for n in range(nx):
        g = np.zeros((n + 1,) + x.shape)
        for k in range(n + 1):
            acc = np.zeros_like(x)
            for j in range(k + 1):
                acc = acc + sig[j] * sig[k - j]
            g[k] = sig[k] - acc
        tot = np.zeros_like(x)
        for j in range(n + 1):
            tot = tot + g[j] * (n - j + 1) * mc[n - j + 1]
        sig[n + 1] = tot / (n + 1)

    dw = w_plus - w_minus
    out = np.empty_like(sig)
    out[0] = w_minus + dw * sig[0]
    for k in range(1, nx + 1):
        out[k] = dw * sig[k] * factorial(k)
    return out


def wtilde_table(
    w_minus: float, w_plus: float, x, t: float, order: int = MAX_TOTAL_ORDER
) -> dict:
    """Mixed derivatives d_x^k d_t^l w for k + l <= order, as a dict.

    Time derivatives are substituted recursively from w_t = w_xx - w w_x,
    which needs pure space derivatives up to order 2*order.
    """
    if order < 0 or order > MAX_TOTAL_ORDER:
        raise ValueError(f"unsupported derivative order {order}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nx = 2 * order
    X = wtilde_xjet(w_minus, w_plus, x, t, nx)
    D = {(k, 0): X[k] for k in range(nx + 1)}
    for l in range(order):
        kmax = nx - 2 * (l + 1)
        for k in range(kmax + 1):
            conv = np.zeros_like(x)
            for j in range(k + 1):
                cj = comb(k, j)
                for i in range(l + 1):
                    conv = conv + cj * comb(l, i) * D[(j, i)] * D[(k - j + 1, l - i)]
            D[(k, l + 1)] = D[(k + 2, l)] - conv
    return {kl: v for kl, v in D.items() if kl[0] + kl[1] <= order}


def hopf_cole_wtilde(w_minus: float, w_plus: float, x, t: float, k: int = 0, l: int = 0):
    """Evaluate d_x^k d_t^l of the smoothed Riemann solution.

    At t = 0 only the (k, l) = (0, 0) step data is defined.
    """
    if not w_minus < w_plus:
        raise ValueError("requires w_minus < w_plus")
    if k < 0 or l < 0 or k + l > MAX_TOTAL_ORDER:
        raise ValueError(f"unsupported derivative order (k={k}, l={l})")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    scalar = np.ndim(x) == 0
    if t == 0.0:
        if k or l:
            raise ValueError("derivatives undefined at t = 0 (step data)")
        xa = np.asarray(x, dtype=float)
        out = np.where(xa < 0.0, w_minus, np.where(xa > 0.0, w_plus, 0.5 * (w_minus + w_plus)))
        return float(out) if scalar else out
    table = wtilde_table(w_minus, w_plus, x, t, order=k + l)
    out = table[(k, l)]
    return float(out[0]) if scalar else out
