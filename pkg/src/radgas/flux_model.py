"""Convex flux pairs, their structural assumptions, and inversion of f'.

Fluxes are polynomials supplied with analytic derivatives: the profile
residuals involve f'''/f'' ratios that are too delicate for numeric
differentiation.  The state ordering 0 <= f'(u-) < f'(u+) (the in-flow
rarefaction regime) is enforced at construction time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

FPRIME_TOL = 1e-12
MAX_NEWTON_ITERS = 200


class StateOrderingError(ValueError):
    """Raised when Riemann states violate the admissible ordering."""


class ConvexityError(ValueError):
    """Raised when a flux fails the uniform-convexity floor."""


@dataclass(frozen=True)
class FluxPair:
    """Nonlinear fluxes f (normal direction) and g (tangential direction).

    ``f_coeffs``/``g_coeffs`` are ascending power-series coefficients.
    ``alpha`` is the uniform lower bound claimed for f''.
    """

    name: str
    f_coeffs: tuple[float, ...]
    g_coeffs: tuple[float, ...]
    alpha: float

    def f_deriv(self, u, k: int = 0):
        """k-th derivative of f at u (k=0 is f itself)."""
        c = self.f_coeffs
        for _ in range(k):
            c = P.polyder(c)
        return P.polyval(np.asarray(u, dtype=float), c)

    def g_deriv(self, u, k: int = 0):
        """k-th derivative of g at u."""
        c = self.g_coeffs
        for _ in range(k):
            c = P.polyder(c)
        return P.polyval(np.asarray(u, dtype=float), c)

    # convenience spellings used throughout the numerics
    def f(self, u):
        return self.f_deriv(u, 0)

    def fp(self, u):
        return self.f_deriv(u, 1)

    def fpp(self, u):
        return self.f_deriv(u, 2)

    def f3(self, u):
        return self.f_deriv(u, 3)

    def f4(self, u):
        return self.f_deriv(u, 4)

    def g(self, u):
        return self.g_deriv(u, 0)

    def gp(self, u):
        return self.g_deriv(u, 1)

    def gpp(self, u):
        return self.g_deriv(u, 2)


_BUILTINS = {
    # f(u) = u^2/2, g(u) = u^2/2; f'' = 1
    "burgers": FluxPair("burgers", (0.0, 0.0, 0.5), (0.0, 0.0, 0.5), 1.0),
    # f(u) = u^2/2 + u^4/12; f'' = 1 + u^2 >= 1, f''' = 2u != 0
    "quartic": FluxPair(
        "quartic", (0.0, 0.0, 0.5, 0.0, 1.0 / 12.0), (0.0, 0.0, 0.5), 1.0
    ),
}


def flux_by_name(name: str) -> FluxPair:
    """Look up a built-in flux pair by name."""
    try:
        return _BUILTINS[name]
    except KeyError:
        raise KeyError(
            f"unknown flux {name!r}; built-ins: {sorted(_BUILTINS)}"
        ) from None


def polynomial_flux(
    f_coeffs, g_coeffs=None, alpha: float = 1.0, name: str = "custom"
) -> FluxPair:
    """Build a custom flux pair from ascending polynomial coefficients."""
    f_coeffs = tuple(float(c) for c in f_coeffs)
    if g_coeffs is None:
        g_coeffs = f_coeffs
    g_coeffs = tuple(float(c) for c in g_coeffs)
    return FluxPair(name, f_coeffs, g_coeffs, float(alpha))


@dataclass(frozen=True)
class RiemannData:
    """End states of the rarefaction connection, with regime tag.

    ``regime`` is ``"fprime_positive"`` when f'(u-) > 0 and
    ``"fprime_zero"`` when f'(u-) = 0 (which forces u- = 0 under the
    normalization f'(0) = 0).
    """

    u_minus: float
    u_plus: float
    delta: float = field(init=False)
    regime: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "delta", abs(self.u_plus - self.u_minus))
        object.__setattr__(self, "regime", "unclassified")

    @classmethod
    def create(cls, flux: FluxPair, u_minus: float, u_plus: float) -> "RiemannData":
        fpm = float(flux.fp(u_minus))
        fpp_ = float(flux.fp(u_plus))
        if fpm < 0.0:
            raise StateOrderingError(
                f"f'(u_minus) >= 0 violated: f'({u_minus}) = {fpm}"
            )
        if not fpm < fpp_:
            raise StateOrderingError(
                f"f'(u_minus) < f'(u_plus) violated: {fpm} >= {fpp_}"
            )
        if not u_plus - u_minus > 0.0:
            raise StateOrderingError(
                f"u_plus - u_minus > 0 violated: {u_plus} - {u_minus}"
            )
        data = cls(float(u_minus), float(u_plus))
        regime = "fprime_zero" if fpm == 0.0 else "fprime_positive"
        object.__setattr__(data, "regime", regime)
        return data


@dataclass(frozen=True)
class AssumptionReport:
    """Deterministic record of the structural-assumption check."""

    flux_name: str
    u_minus: float
    u_plus: float
    samples: int
    sample_lo: float
    sample_hi: float
    min_fpp: float
    alpha: float
    f_at_zero: float
    fp_at_zero: float
    passed: bool
    failures: tuple[str, ...]

    def to_json(self) -> str:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["failures"] = list(self.failures)
        return json.dumps(d, sort_keys=True)


def check_assumptions(
    flux: FluxPair, data: RiemannData, samples: int = 257, margin: float = 0.5
) -> AssumptionReport:
    """Verify convexity floor and normalization over the working state range.

    Samples f'' on [min(u-, 0), u+ + margin] and checks f''(u) >= alpha,
    f(0) = 0, f'(0) = 0 to machine tolerance.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    lo = min(data.u_minus, 0.0)
    hi = data.u_plus + margin
    us = np.linspace(lo, hi, samples)
    min_fpp = float(np.min(flux.fpp(us)))
    f0 = abs(float(flux.f(0.0)))
    fp0 = abs(float(flux.fp(0.0)))

    failures = []
    if min_fpp < flux.alpha:
        failures.append(
            f"f''(u) >= alpha violated: min f'' = {min_fpp!r} < {flux.alpha!r}"
        )
    if f0 > 1e-14:
        failures.append(f"f(0) = 0 violated: |f(0)| = {f0!r}")
    if fp0 > 1e-14:
        failures.append(f"f'(0) = 0 violated: |f'(0)| = {fp0!r}")

    return AssumptionReport(
        flux_name=flux.name,
        u_minus=data.u_minus,
        u_plus=data.u_plus,
        samples=samples,
        sample_lo=float(lo),
        sample_hi=float(hi),
        min_fpp=min_fpp,
        alpha=flux.alpha,
        f_at_zero=f0,
        fp_at_zero=fp0,
        passed=not failures,
        failures=tuple(failures),
    )


def inverse_fprime(flux: FluxPair, xi: float, bracket: tuple[float, float]) -> float:
    """Invert f' at xi on a bracket where f' is strictly increasing.

    Safeguarded Newton iteration with bisection fallback; converges to
    |f'(u) - xi| <= 1e-12.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = float(flux.fp(lo)), float(flux.fp(hi))
    if not (flo - FPRIME_TOL <= xi <= fhi + FPRIME_TOL):
        raise ValueError(
            f"xi = {xi} outside range of f' on bracket: [{flo}, {fhi}]"
        )
    u = 0.5 * (lo + hi)
    for _ in range(MAX_NEWTON_ITERS):
        r = float(flux.fp(u)) - xi
        if abs(r) <= FPRIME_TOL:
            return u
        if r > 0.0:
            hi = u
        else:
            lo = u
        d = float(flux.fpp(u))
        step = r / d if d > 0.0 else np.inf
        u_new = u - step
        if not (lo < u_new < hi):
            u_new = 0.5 * (lo + hi)
        u = u_new
    return u


def inverse_fprime_array(flux: FluxPair, xi, lo: float, hi: float) -> np.ndarray:
    """Vectorized inversion of f' over an array of values in [f'(lo), f'(hi)].

    Bisection-safeguarded Newton on every entry simultaneously.
    """
    xi = np.asarray(xi, dtype=float)
    flo, fhi = float(flux.fp(lo)), float(flux.fp(hi))
    if xi.size and (xi.min() < flo - 1e-9 or xi.max() > fhi + 1e-9):
        raise ValueError("values outside range of f' on bracket")
    xi = np.clip(xi, flo, fhi)
    a = np.full_like(xi, lo)
    b = np.full_like(xi, hi)
    u = 0.5 * (a + b)
    for _ in range(MAX_NEWTON_ITERS):
        r = flux.fp(u) - xi
        if np.all(np.abs(r) <= FPRIME_TOL):
            break
        a = np.where(r <= 0.0, u, a)
        b = np.where(r > 0.0, u, b)
        d = flux.fpp(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            u_new = u - r / d
        bad = ~((a < u_new) & (u_new < b)) | ~np.isfinite(u_new)
        u = np.where(bad, 0.5 * (a + b), u_new)
    return u
