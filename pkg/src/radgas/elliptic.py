"""Elliptic solves on the half-line and half-plane.

The operator 1 - d^2/dx^2 on x > 0 is inverted two independent ways:

* image-charge kernels  0.5*(exp(-|x-y|) -/+ exp(-|x+y|))  evaluated by
  product integration (local quadratic interpolation of the data against
  exact exponential moments), with optional constant extension beyond the
  truncation point;
* second-order finite differences with a ghost-point Neumann condition
  at x = 0 and a far-field Dirichlet closure at x = L.

On the half-plane the vector equation -grad(div p) + p + grad(v) = 0 is
reduced to its divergence s = div p, solved per y-Fourier mode by
tridiagonal solves in x, and p is reconstructed as the discrete gradient
of s - v (so the discrete curl of p vanishes identically).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.signal import lfilter


@dataclass(frozen=True)
class HalfLineGrid:
    """Uniform grid x_j = j*h on [0, L], j = 0..n-1."""

    n: int
    h: float

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("need at least 16 grid points")
        if not self.h > 0.0:
            raise ValueError("spacing must be positive")

    @property
    def L(self) -> float:
        return (self.n - 1) * self.h

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    @classmethod
    def from_length(cls, n: int, L: float) -> "HalfLineGrid":
        return cls(n, L / (n - 1))


@dataclass(frozen=True)
class HalfPlaneGrid:
    """Tensor grid: x_j = j*hx on [0, Lx]; y periodic with period Ly = ny*hy."""

    nx: int
    ny: int
    hx: float
    hy: float

    def __post_init__(self):
        if self.nx < 16:
            raise ValueError("need at least 16 points in x")
        if self.ny < 4 or (self.ny & (self.ny - 1)) != 0:
            raise ValueError("ny must be a power of two")
        if not (self.hx > 0.0 and self.hy > 0.0):
            raise ValueError("spacings must be positive")

    @property
    def Lx(self) -> float:
        return (self.nx - 1) * self.hx

    @property
    def Ly(self) -> float:
        return self.ny * self.hy

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.hx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.hy

    @classmethod
    def from_lengths(cls, nx: int, Lx: float, ny: int, Ly: float) -> "HalfPlaneGrid":
        return cls(nx, ny, Lx / (nx - 1), Ly / ny)


# ---------------------------------------------------------------------------
# difference stencils (shared by the solvers and the norm diagnostics)

def gradient_1d(u: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Centered first difference, second-order one-sided at the ends."""
    u = np.asarray(u, dtype=float)
    du = np.empty_like(u)
    sl = [slice(None)] * u.ndim

    def ix(s):
        sl2 = list(sl)
        sl2[axis] = s
        return tuple(sl2)

    du[ix(slice(1, -1))] = (u[ix(slice(2, None))] - u[ix(slice(None, -2))]) / (2 * h)
    du[ix(0)] = (-3 * u[ix(0)] + 4 * u[ix(1)] - u[ix(2)]) / (2 * h)
    du[ix(-1)] = (3 * u[ix(-1)] - 4 * u[ix(-2)] + u[ix(-3)]) / (2 * h)
    return du


def second_diff_1d(u: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Centered second difference, one-sided at the ends."""
    u = np.asarray(u, dtype=float)
    d2 = np.empty_like(u)
    sl = [slice(None)] * u.ndim

    def ix(s):
        sl2 = list(sl)
        sl2[axis] = s
        return tuple(sl2)

    d2[ix(slice(1, -1))] = (
        u[ix(slice(2, None))] - 2 * u[ix(slice(1, -1))] + u[ix(slice(None, -2))]
    ) / (h * h)
    d2[ix(0)] = (2 * u[ix(0)] - 5 * u[ix(1)] + 4 * u[ix(2)] - u[ix(3)]) / (h * h)
    d2[ix(-1)] = (2 * u[ix(-1)] - 5 * u[ix(-2)] + 4 * u[ix(-3)] - u[ix(-4)]) / (h * h)
    return d2


def periodic_gradient(u: np.ndarray, h: float, axis: int = 1, order: int = 2) -> np.ndarray:
    """Centered periodic first difference (order 2 or 4)."""
    if order == 2:
        return (np.roll(u, -1, axis=axis) - np.roll(u, 1, axis=axis)) / (2 * h)
    if order == 4:
        return (
            -np.roll(u, -2, axis=axis)
            + 8 * np.roll(u, -1, axis=axis)
            - 8 * np.roll(u, 1, axis=axis)
            + np.roll(u, 2, axis=axis)
        ) / (12 * h)
    raise ValueError("order must be 2 or 4")


def gradient_1d_order4(u: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Fourth-order centered first difference; order-2 one-sided at ends."""
    u = np.asarray(u, dtype=float)
    du = gradient_1d(u, h, axis=axis)
    sl = [slice(None)] * u.ndim

    def ix(s):
        sl2 = list(sl)
        sl2[axis] = s
        return tuple(sl2)

    du[ix(slice(2, -2))] = (
        -u[ix(slice(4, None))]
        + 8 * u[ix(slice(3, -1))]
        - 8 * u[ix(slice(1, -3))]
        + u[ix(slice(None, -4))]
    ) / (12 * h)
    return du


# ---------------------------------------------------------------------------
# image-charge kernels by product integration

def _cell_moments(h: float):
    """Exact exponential moments over one cell of width h.

    N_k = int_0^h exp(-eta) eta^k deta (weight anchored at the left end);
    M_k the same with weight exp(-(h - eta)) (anchored at the right end).
    """
    eh = np.exp(-h)
    N0 = -np.expm1(-h)
    N1 = N0 - h * eh
    N2 = 2 * N1 - h * h * eh
    M0 = N0
    M1 = h * N0 - N1
    M2 = h * h * N0 - 2 * h * N1 + N2
    return (N0, N1, N2), (M0, M1, M2)


def _cell_quadratic_coeffs(f: np.ndarray, h: float):
    """Per-cell quadratic interpolant of nodal data, in local coordinates.

    Cell i spans [x_i, x_{i+1}]; interior cells interpolate nodes
    (i-1, i, i+1), the first cell uses (0, 1, 2).  Returns (c0, c1, c2)
    arrays of length n-1.
    """
    n = f.size
    c0 = f[:-1].copy()
    c1 = np.empty(n - 1)
    c2 = np.empty(n - 1)
    c1[1:] = (f[2:] - f[:-2]) / (2 * h)
    c2[1:] = (f[2:] - 2 * f[1:-1] + f[:-2]) / (2 * h * h)
    c1[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    c2[0] = (f[0] - 2 * f[1] + f[2]) / (2 * h * h)
    return c0, c1, c2


def _half_line_parts(f: np.ndarray, grid: HalfLineGrid, far_field: float):
    """One-sided exponential convolutions.

    A(x) = int_0^x exp(-(x-y)) f(y) dy,
    B(x) = int_x^inf exp(-(y-x)) f~(y) dy with f~ = f on the grid and
    f~ = far_field beyond x = L.  Both computed by stable first-order
    recursions (IIR filters) over the cells.
    """
    h = grid.h
    (N0, N1, N2), (M0, M1, M2) = _cell_moments(h)
    c0, c1, c2 = _cell_quadratic_coeffs(np.asarray(f, dtype=float), h)
    Iplus = c0 * M0 + c1 * M1 + c2 * M2
    Iminus = c0 * N0 + c1 * N1 + c2 * N2

    r = np.exp(-h)
    xs = np.concatenate(([0.0], Iplus))
    A = lfilter([1.0], [1.0, -r], xs)
    xs = np.concatenate(([float(far_field)], Iminus[::-1]))
    B = lfilter([1.0], [1.0, -r], xs)[::-1]
    return A, B


def k_dirichlet(f: np.ndarray, grid: HalfLineGrid, far_field: float = 0.0) -> np.ndarray:
    """Apply the Dirichlet image kernel 0.5*(e^{-|x-y|} - e^{-|x+y|}).

    The result g solves (1 - d^2/dx^2) g = f with g(0) = 0 and g bounded;
    g(0) = 0 holds exactly by construction.  ``far_field`` extends f as a
    constant beyond the truncation point.
    """
    A, B = _half_line_parts(f, grid, far_field)
    with np.errstate(under="ignore"):
        image = np.exp(-grid.x) * B[0]
    return 0.5 * (A + B - image)


def k_neumann(f: np.ndarray, grid: HalfLineGrid, far_field: float = 0.0) -> np.ndarray:
    """Apply the Neumann image kernel 0.5*(e^{-|x-y|} + e^{-|x+y|}).

    The result g solves (1 - d^2/dx^2) g = f with g'(0) = 0.
    """
    A, B = _half_line_parts(f, grid, far_field)
    with np.errstate(under="ignore"):
        image = np.exp(-grid.x) * B[0]
    return 0.5 * (A + B + image)


def kernel_truncation_estimate(f: np.ndarray, far_field: float = 0.0) -> float:
    """Size of the data mismatch at the truncation point.

    The kernels assume f = far_field beyond x = L; the neglected response
    is bounded by this mismatch (the kernel mass is at most one).
    """
    return abs(float(f[-1]) - far_field)


# ---------------------------------------------------------------------------
# finite-difference solves

def solve_Q_1d(U: np.ndarray, grid: HalfLineGrid) -> np.ndarray:
    """Solve -Q'' + Q = -U_x with Q_x(0) = 0 (ghost point) and Q(L) = 0.

    U_x is formed with the scheme's own first-difference stencil; the
    system is a strictly positive tridiagonal solve.
    """
    U = np.asarray(U, dtype=float)
    n = grid.n
    if U.shape != (n,):
        raise ValueError(f"expected shape ({n},), got {U.shape}")
    h2 = grid.h * grid.h
    rhs = -gradient_1d(U, grid.h)

    ab = np.zeros((3, n))
    ab[0, 1:] = -1.0 / h2       # superdiagonal
    ab[1, :] = 1.0 + 2.0 / h2   # diagonal
    ab[2, :-1] = -1.0 / h2      # subdiagonal
    # ghost-point Neumann at x = 0: Q_{-1} = Q_1
    ab[0, 1] = -2.0 / h2
    # far-field Dirichlet at x = L
    ab[1, -1] = 1.0
    ab[2, -2] = 0.0
    rhs = rhs.copy()
    rhs[-1] = 0.0
    Q = solve_banded((1, 1), ab, rhs)
    Q[-1] = 0.0
    return Q


def solve_divsource_1d(U: np.ndarray, grid: HalfLineGrid) -> np.ndarray:
    """Solve -S'' + S = -U_xx with S(0) = 0 and S(L) = 0.

    S plays the role of the divergence of the flux correction; this is
    exactly the zero-mode of the half-plane solve, so a planar run of the
    two-dimensional scheme reduces to it without discretization mismatch.
    """
    U = np.asarray(U, dtype=float)
    n = grid.n
    if U.shape != (n,):
        raise ValueError(f"expected shape ({n},), got {U.shape}")
    h2 = grid.h * grid.h

    ab = np.zeros((3, n))
    ab[0, 2:] = -1.0 / h2
    ab[1, :] = 1.0 + 2.0 / h2
    ab[2, :-2] = -1.0 / h2
    ab[1, 0] = 1.0
    ab[1, -1] = 1.0
    rhs = np.zeros(n)
    rhs[1:-1] = -(U[2:] - 2 * U[1:-1] + U[:-2]) / h2
    S = solve_banded((1, 1), ab, rhs)
    S[0] = 0.0
    S[-1] = 0.0
    return S


def _solve_div_modes(v: np.ndarray, grid: HalfPlaneGrid) -> np.ndarray:
    """Per-y-mode tridiagonal solves for s = div p with s(0,y) = s(Lx,y) = 0."""
    nx, ny = grid.nx, grid.ny
    if v.shape != (nx, ny):
        raise ValueError(f"expected shape ({nx}, {ny}), got {v.shape}")
    hx2 = grid.hx * grid.hx
    vhat = np.fft.rfft(v, axis=1)
    kappas = 2.0 * np.pi * np.fft.rfftfreq(ny, d=grid.hy)
    shat = np.zeros_like(vhat)
    for m, kap in enumerate(kappas):
        k2 = kap * kap
        ab = np.zeros((3, nx))
        ab[0, 2:] = -1.0 / hx2
        ab[1, :] = 1.0 + k2 + 2.0 / hx2
        ab[2, :-2] = -1.0 / hx2
        ab[1, 0] = 1.0
        ab[1, -1] = 1.0
        rhs = np.zeros(nx, dtype=complex)
        col = vhat[:, m]
        rhs[1:-1] = -(col[2:] - 2 * col[1:-1] + col[:-2]) / hx2 + k2 * col[1:-1]
        shat[:, m] = solve_banded((1, 1), ab, rhs)
    shat[0, :] = 0.0
    shat[-1, :] = 0.0
    return np.fft.irfft(shat, n=ny, axis=1)


def solve_divp_2d(v: np.ndarray, grid: HalfPlaneGrid):
    """Solve -grad(div p) + p + grad(v) = 0 on the half-plane.

    Returns (s, p1, p2) with s = div p satisfying (1 - Lap) s = -Lap v,
    s(0, y) = s(Lx, y) = 0, periodic in y, and p = grad(s - v) formed with
    the scheme's commuting difference stencils (discrete curl of p is
    zero to round-off).
    """
    s = _solve_div_modes(v, grid)
    psi = s - v
    p1 = gradient_1d(psi, grid.hx, axis=0)
    p2 = periodic_gradient(psi, grid.hy, axis=1)
    return s, p1, p2


def solve_div_2d(v: np.ndarray, grid: HalfPlaneGrid) -> np.ndarray:
    """Divergence field only (the part that enters the time stepping)."""
    return _solve_div_modes(v, grid)


def discrete_curl(p1: np.ndarray, p2: np.ndarray, grid: HalfPlaneGrid, order: int = 2) -> np.ndarray:
    """d/dy p1 - d/dx p2 with centered stencils of the given order.

    With order 2 this uses the same stencils as the p-reconstruction, so
    for solver output it vanishes to round-off; order 4 uses independent
    stencils and exposes the genuine O(h^2) distance to the curl-free
    continuum field.
    """
    if order == 2:
        dy = periodic_gradient(p1, grid.hy, axis=1, order=2)
        dx = gradient_1d(p2, grid.hx, axis=0)
    elif order == 4:
        dy = periodic_gradient(p1, grid.hy, axis=1, order=4)
        dx = gradient_1d_order4(p2, grid.hx, axis=0)
    else:
        raise ValueError("order must be 2 or 4")
    return dy - dx
