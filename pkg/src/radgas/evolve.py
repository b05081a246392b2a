"""Time integration of the coupled half-line and half-plane systems.

Method of lines: MUSCL reconstruction with a minmod limiter and a local
Lax-Friedrichs flux for the hyperbolic part (second order in smooth
regions), the elliptic constraint re-solved at every Runge-Kutta stage,
and Heun's SSP-RK2 in time.  The inflow state is re-imposed after each
stage; the right boundary extrapolates with zero gradient.

Three interchangeable couplings for the half-line flux correction:

* ``coupled``      Q from the ghost-point Neumann solve, source = Q_x;
* ``convolution``  source = (U - u_minus) - K(U - u_minus) with the
                   Dirichlet image kernel K.  The constant shift makes
                   the operand vanish at x = 0 and is exactly equivalent
                   to the coupled form for bounded data (metadata records
                   the lift);
* ``divform``      source from the Dirichlet divergence solve, which is
                   the zero-mode of the half-plane discretization; the
                   planar reference for two-dimensional runs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import diagnostics as diag
from .elliptic import (
    HalfLineGrid,
    HalfPlaneGrid,
    discrete_curl,
    gradient_1d,
    k_dirichlet,
    solve_div_2d,
    solve_divp_2d,
    solve_divsource_1d,
    solve_Q_1d,
)
from .flux_model import FluxPair
from .profiles import modified_profile

DEFAULT_CFL = 0.4

ROUTES_1D = ("coupled", "convolution", "divform")


class CFLError(RuntimeError):
    """Step refused: time step exceeds the CFL bound."""

    def __init__(self, dt: float, dt_required: float):
        super().__init__(
            f"dt = {dt} exceeds CFL bound; required dt <= {dt_required}"
        )
        self.dt_required = dt_required


class SimulationAborted(RuntimeError):
    """Nonfinite values appeared; carries the last valid state."""

    def __init__(self, state):
        super().__init__(f"nonfinite state at t = {state.t}")
        self.last_state = state


@dataclass
class System1D:
    """Immutable description of one half-line problem."""

    flux: FluxPair
    grid: HalfLineGrid
    u_minus: float
    u_plus: float
    route: str = "coupled"
    cfl: float = DEFAULT_CFL

    def __post_init__(self):
        if self.route not in ROUTES_1D:
            raise ValueError(f"unknown route {self.route!r}")


@dataclass
class State1D:
    """Half-line snapshot: state U and its flux correction Q."""

    t: float
    U: np.ndarray
    Q: np.ndarray
    steps: int = 0
    cfl_used: float = DEFAULT_CFL
    S: np.ndarray | None = None  # divergence source (divform route)


@dataclass
class System2D:
    flux: FluxPair
    grid: HalfPlaneGrid
    u_minus: float
    u_plus: float
    cfl: float = DEFAULT_CFL


@dataclass
class State2D:
    """Half-plane snapshot: state u, radiative flux q, and s = div q."""

    t: float
    u: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    s: np.ndarray
    steps: int = 0
    cfl_used: float = DEFAULT_CFL


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 0.5 * (np.sign(a) + np.sign(b)) * np.minimum(np.abs(a), np.abs(b))


def _muscl_divergence(u_ext: np.ndarray, h: float, f, fp) -> np.ndarray:
    """Flux divergence along axis 0 of an array with two ghost layers."""
    d = np.diff(u_ext, axis=0)
    slope = _minmod(d[:-1], d[1:])
    UL = u_ext[1:-2] + 0.5 * slope[:-1]
    UR = u_ext[2:-1] - 0.5 * slope[1:]
    a = np.maximum(np.abs(fp(UL)), np.abs(fp(UR)))
    F = 0.5 * (f(UL) + f(UR)) - 0.5 * a * (UR - UL)
    return (F[1:] - F[:-1]) / h


def _extend_inflow(U: np.ndarray, u_minus: float) -> np.ndarray:
    """Two inflow ghosts on the left, zero-gradient ghosts on the right."""
    return np.concatenate(([u_minus, u_minus], U, [U[-1], U[-1]]))


def _source_1d(U: np.ndarray, sys: System1D):
    """Flux-correction source for the chosen route, plus its aux field."""
    if sys.route == "coupled":
        Q = solve_Q_1d(U, sys.grid)
        return gradient_1d(Q, sys.grid.h), Q
    if sys.route == "divform":
        S = solve_divsource_1d(U, sys.grid)
        return S, S
    # convolution route: lift by the boundary state so the operand
    # vanishes at x = 0; constant data extension beyond the truncation
    op = U - sys.u_minus
    KU = k_dirichlet(op, sys.grid, far_field=sys.u_plus - sys.u_minus)
    return op - KU, None


def _rhs_1d(U: np.ndarray, sys: System1D):
    src, aux = _source_1d(U, sys)
    hyp = _muscl_divergence(
        _extend_inflow(U, sys.u_minus), sys.grid.h, sys.flux.f, sys.flux.fp
    )
    return -hyp - src, aux


def _check_cfl_1d(U: np.ndarray, dt: float, sys: System1D) -> None:
    speed = float(np.max(np.abs(sys.flux.fp(U))))
    if speed > 0.0:
        dt_req = sys.cfl * sys.grid.h / speed
        if dt > dt_req * (1.0 + 1e-12):
            raise CFLError(dt, dt_req)


def step_1d(state: State1D, dt: float, sys: System1D) -> State1D:
    """One SSP-RK2 step of the half-line system."""
    _check_cfl_1d(state.U, dt, sys)
    U = state.U
    r1, _ = _rhs_1d(U, sys)
    U1 = U + dt * r1
    U1[0] = sys.u_minus
    r2, _ = _rhs_1d(U1, sys)
    U2 = 0.5 * U + 0.5 * (U1 + dt * r2)
    U2[0] = sys.u_minus
    if not np.all(np.isfinite(U2)):
        raise SimulationAborted(state)
    if sys.route == "divform":
        S = solve_divsource_1d(U2, sys.grid)
        Q = solve_Q_1d(U2, sys.grid)
        return State1D(state.t + dt, U2, Q, state.steps + 1, sys.cfl, S=S)
    Q = solve_Q_1d(U2, sys.grid)
    return State1D(state.t + dt, U2, Q, state.steps + 1, sys.cfl)


def step_1d_coupled(state: State1D, dt: float, sys: System1D) -> State1D:
    """One step with the source Q_x from the Neumann ghost-point solve."""
    return step_1d(state, dt, replace(sys, route="coupled"))


def step_1d_convolution(state: State1D, dt: float, sys: System1D) -> State1D:
    """One step with the nonlocal form (U - u_minus) - K(U - u_minus)."""
    return step_1d(state, dt, replace(sys, route="convolution"))


def make_state_1d(U0: np.ndarray, sys: System1D, t: float = 0.0) -> State1D:
    U0 = np.asarray(U0, dtype=float).copy()
    U0[0] = sys.u_minus
    Q = solve_Q_1d(U0, sys.grid)
    S = solve_divsource_1d(U0, sys.grid) if sys.route == "divform" else None
    return State1D(t, U0, Q, 0, sys.cfl, S=S)


# ---------------------------------------------------------------------------
# half-plane stepping

def _rhs_2d(u: np.ndarray, sys: System2D):
    g2 = sys.grid
    s = solve_div_2d(u, g2)
    u_ext = np.concatenate(
        (
            np.full((2, g2.ny), sys.u_minus),
            u,
            np.broadcast_to(u[-1], (2, g2.ny)),
        ),
        axis=0,
    )
    fx = _muscl_divergence(u_ext, g2.hx, sys.flux.f, sys.flux.fp)
    u_per = np.concatenate((u[:, -2:], u, u[:, :2]), axis=1)
    gy = np.moveaxis(
        _muscl_divergence(np.moveaxis(u_per, 1, 0), g2.hy, sys.flux.g, sys.flux.gp),
        0,
        1,
    )
    return -fx - gy - s, s


def _check_cfl_2d(u: np.ndarray, dt: float, sys: System2D) -> None:
    sx = float(np.max(np.abs(sys.flux.fp(u))))
    sy = float(np.max(np.abs(sys.flux.gp(u))))
    bound = np.inf
    if sx > 0.0:
        bound = min(bound, sys.grid.hx / sx)
    if sy > 0.0:
        bound = min(bound, sys.grid.hy / sy)
    dt_req = sys.cfl * bound
    if dt > dt_req * (1.0 + 1e-12):
        raise CFLError(dt, dt_req)


def step_2d(state: State2D, dt: float, sys: System2D) -> State2D:
    """One SSP-RK2 step of the half-plane system."""
    _check_cfl_2d(state.u, dt, sys)
    u = state.u
    r1, _ = _rhs_2d(u, sys)
    u1 = u + dt * r1
    u1[0, :] = sys.u_minus
    r2, _ = _rhs_2d(u1, sys)
    u2 = 0.5 * u + 0.5 * (u1 + dt * r2)
    u2[0, :] = sys.u_minus
    if not np.all(np.isfinite(u2)):
        raise SimulationAborted(state)
    s, p1, p2 = solve_divp_2d(u2, sys.grid)
    return State2D(state.t + dt, u2, p1, p2, s, state.steps + 1, sys.cfl)


def make_state_2d(u0: np.ndarray, sys: System2D, t: float = 0.0) -> State2D:
    u0 = np.asarray(u0, dtype=float).copy()
    u0[0, :] = sys.u_minus
    s, q1, q2 = solve_divp_2d(u0, sys.grid)
    return State2D(t, u0, q1, q2, s, 0, sys.cfl)


# ---------------------------------------------------------------------------
# initial data families

def bump(s: np.ndarray) -> np.ndarray:
    """Smooth compactly supported bump on |s| < 1, max value 1/e."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def initial_tanh(u_minus: float, u_plus: float, grid: HalfLineGrid,
                 center: float, width: float) -> np.ndarray:
    """Monotone tanh connection, pinned exactly to u_minus at x = 0."""
    T = 0.5 * (1.0 + np.tanh((grid.x - center) / width))
    T0 = 0.5 * (1.0 + np.tanh(-center / width))
    return u_minus + (u_plus - u_minus) * (T - T0) / (1.0 - T0)


def initial_mollified_step(u_minus: float, u_plus: float, grid: HalfLineGrid,
                           center: float) -> np.ndarray:
    """Riemann step smeared over four grid cells."""
    return initial_tanh(u_minus, u_plus, grid, center, 4.0 * grid.h)


def initial_profile_perturbation(flux, data, grid: HalfLineGrid, t0: float,
                                 center: float, width: float,
                                 amp: float | None = None,
                                 h1_target: float | None = None):
    """Profile at internal time t0 plus a compact bump perturbation.

    Exactly one of ``amp`` and ``h1_target`` must be given; the latter
    scales the bump to the requested discrete H^1 size.  Returns
    (U0, V0, amp).
    """
    if (amp is None) == (h1_target is None):
        raise ValueError("give exactly one of amp / h1_target")
    base = modified_profile(flux, data, grid, t0, order=2).u_tilde
    shape = bump((grid.x - center) / width)
    if h1_target is not None:
        l2 = diag.lp_norm(shape, grid.h, 2.0)
        dl2 = diag.lp_norm(gradient_1d(shape, grid.h), grid.h, 2.0)
        h1 = float(np.hypot(l2, dl2))
        amp = h1_target / h1
    V0 = amp * shape
    return base + V0, V0, float(amp)


# ---------------------------------------------------------------------------
# simulation driver

@dataclass
class SimResult:
    """Everything a run produces, in memory."""

    kind: str
    times: list
    series: diag.NormSeries
    snapshots: list            # (t, {name: array})
    final: object
    aborted: bool
    extras: dict


def _plan_steps(t_final: float, dt_diag: float, dt_cfl: float):
    """Integer step plan: exact diagnostic times, CFL-safe dt."""
    n_diag = max(1, int(round(t_final / dt_diag)))
    seg = t_final / n_diag
    per = max(1, int(np.ceil(seg / dt_cfl - 1e-12)))
    return n_diag, per, seg / per


def run_simulation(scenario) -> SimResult:
    """Integrate a scenario and collect its diagnostic series.

    Deterministic for a fixed scenario: fixed step plan, fixed evaluation
    order.  On a nonfinite state the run stops and the partial result is
    marked aborted.
    """
    if scenario.kind == "2d":
        return _run_2d(scenario)
    return _run_1d(scenario)


def _speed_bound_1d(flux, U0) -> float:
    lo, hi = float(np.min(U0)), float(np.max(U0))
    pad = 0.05 * max(1.0, hi - lo)
    return max(abs(float(flux.fp(lo - pad))), abs(float(flux.fp(hi + pad))))


def _build_initial_1d(scenario, grid):
    fam = scenario.family
    if fam == "profile_perturbation":
        U0, V0, amp = initial_profile_perturbation(
            scenario.flux, scenario.data, grid, scenario.t0,
            scenario.center, scenario.width,
            amp=scenario.amp, h1_target=scenario.h1_target,
        )
        return U0, {"V0": V0, "amp": amp}
    if fam == "tanh":
        return initial_tanh(scenario.data.u_minus, scenario.data.u_plus,
                            grid, scenario.center, scenario.width), {}
    if fam == "mollified_step":
        return initial_mollified_step(scenario.data.u_minus,
                                      scenario.data.u_plus, grid,
                                      scenario.center), {}
    raise ValueError(f"unknown initial family {fam!r}")


def _run_1d(scenario) -> SimResult:
    grid = HalfLineGrid.from_length(scenario.n, scenario.L)
    flux, data = scenario.flux, scenario.data
    U0, extras = _build_initial_1d(scenario, grid)
    routes = (["coupled", "convolution"] if scenario.formulation == "both"
              else [scenario.formulation])
    systems = [System1D(flux, grid, data.u_minus, data.u_plus, r, scenario.cfl)
               for r in routes]
    states = [make_state_1d(U0, s) for s in systems]

    dt_cfl = scenario.cfl * grid.h / _speed_bound_1d(flux, U0)
    n_diag, per, dt = _plan_steps(scenario.t_final, scenario.dt_diag, dt_cfl)

    with_profile = scenario.family == "profile_perturbation"
    series = diag.NormSeries()
    snapshots = []
    snap_set = _snap_indices(scenario.snapshots, scenario.t_final, n_diag)
    mono = {"min_Ux": np.inf, "max_Q": -np.inf}
    aborted = False

    def diagnose(j):
        t = scenario.t_final * j / n_diag
        st = states[0]
        vals = {}
        dUdx = np.diff(st.U) / grid.h
        mono["min_Ux"] = min(mono["min_Ux"], float(dUdx.min()))
        mono["max_Q"] = max(mono["max_Q"], float(np.max(st.Q)))
        vals["min_Ux"] = float(dUdx.min())
        vals["max_Q"] = float(np.max(st.Q))
        vals["boundary_err"] = abs(st.U[0] - data.u_minus)
        vals["farfield_err"] = abs(st.U[-1] - data.u_plus)
        if with_profile:
            bundle = modified_profile(flux, data, grid, t + scenario.t0, order=2)
            V, P = diag.decompose_perturbations(st.U, st.Q, bundle)
            vals.update(diag.field_norms(V, grid.h, "V", max_deriv=1))
            vals.update(diag.field_norms(P, grid.h, "P", max_deriv=0))
        if len(states) == 2:
            vals["route_gap_Linf"] = float(
                np.max(np.abs(states[0].U - states[1].U))
            )
        series.add(t, vals)
        if j in snap_set:
            snapshots.append((t, {"x": grid.x.copy(),
                                  "U": st.U.copy(), "Q": st.Q.copy()}))

    diagnose(0)
    try:
        for j in range(1, n_diag + 1):
            for _ in range(per):
                states = [step_1d(st, dt, sy) for st, sy in zip(states, systems)]
            for st in states:  # exact time bookkeeping per segment
                st.t = scenario.t_final * j / n_diag
            diagnose(j)
    except SimulationAborted as exc:
        aborted = True
        extras["abort_t"] = exc.last_state.t

    extras["monotone_extrema"] = mono
    extras["dt"] = dt
    extras["steps_total"] = states[0].steps
    if scenario.formulation == "convolution" or scenario.formulation == "both":
        extras["convolution_lift"] = (
            "operand U - u_minus (vanishes at x = 0); "
            f"constant far-field extension {data.u_plus - data.u_minus!r}"
        )
    return SimResult("1d", series.times, series, snapshots,
                     states[0] if len(states) == 1 else states, aborted, extras)


def _snap_indices(snap_times, t_final: float, n_diag: int):
    out = set()
    for t in snap_times:
        j = int(round(n_diag * t / t_final)) if t_final > 0 else 0
        out.add(min(max(j, 0), n_diag))
    return out


def _run_2d(scenario) -> SimResult:
    grid2 = HalfPlaneGrid.from_lengths(scenario.n, scenario.L,
                                       scenario.ny, scenario.Ly)
    grid1 = HalfLineGrid(grid2.nx, grid2.hx)
    flux, data = scenario.flux, scenario.data
    U0, extras = _build_initial_1d(scenario, grid1)

    pert = scenario.pert_amp * np.sin(
        2.0 * np.pi * scenario.pert_mode * grid2.y / grid2.Ly
    )
    with np.errstate(under="ignore"):
        xprofile = grid2.x * np.exp(-grid2.x)
    v0 = xprofile[:, None] * pert[None, :]
    u0 = U0[:, None] + v0

    sys2 = System2D(flux, grid2, data.u_minus, data.u_plus, scenario.cfl)
    # planar reference: the zero-mode reduction of the same scheme
    sys1 = System1D(flux, grid1, data.u_minus, data.u_plus, "divform",
                    scenario.cfl)
    st2 = make_state_2d(u0, sys2)
    st1 = make_state_1d(U0, sys1)

    sx = _speed_bound_1d(flux, u0)
    sy = max(abs(float(flux.gp(np.min(u0)))), abs(float(flux.gp(np.max(u0)))))
    sy = sy if sy > 0 else 1e-30
    dt_cfl = scenario.cfl * min(grid2.hx / sx, grid2.hy / sy)
    n_diag, per, dt = _plan_steps(scenario.t_final, scenario.dt_diag, dt_cfl)

    series = diag.NormSeries()
    snapshots = []
    snap_set = _snap_indices(scenario.snapshots, scenario.t_final, n_diag)
    aborted = False

    def diagnose(j):
        t = scenario.t_final * j / n_diag
        v, p1, p2, divp = diag.decompose_2d(
            st2.u, st2.s, st2.q1, st2.q2, st1.U, st1.S, grid2
        )
        vals = {
            "v_Linf": float(np.max(np.abs(v))),
            "v_L2": diag.lp_norm_2d(v, grid2, 2.0),
            "gradv_Linf": diag.sup_grad_2d(v, grid2),
            "p_Linf": float(np.max(np.hypot(p1, p2))),
            "gradp_Linf": max(diag.sup_grad_2d(p1, grid2),
                              diag.sup_grad_2d(p2, grid2)),
            "divp_Linf": float(np.max(np.abs(divp))),
            "graddivp_Linf": diag.sup_grad_2d(divp, grid2),
            "curl_Linf": float(np.max(np.abs(
                discrete_curl(st2.q1, st2.q2, grid2, order=2)))),
            "planar_dev": float(np.max(np.abs(
                st2.u - st2.u.mean(axis=1, keepdims=True)))),
            "boundary_err": float(np.max(np.abs(st2.u[0, :] - data.u_minus))),
        }
        series.add(t, vals)
        if j in snap_set:
            snapshots.append((t, {
                "x": grid2.x.copy(), "y": grid2.y.copy(),
                "u": st2.u.copy(), "q1": st2.q1.copy(), "q2": st2.q2.copy(),
                "s": st2.s.copy(),
            }))

    diagnose(0)
    try:
        for j in range(1, n_diag + 1):
            for _ in range(per):
                st2 = step_2d(st2, dt, sys2)
                st1 = step_1d(st1, dt, sys1)
            st2.t = scenario.t_final * j / n_diag
            st1.t = st2.t
            diagnose(j)
    except SimulationAborted as exc:
        aborted = True
        extras["abort_t"] = exc.last_state.t

    extras["dt"] = dt
    extras["steps_total"] = st2.steps
    return SimResult("2d", series.times, series, snapshots,
                     (st2, st1), aborted, extras)
