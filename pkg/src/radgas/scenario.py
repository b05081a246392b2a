"""Scenario files: sectioned key-value configs that define reproducible runs.

A scenario pins the flux, the end states, the grid, the initial-data
family, the time range, and the formulation.  Parsing validates the
whole document and reports every problem at once; unknown keys are
rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .flux_model import (
    FluxPair,
    RiemannData,
    StateOrderingError,
    check_assumptions,
    flux_by_name,
    polynomial_flux,
)


class ScenarioError(ValueError):
    """Validation failure; carries the full list of problems."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.errors))


_KNOWN_KEYS = {
    "flux": {"name", "coefficients", "g_coefficients", "alpha"},
    "states": {"u_minus", "u_plus"},
    "grid": {"n", "l", "ny", "ly"},
    "initial": {"family", "t0", "amp", "h1_target", "center", "width",
                "perturbation_amp", "perturbation_mode"},
    "time": {"t_final", "cfl", "dt_diag", "snapshots"},
    "run": {"formulation", "seed", "out"},
}

_FAMILIES = ("profile_perturbation", "tanh", "mollified_step")
_FORMULATIONS = ("coupled", "convolution", "both", "divform")


@dataclass
class Scenario:
    """Validated, fully defaulted run description."""

    name: str
    flux: FluxPair
    data: RiemannData
    n: int
    L: float
    ny: int | None
    Ly: float | None
    family: str
    t0: float
    amp: float | None
    h1_target: float | None
    center: float
    width: float
    pert_amp: float
    pert_mode: int
    t_final: float
    cfl: float
    dt_diag: float
    snapshots: tuple[float, ...]
    formulation: str
    seed: int
    out: str | None
    raw_text: str = field(repr=False, default="")

    @property
    def kind(self) -> str:
        return "2d" if self.ny is not None else "1d"

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.raw_text.encode()).hexdigest()


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    """Parse and validate a scenario document.

    Raises :class:`ScenarioError` listing every validation problem, not
    just the first one found.
    """
    parser = configparser.ConfigParser(strict=True, interpolation=None)
    try:
        parser.read_string(text, source=name)
    except configparser.DuplicateOptionError as exc:
        raise ScenarioError(
            [f"duplicate key {exc.option!r} in section [{exc.section}] "
             f"(line {exc.lineno})"]
        ) from None
    except configparser.DuplicateSectionError as exc:
        raise ScenarioError(
            [f"duplicate section [{exc.section}] (line {exc.lineno})"]
        ) from None
    except configparser.Error as exc:
        raise ScenarioError([f"config syntax error: {exc}"]) from None

    errors: list[str] = []
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            errors.append(f"unknown section [{section}]")
            continue
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                errors.append(f"unknown key {key!r} in section [{section}]")

    def get(section, key, conv, default=None, required=False):
        if not parser.has_option(section, key):
            if required:
                errors.append(f"missing required key {key!r} in [{section}]")
            return default
        raw = parser.get(section, key)
        try:
            return conv(raw)
        except (TypeError, ValueError):
            errors.append(f"bad value for {key!r} in [{section}]: {raw!r}")
            return default

    def floats(raw):
        return tuple(float(tok) for tok in raw.replace(",", " ").split())

    flux = None
    fname = get("flux", "name", str, default=None)
    coeffs = get("flux", "coefficients", floats, default=None)
    if coeffs is not None:
        gco = get("flux", "g_coefficients", floats, default=None)
        alpha = get("flux", "alpha", float, default=1.0)
        flux = polynomial_flux(coeffs, gco, alpha, fname or "custom")
    elif fname is not None:
        try:
            flux = flux_by_name(fname)
        except KeyError as exc:
            errors.append(str(exc.args[0]))
    else:
        errors.append("missing [flux]: give name or coefficients")

    u_minus = get("states", "u_minus", float, required=True)
    u_plus = get("states", "u_plus", float, required=True)

    data = None
    if flux is not None and u_minus is not None and u_plus is not None:
        try:
            data = RiemannData.create(flux, u_minus, u_plus)
        except StateOrderingError as exc:
            errors.append(
                f"inadmissible states (need 0 <= f'(u_minus) < f'(u_plus)): {exc}"
            )
        if data is not None:
            rep = check_assumptions(flux, data)
            if not rep.passed:
                errors.extend(rep.failures)

    n = get("grid", "n", int, required=True)
    L = get("grid", "l", float, required=True)
    ny = get("grid", "ny", int, default=None)
    Ly = get("grid", "ly", float, default=None)
    if n is not None and n < 16:
        errors.append("grid n must be >= 16")
    if L is not None and L <= 0:
        errors.append("grid L must be positive")
    if (ny is None) != (Ly is None):
        errors.append("give both ny and Ly for a half-plane run, or neither")
    if ny is not None and (ny < 4 or (ny & (ny - 1)) != 0):
        errors.append("ny must be a power of two")

    family = get("initial", "family", str, default="tanh")
    if family not in _FAMILIES:
        errors.append(f"unknown initial family {family!r}; choose {_FAMILIES}")
    t0 = get("initial", "t0", float, default=1.0)
    amp = get("initial", "amp", float, default=None)
    h1_target = get("initial", "h1_target", float, default=None)
    center = get("initial", "center", float, default=(L or 100.0) / 10.0)
    width = get("initial", "width", float, default=(L or 100.0) / 40.0)
    pert_amp = get("initial", "perturbation_amp", float, default=0.0)
    pert_mode = get("initial", "perturbation_mode", int, default=1)
    if family == "profile_perturbation":
        if amp is None and h1_target is None:
            h1_target = 0.05
        if amp is not None and h1_target is not None:
            errors.append("give only one of amp / h1_target")
        if t0 is not None and t0 <= 0:
            errors.append("t0 must be positive")

    t_final = get("time", "t_final", float, required=True)
    if t_final is not None and t_final < 0:
        errors.append("t_final must be nonnegative")
    cfl = get("time", "cfl", float, default=0.4)
    if cfl is not None and not (0 < cfl <= 0.9):
        errors.append("cfl must lie in (0, 0.9]")
    dt_diag = get("time", "dt_diag", float,
                  default=max((t_final or 1.0) / 200.0, 1e-6))
    if dt_diag is not None and dt_diag <= 0:
        errors.append("dt_diag must be positive")
    snapshots = get("time", "snapshots", floats,
                    default=(0.0, t_final if t_final is not None else 0.0))

    formulation = get("run", "formulation", str, default="coupled")
    if formulation not in _FORMULATIONS:
        errors.append(
            f"unknown formulation {formulation!r}; choose {_FORMULATIONS}"
        )
    if ny is not None and formulation != "coupled":
        errors.append("half-plane runs support only the coupled formulation")
    seed = get("run", "seed", int, default=0)
    out = get("run", "out", str, default=None)

    if errors:
        raise ScenarioError(errors)

    return Scenario(
        name=name, flux=flux, data=data, n=n, L=L, ny=ny, Ly=Ly,
        family=family, t0=t0, amp=amp, h1_target=h1_target,
        center=center, width=width, pert_amp=pert_amp, pert_mode=pert_mode,
        t_final=t_final, cfl=cfl, dt_diag=dt_diag,
        snapshots=tuple(snapshots), formulation=formulation,
        seed=seed, out=out, raw_text=text,
    )


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    import pathlib

    p = pathlib.Path(path)
    return parse_scenario(p.read_text(), name=p.stem)
