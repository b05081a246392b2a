"""Run orchestration: artifacts on disk, manifests, convergence studies.

Every artifact is written atomically (temp file, then rename) so an
interrupted run never corrupts earlier results.  The manifest lists each
artifact with a content hash; wall time lives only in the manifest so
that the scientific outputs stay byte-identical across reruns.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, diagnostics as diag
from .elliptic import HalfLineGrid
from .evolve import SimResult, run_simulation
from .scenario import Scenario

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ABORTED = 3
EXIT_PROPERTY_FAILED = 4


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_json(path: Path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, sort_keys=True, indent=1) + "\n")


def file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _snapshot_csv(fields: dict) -> str:
    """Flatten snapshot arrays to CSV text (row-major over grid points)."""
    lines = []
    if "y" in fields:
        x, y = fields["x"], fields["y"]
        names = [k for k in ("u", "q1", "q2", "s") if k in fields]
        lines.append(",".join(["x", "y"] + names))
        for i in range(x.size):
            for j in range(y.size):
                row = [repr(float(x[i])), repr(float(y[j]))]
                row += [repr(float(fields[k][i, j])) for k in names]
                lines.append(",".join(row))
    else:
        x = fields["x"]
        names = [k for k in ("U", "Q") if k in fields]
        lines.append(",".join(["x"] + names))
        for i in range(x.size):
            row = [repr(float(x[i]))]
            row += [repr(float(fields[k][i])) for k in names]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _default_fits(scenario: Scenario, result: SimResult) -> list[dict]:
    """Decay fits appropriate to the scenario kind, as JSON records."""
    fits = []
    t = result.series.t()
    window = (scenario.t_final / 10.0, scenario.t_final)
    if result.kind == "1d" and scenario.family == "profile_perturbation":
        for label, ref, band in (
            ("V_Linf", -0.5, 0.2),
            ("Vx_Linf", -0.5, None),   # one-sided: decay at least this fast
            ("V_L2", -0.25, 0.25),
        ):
            try:
                fit = diag.fit_decay(t, result.series.get(label), label,
                                     window, paper_exponent=ref,
                                     band=band if band is not None else 0.5)
                rec = fit.to_record()
                if band is None:
                    rec["pass"] = bool(fit.fitted_exponent <= ref + 1e-12)
                    rec["one_sided"] = True
                fits.append(rec)
            except diag.FitRefusedError as exc:
                fits.append({"label": label, "refused": str(exc), "pass": False})
    return fits


def _default_properties(scenario: Scenario, result: SimResult) -> dict:
    props: dict = {"aborted": result.aborted}
    if result.kind == "1d":
        mono = result.extras.get("monotone_extrema", {})
        h = scenario.L / (scenario.n - 1)
        monotone_family = scenario.family in ("tanh", "mollified_step")
        props["monotonicity"] = {
            "min_Ux": mono.get("min_Ux"),
            "max_Q": mono.get("max_Q"),
            "tol_Ux": -10.0 * h,
            "tol_Q": 1e-8,
            "hypothesis_met": monotone_family,
            "pass": bool(
                not monotone_family
                or (mono.get("min_Ux", 0.0) >= -10.0 * h
                    and mono.get("max_Q", 0.0) <= 1e-8)
            ),
        }
        if scenario.family == "profile_perturbation":
            props["l1_growth"] = diag.check_l1_growth(
                result.series.t(), result.series.get("V_L1"),
                scenario.data.delta,
            )
    else:
        labels = ["v_Linf", "gradv_Linf", "p_Linf", "graddivp_Linf"]
        props["decay_2d"] = diag.check_2d_decay(
            result.series.t(),
            {k: result.series.get(k) for k in labels},
            labels=labels,
        )
        props["curl_max"] = float(np.max(result.series.get("curl_Linf")))
        props["planar_dev_max"] = float(np.max(result.series.get("planar_dev")))
    return props


@dataclass
class RunOutcome:
    exit_code: int
    out_dir: Path
    fits: list
    properties: dict
    result: SimResult | None


def run(scenario: Scenario, out_dir, dry_run: bool = False) -> RunOutcome:
    """Execute a scenario and persist its artifacts.

    Returns a nonzero exit code when the run aborts or a must-pass
    property fails; reruns overwrite atomically.
    """
    out = Path(out_dir) / scenario.name
    if dry_run:
        return RunOutcome(EXIT_OK, out, [], {"validated": True}, None)
    out.mkdir(parents=True, exist_ok=True)
    t_start = time.perf_counter()

    result = run_simulation(scenario)
    fits = _default_fits(scenario, result)
    props = _default_properties(scenario, result)

    artifacts = {}

    norms_path = out / "norms.csv"
    import io

    buf = io.StringIO()
    result.series.write_csv(buf)
    atomic_write_text(norms_path, buf.getvalue())
    artifacts["norms.csv"] = file_sha256(norms_path)

    for t, fields in result.snapshots:
        stem = f"snapshot_t{t:g}"
        p = out / f"{stem}.csv"
        atomic_write_text(p, _snapshot_csv(fields))
        artifacts[p.name] = file_sha256(p)
        sidecar = {
            "t": t,
            "config_hash": scenario.config_hash,
            "scheme": "muscl-minmod+ssprk2",
            "cfl": scenario.cfl,
            "formulation": scenario.formulation,
            "grid": {"n": scenario.n, "L": scenario.L,
                     "ny": scenario.ny, "Ly": scenario.Ly},
        }
        sp = out / f"{stem}.json"
        write_json(sp, sidecar)
        artifacts[sp.name] = file_sha256(sp)

    fits_path = out / "fits.json"
    write_json(fits_path, fits)
    artifacts["fits.json"] = file_sha256(fits_path)

    props_path = out / "properties.json"
    write_json(props_path, props)
    artifacts["properties.json"] = file_sha256(props_path)

    if result.aborted:
        atomic_write_text(out / "ABORTED", f"aborted at t = {result.extras.get('abort_t')}\n")
        artifacts["ABORTED"] = file_sha256(out / "ABORTED")

    manifest = {
        "scenario": scenario.name,
        "config_hash": scenario.config_hash,
        "radgas_version": __version__,
        "aborted": result.aborted,
        "dt": result.extras.get("dt"),
        "steps_total": result.extras.get("steps_total"),
        "wall_time_s": time.perf_counter() - t_start,
        "artifacts": artifacts,
    }
    if "convolution_lift" in result.extras:
        manifest["convolution_lift"] = result.extras["convolution_lift"]
    write_json(out / "manifest.json", manifest)

    must_pass = [rec.get("pass", True) for rec in fits]
    props_pass = props.get("monotonicity", {}).get("pass", True)
    if result.aborted:
        return RunOutcome(EXIT_ABORTED, out, fits, props, result)
    if not (all(must_pass) and props_pass):
        return RunOutcome(EXIT_PROPERTY_FAILED, out, fits, props, result)
    return RunOutcome(EXIT_OK, out, fits, props, result)


# ---------------------------------------------------------------------------
# convergence studies

def _refine(scenario: Scenario, factor: int) -> Scenario:
    """Same scenario on a grid refined by an integer factor (nested nodes)."""
    from dataclasses import replace

    n_fine = (scenario.n - 1) * factor + 1
    ny_fine = scenario.ny * factor if scenario.ny is not None else None
    return replace(scenario, n=n_fine, ny=ny_fine,
                   name=f"{scenario.name}_x{factor}")


def convergence_study(scenario: Scenario, levels: int = 3) -> dict:
    """Self-convergence orders under simultaneous (h, dt) refinement.

    Runs the scenario at h, h/2, ..., compares successive solutions on
    the shared coarse nodes at t_final, and reports observed orders.
    ``dt`` refines with ``h`` automatically through the CFL step plan.
    """
    if levels < 3:
        raise ValueError("need at least 3 refinement levels")
    factors = [2**k for k in range(levels)]
    finals = []
    for factor in factors:
        sc = _refine(scenario, factor)
        result = run_simulation(sc)
        if result.aborted:
            raise RuntimeError(f"level x{factor} aborted")
        state = result.final[0] if isinstance(result.final, (list, tuple)) else result.final
        finals.append(state.U[::factor])

    errors = []
    for a, b in zip(finals[:-1], finals[1:]):
        errors.append({
            "Linf": float(np.max(np.abs(a - b))),
            "L1": float(np.trapezoid(np.abs(a - b),
                                     dx=scenario.L / (scenario.n - 1))),
        })
    orders = []
    degenerate = all(e["Linf"] < 1e-12 for e in errors)
    for e0, e1 in zip(errors[:-1], errors[1:]):
        orders.append({
            norm: (float(np.log2(e0[norm] / e1[norm]))
                   if e1[norm] > 0 and e0[norm] > 0 else None)
            for norm in ("Linf", "L1")
        })
    report = {
        "scenario": scenario.name,
        "t_check": scenario.t_final,
        "factors": factors,
        "errors": errors,
        "orders": orders,
        "degenerate": degenerate,
    }
    if not degenerate and orders:
        worst = min(o["L1"] for o in orders if o["L1"] is not None)
        report["resolved"] = bool(worst >= 1.0)
    return report
