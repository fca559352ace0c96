"""Command-line front end.

Usage::

    emdyn <task> --scenario <path> [--out <dir>] [--seed <n>] [--margin <x>]

Tasks: simulate, equivalence, controllability, bounds, circuit-validate,
tones.  Each run writes ``results.csv``, ``report.json`` and a
``manifest.json`` (input hash, seed, library versions, output hashes) into
the output directory.  Given the same scenario and seed, outputs are
byte-identical across runs.  Exit codes: 0 success, 2 parse or validation
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, bounds, circuit, control, emergent, liouville
from .errors import EmdynError, NumericalError, ParseError, ValidationError
from .scenario import VALID_TASKS, Scenario, parse_scenario

__all__ = ["main", "run"]

_FMT = "%.16e"


def _fmt(value) -> str:
    return _FMT % float(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _marginal_purities(rho: np.ndarray, dims) -> tuple[float, float]:
    from .opcore import partial_trace
    r1 = partial_trace(rho, dims, [0])
    r2 = partial_trace(rho, dims, [1])
    return (float(np.real(np.trace(r1 @ r1))),
            float(np.real(np.trace(r2 @ r2))))


# --------------------------------------------------------------------------
# task runners: each returns (csv_header, csv_rows, report_dict)
# --------------------------------------------------------------------------

def _times(scenario: Scenario, default=(1.0,)) -> list[float]:
    sweep = scenario.sweep or {}
    return [float(t) for t in sweep.get("t", list(default))]


def _run_simulate(scenario: Scenario, rng, margin):
    c = scenario.build_coupling()
    rho1 = scenario.initial_state("rho1", c.d1)
    rho2 = scenario.initial_state("rho2", c.d2)
    rho0 = np.kron(rho1, rho2)
    gen = liouville.build_full_generator(c)
    dims = (c.d1, c.d2)
    rows = []
    for t in _times(scenario):
        rho = liouville.propagate(gen, rho0, t)
        p1, p2 = _marginal_purities(rho, dims)
        purity = float(np.real(np.trace(rho @ rho)))
        rows.append([t, purity, p1, p2])
    report = {
        "task": "simulate",
        "dims": list(dims),
        "final_purity": float(rows[-1][1]),
        "final_s1_purity": float(rows[-1][2]),
        "final_s2_purity": float(rows[-1][3]),
    }
    return ["t", "purity", "s1_purity", "s2_purity"], rows, report


def _run_equivalence(scenario: Scenario, rng, margin):
    c = scenario.build_coupling()
    rho1 = scenario.initial_state("rho1", c.d1)
    rho2 = scenario.initial_state("rho2", c.d2)
    sweep = scenario.sweep or {}
    gammas = [float(g) for g in sweep.get("gamma", [c.gamma])]
    times = _times(scenario)
    rows = []
    exponents = {}
    for t in times:
        gaps = []
        for g in gammas:
            ci = liouville.DissipativeCoupling(
                A=c.A, B=c.B, gamma=g, eta=c.eta, phi=c.phi, g=c.g)
            gaps.append(emergent.equivalence_gap(ci, rho1, rho2, t))
        if len(gammas) >= 4 and gammas[-1] >= 100 * gammas[0]:
            exponent, _ = emergent.fit_power_law(np.array(gammas),
                                                 np.array(gaps))
        else:
            exponent = float("nan")
        exponents[_fmt(t)] = exponent
        for g, gap in zip(gammas, gaps):
            rows.append([g, t, gap, exponent])
    report = {
        "task": "equivalence",
        "gammas": gammas,
        "times": times,
        "fitted_exponent_per_t": exponents,
        "min_trace_distance": min(r[2] for r in rows),
        "max_trace_distance": max(r[2] for r in rows),
    }
    return ["gamma", "t", "trace_distance", "fitted_exponent"], rows, report


def _run_controllability(scenario: Scenario, rng, margin):
    c = scenario.build_coupling()
    controls = scenario.control_operators()
    lambda_a = float((scenario.system or {}).get("lambda_a", 1.0))
    n_without, n_with = control.controllability_delta(c, lambda_a, controls)
    d = c.d2
    full = d * d - 1
    rows = [[float(n_without), float(n_with), float(full)]]
    report = {
        "task": "controllability",
        "space_dim": d,
        "dim_without_drift": n_without,
        "dim_with_drift": n_with,
        "fully_controllable_without": n_without == full,
        "fully_controllable_with": n_with == full,
    }
    return ["dim_without_drift", "dim_with_drift", "full_dim"], rows, report


def _run_bounds(scenario: Scenario, rng, margin):
    c = scenario.build_coupling()
    psi0_rho = scenario.initial_state("psi0", c.d2)
    w, v = np.linalg.eigh(psi0_rho)
    psi0 = v[:, int(np.argmax(w))]
    rows = []
    for t in _times(scenario):
        task = bounds.make_gate_task(c, psi0, t)
        exact = bounds.exact_error_commuting(task)
        ub = bounds.error_upper_bound(task)
        emp = bounds.empirical_error(task)
        thr = bounds.gamma_threshold(task, margin=margin)
        rows.append([t, exact, ub, emp, thr])
    report = {
        "task": "bounds",
        "margin": margin,
        "gamma": c.gamma,
        "all_bounded": bool(all(r[3] <= r[2] + 1e-9 for r in rows)),
        "max_empirical_error": max(r[3] for r in rows),
        "max_upper_bound": max(r[2] for r in rows),
    }
    return ["t", "exact_error", "upper_bound", "empirical_error",
            "gamma_threshold"], rows, report


def _circuit_params(scenario: Scenario) -> circuit.CircuitParams:
    sec = scenario.circuit
    if sec is None:
        raise ValidationError("scenario has no circuit section")
    mode_sec = sec.get("mode")
    if not isinstance(mode_sec, dict):
        raise ValidationError("circuit section requires a mode mapping")
    mode = circuit.BosonicMode(n_max=int(mode_sec["n_max"]),
                               omega_z=float(mode_sec["omega_z"]),
                               gamma_z=float(mode_sec["gamma_z"]))
    return circuit.CircuitParams(
        E_J=float(sec["E_J"]), phi_ext=float(sec["phi_ext"]),
        phi0=float(sec.get("phi0", 1.0)), phi_z0=float(sec.get("phi_z0", 1.0)),
        alpha_x=float(sec.get("alpha_x", 1.0)),
        alpha_y=float(sec.get("alpha_y", 1.0)),
        lambda_1z=float(sec["lambda_1z"]), lambda_2z=float(sec["lambda_2z"]),
        lambda_3z=float(sec["lambda_3z"]),
        Omega=tuple(float(w) for w in sec["Omega"]), mode=mode)


def _run_circuit_validate(scenario: Scenario, rng, margin):
    params = _circuit_params(scenario)
    phi = float((scenario.circuit or {}).get("phi", np.pi / 2))
    ec = circuit.effective_coupling_constants(params)
    value, ok = circuit.strong_damping_condition(params)
    satisfied, direction = circuit.nonreciprocity_conditions(params, phi)
    rows = [[ec.Lambda, ec.beta, ec.gamma_eff, ec.eta_over_gamma, value]]
    report = {
        "task": "circuit-validate",
        "Lambda": ec.Lambda,
        "beta": ec.beta,
        "gamma_eff": ec.gamma_eff,
        "eta_over_gamma": ec.eta_over_gamma,
        "strong_damping_value": value,
        "strong_damping_ok": ok,
        "phi": phi,
        "nonreciprocity_satisfied": satisfied,
        "nonreciprocity_direction": direction,
        "dispersive_ok": params.dispersive_ok,
    }
    return (["Lambda", "beta", "gamma_eff", "eta_over_gamma",
             "strong_damping_value"], rows, report)


def _run_tones(scenario: Scenario, rng, margin):
    sec = scenario.tones
    if sec is None:
        raise ValidationError("scenario has no tones section")
    Omega = tuple(float(w) for w in sec["Omega"])
    phi_y = tuple(float(p) for p in sec.get("phi_y", (0.0, 0.0, 0.0)))
    plan = sec.get("plan", "dissipative")
    if plan == "dissipative":
        ts = circuit.plan_dissipative_tones(
            Omega, float(sec["omega_z"]), float(sec.get("phi_x1", 0.0)),
            phi_y, collisions=sec.get("collisions"))
    elif plan == "coherent":
        ts = circuit.plan_coherent_tones(Omega, phi_y)
    else:
        raise ValidationError(f"unknown tone plan {plan!r}; valid plans: "
                              "dissipative, coherent")
    rows = []
    for m in range(3):
        wy, py = ts.y_tones[m]
        rows.append([float(m + 1), wy, py, ts.phase_sum[m], ts.phase_diff[m]])
    report = ts.as_dict()
    report["task"] = "tones"
    return (["channel", "y_frequency", "y_phase", "phase_sum", "phase_diff"],
            rows, report)


_RUNNERS = {
    "simulate": _run_simulate,
    "equivalence": _run_equivalence,
    "controllability": _run_controllability,
    "bounds": _run_bounds,
    "circuit-validate": _run_circuit_validate,
    "tones": _run_tones,
}


def run(scenario: Scenario, out_dir, seed: int | None = None,
        margin: float | None = None, scenario_bytes: bytes | None = None) -> int:
    """Execute a parsed scenario and write artifacts into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if seed is None:
        seed = scenario.seed
    if margin is None:
        margin = float(scenario.margin) if scenario.margin is not None else 100.0
    rng = np.random.default_rng(seed)
    header, rows, report = _RUNNERS[scenario.task](scenario, rng, margin)
    report["name"] = scenario.name
    report["seed"] = seed
    csv_path = out / "results.csv"
    json_path = out / "report.json"
    _write_csv(csv_path, header, rows)
    _write_json(json_path, report)
    if scenario_bytes is None:
        scenario_bytes = scenario.emit().encode("utf-8")
    manifest = {
        "scenario_sha256": hashlib.sha256(scenario_bytes).hexdigest(),
        "task": scenario.task,
        "seed": seed,
        "versions": {
            "emdyn": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
        "outputs": {
            "results.csv": _sha256(csv_path),
            "report.json": _sha256(json_path),
        },
    }
    _write_json(out / "manifest.json", manifest)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="emdyn",
        description="Dissipatively generated dynamics: simulation, "
                    "equivalence sweeps, controllability, error bounds, and "
                    "circuit-level tooling.")
    parser.add_argument("task", choices=VALID_TASKS, help="analysis to run")
    parser.add_argument("--scenario", required=True, help="scenario YAML file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    parser.add_argument("--margin", type=float, default=None,
                        help="safety margin for threshold estimates")
    args = parser.parse_args(argv)
    try:
        raw = Path(args.scenario).read_bytes()
        scenario = parse_scenario(raw.decode("utf-8"))
        if scenario.task != args.task:
            raise ValidationError(
                f"scenario declares task {scenario.task!r} but "
                f"{args.task!r} was requested")
        out_dir = args.out
        if out_dir is None:
            out_dir = (scenario.output or {}).get("path", "emdyn-out")
        return run(scenario, out_dir, seed=args.seed, margin=args.margin,
                   scenario_bytes=raw)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except EmdynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
