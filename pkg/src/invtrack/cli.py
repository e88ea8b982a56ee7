"""Command-line front end.

Every command reads an optional JSON scenario file, runs one analysis, and
writes a verdict report (plus a time series for `simulate`) into --out.
Exit status: 0 when the verdict passes, 1 when it fails, 2 on bad input.
Output files are byte-deterministic for a given scenario.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import reporting
from .closed_loop import (
    closed_loop_error_field,
    controller_error_field,
    linearize_error_field,
    observer_error_field,
    separation_matrix,
    simulate,
    time_invariance_probe,
)
from .controller import ctrl_loop_matrix
from .ekf import time_variance_probe
from .errors import InvtrackError, ScenarioError
from .mech import (
    EpSystem,
    damping_force,
    error_linearization_drift,
    gravity_gradient_force,
    integrate_ep,
    orthonormality_defect,
)
from .observer import obs_error_matrix
from .scenario import ParsedScenario, parse_scenario
from .trajectories import permanence_probe

EKF_DRIFT_FLOOR = 0.1
DEPENDENT_DRIFT_FLOOR = 1e-2
ENERGY_DRIFT_CAP = 1e-8
LINEARIZATION_MATCH_CAP = 1e-4

_DEFAULT_TOL = {
    "simulate": 1e-3,
    "eigs": 0.0,
    "separation": 1e-6,
    "invariance": 1e-6,
    "ekf-compare": 1e-6,
    "mech-lemma": 1e-6,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invtrack",
        description="Invariant tracking and estimation analyses for a wheeled robot.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "simulate": "run the closed loop and write the time series plus a verdict",
        "eigs": "design spectra and stability margins at the reference input",
        "separation": "check the closed-loop linearization splits into the two designs",
        "invariance": "check the error linearizations are frozen along the reference",
        "ekf-compare": "contrast the invariant observer with an EKF on the same run",
        "mech-lemma": "rigid-body probes: which force models keep the error field frozen",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON scenario file (defaults apply when omitted)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--dt", type=float, help="override the scenario step size")
        p.add_argument("--t-end", type=float, help="override the scenario horizon")
        p.add_argument("--tol", type=float, help="override the verdict tolerance")
    return parser


def _load_scenario(args: argparse.Namespace) -> ParsedScenario:
    doc: dict = {}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as err:
            raise ScenarioError(f"cannot read config {args.config}: {err}") from err
        except json.JSONDecodeError as err:
            raise ScenarioError(f"config {args.config} is not valid JSON: {err}") from err
    if args.dt is not None:
        doc["dt"] = args.dt
    if args.t_end is not None:
        doc["t_end"] = args.t_end
    return parse_scenario(doc)


def _tol(args: argparse.Namespace) -> float:
    return args.tol if args.tol is not None else _DEFAULT_TOL[args.command]


def _spectrum_rows(spec) -> list:
    return [[z.real, z.imag] for z in spec.values]


def _cmd_simulate(parsed: ParsedScenario, args, out_dir: Path) -> dict:
    res = simulate(parsed.scenario)
    reporting.write_text(out_dir / "timeseries.csv", reporting.timeseries_csv(res))
    final_eta = float(np.linalg.norm(res.tracking_errors[-1]))
    final_eps = float(np.linalg.norm(res.estimation_errors[-1]))
    tol = _tol(args)
    metrics = {
        "final_tracking_error": final_eta,
        "final_estimation_error": final_eps,
        "max_tracking_error": float(np.linalg.norm(res.tracking_errors, axis=1).max()),
        "max_estimation_error": float(np.linalg.norm(res.estimation_errors, axis=1).max()),
        "samples": len(res.times),
    }
    passed = final_eta <= tol and final_eps <= tol
    return reporting.verdict(
        "simulate", passed, metrics, {"final_error": tol},
        reporting.scenario_digest(parsed.canonical),
    )


def _cmd_eigs(parsed: ParsedScenario, args, out_dir: Path) -> dict:
    sc = parsed.scenario
    inp = sc.trajectory.input(0.0)
    from .numerics import eigenvalues, spectrum_match_distance

    ctrl = eigenvalues(ctrl_loop_matrix(inp.u, inp.v, sc.controller_gains))
    obs = eigenvalues(obs_error_matrix(inp.u, inp.v, sc.observer_gains))
    combined = eigenvalues(
        separation_matrix(inp.u, inp.v, sc.controller_gains, sc.observer_gains)
    )
    tol = _tol(args)
    metrics = {
        "controller_abscissa": ctrl.max_real(),
        "observer_abscissa": obs.max_real(),
        "closed_loop_abscissa": combined.max_real(),
        "union_mismatch": spectrum_match_distance(combined, ctrl.union(obs)),
        "controller_spectrum": _spectrum_rows(ctrl),
        "observer_spectrum": _spectrum_rows(obs),
        "closed_loop_spectrum": _spectrum_rows(combined),
    }
    passed = (
        ctrl.max_real() < -tol
        and obs.max_real() < -tol
        and combined.max_real() < -tol
    )
    return reporting.verdict(
        "eigs", passed, metrics, {"stability_margin": tol},
        reporting.scenario_digest(parsed.canonical),
    )


def _cmd_separation(parsed: ParsedScenario, args, out_dir: Path) -> dict:
    sc = parsed.scenario
    from .numerics import eigenvalues, spectrum_match_distance

    inp0 = sc.trajectory.input(parsed.probe_times[0])
    block = separation_matrix(inp0.u, inp0.v, sc.controller_gains, sc.observer_gains)
    union = eigenvalues(ctrl_loop_matrix(inp0.u, inp0.v, sc.controller_gains)).union(
        eigenvalues(obs_error_matrix(inp0.u, inp0.v, sc.observer_gains))
    )
    union_mismatch = spectrum_match_distance(eigenvalues(block), union)

    field = closed_loop_error_field(
        sc.trajectory, sc.landmarks, sc.controller_gains, sc.observer_gains
    )
    times = parsed.probe_times[:3]
    fd_mats = linearize_error_field(field, times)
    deviation = 0.0
    for t, mat in zip(times, fd_mats):
        inp = sc.trajectory.input(t)
        predicted = separation_matrix(
            inp.u, inp.v, sc.controller_gains, sc.observer_gains
        )
        deviation = max(deviation, float(np.linalg.norm(mat - predicted)))

    tol = _tol(args)
    metrics = {
        "spectrum_union_mismatch": union_mismatch,
        "linearization_match": deviation,
    }
    tolerances = {"spectrum_union": tol, "linearization_match": LINEARIZATION_MATCH_CAP}
    passed = union_mismatch <= tol and deviation <= LINEARIZATION_MATCH_CAP
    return reporting.verdict(
        "separation", passed, metrics, tolerances,
        reporting.scenario_digest(parsed.canonical),
    )


def _cmd_invariance(parsed: ParsedScenario, args, out_dir: Path) -> dict:
    sc = parsed.scenario
    times = parsed.probe_times
    ctrl_drift = time_invariance_probe(
        controller_error_field(sc.trajectory, sc.controller_gains), times
    )
    obs_drift = time_invariance_probe(
        observer_error_field(sc.trajectory, sc.landmarks, sc.observer_gains), times
    )
    loop_drift = time_invariance_probe(
        closed_loop_error_field(
            sc.trajectory, sc.landmarks, sc.controller_gains, sc.observer_gains
        ),
        times,
    )
    grid = [sc.t_end * k / 256.0 for k in range(257)]
    input_variation = permanence_probe(
        [sc.trajectory.pose(t) for t in grid],
        [sc.trajectory.input(t) for t in grid],
    )
    tol = _tol(args)
    metrics = {
        "controller_drift": ctrl_drift,
        "observer_drift": obs_drift,
        "closed_loop_drift": loop_drift,
        "input_variation": input_variation,
    }
    passed = ctrl_drift <= tol and obs_drift <= tol and loop_drift <= tol
    return reporting.verdict(
        "invariance", passed, metrics, {"linearization_drift": tol},
        reporting.scenario_digest(parsed.canonical),
    )


def _cmd_ekf_compare(parsed: ParsedScenario, args, out_dir: Path) -> dict:
    sc = parsed.scenario
    p = len(sc.landmarks)
    ekf_drift = time_variance_probe(
        sc.trajectory,
        sc.landmarks,
        parsed.probe_times,
        dt=sc.dt,
        Q=np.eye(3) * parsed.ekf_process_noise,
        R=np.eye(p) * parsed.ekf_measurement_noise,
        P0=np.eye(3) * parsed.ekf_initial_covariance,
    )
    obs_drift = time_invariance_probe(
        observer_error_field(sc.trajectory, sc.landmarks, sc.observer_gains),
        parsed.probe_times,
    )
    loop_drift = time_invariance_probe(
        closed_loop_error_field(
            sc.trajectory, sc.landmarks, sc.controller_gains, sc.observer_gains
        ),
        parsed.probe_times,
    )
    tol = _tol(args)
    metrics = {
        "ekf_drift": ekf_drift,
        "observer_drift": obs_drift,
        "closed_loop_drift": loop_drift,
    }
    tolerances = {"ekf_drift_min": EKF_DRIFT_FLOOR, "invariant_drift_max": tol}
    passed = ekf_drift > EKF_DRIFT_FLOOR and obs_drift <= tol and loop_drift <= tol
    return reporting.verdict(
        "ekf-compare", passed, metrics, tolerances,
        reporting.scenario_digest(parsed.canonical),
    )


def _cmd_mech_lemma(parsed: ParsedScenario, args, out_dir: Path) -> dict:
    cfg = parsed.mech
    inertia = np.diag(cfg.inertia)
    eye = np.eye(3)
    xi_r = np.asarray(cfg.reference_velocity)

    damped = EpSystem(eye, xi_r, inertia, damping_force(cfg.damping))
    velocity_drift = error_linearization_drift(damped, xi_r, cfg.probe_times)

    tilted = EpSystem(
        eye, xi_r, inertia, gravity_gradient_force(cfg.force_strength, cfg.force_axis)
    )
    attitude_drift = error_linearization_drift(tilted, xi_r, cfg.probe_times)

    free = EpSystem(eye, xi_r, inertia, None)
    times, attitudes, velocities = integrate_ep(
        free, lambda t: np.zeros(3), cfg.t_end, cfg.dt
    )
    energies = 0.5 * np.einsum("ni,ij,nj->n", velocities, inertia, velocities)
    energy_drift = float(np.max(np.abs(energies - energies[0])) / energies[0])
    defect = max(orthonormality_defect(a) for a in attitudes)

    tol = _tol(args)
    metrics = {
        "velocity_force_drift": velocity_drift,
        "attitude_force_drift": attitude_drift,
        "energy_drift": energy_drift,
        "attitude_defect": defect,
    }
    tolerances = {
        "invariant_drift_max": tol,
        "dependent_drift_min": DEPENDENT_DRIFT_FLOOR,
        "energy_drift_max": ENERGY_DRIFT_CAP,
    }
    passed = (
        velocity_drift <= tol
        and attitude_drift >= DEPENDENT_DRIFT_FLOOR
        and energy_drift <= ENERGY_DRIFT_CAP
    )
    return reporting.verdict(
        "mech-lemma", passed, metrics, tolerances,
        reporting.scenario_digest(parsed.canonical),
    )


_HANDLERS = {
    "simulate": _cmd_simulate,
    "eigs": _cmd_eigs,
    "separation": _cmd_separation,
    "invariance": _cmd_invariance,
    "ekf-compare": _cmd_ekf_compare,
    "mech-lemma": _cmd_mech_lemma,
}

_REPORT_NAME = {"eigs": "eigs.json"}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        parsed = _load_scenario(args)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        report = _HANDLERS[args.command](parsed, args, out_dir)
        name = _REPORT_NAME.get(args.command, "report.json")
        reporting.write_text(out_dir / name, reporting.json_text(report))
    except InvtrackError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    status = "pass" if report["pass"] else "FAIL"
    print(f"{args.command}: {status}")
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
