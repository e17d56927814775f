"""Command-line interface: spectral reports, focusing simulations, closure checks.

Exit codes: 0 success, 1 verification-negative (nonzero closure residual),
2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path as FilePath

import numpy as np

from . import __version__
from .closure import BUILTIN_CASES, load_case, verify_closure
from .contact import (ContactConfig, FitReport, LockingDiagnostics, TrajectoryRecord,
                      constraint_drift, fit_decay_rate, locking_diagnostics, run_focusing)
from .drift import (KIND_DUFFING, KIND_HARMONIC, KIND_LINEAR, KIND_SCALAR_DECAY,
                    SYSTEM_KINDS, DriftSystem, duffing, eval_jacobian, harmonic,
                    linear, scalar_decay)
from .errors import BlowUpError, FitError, InputError
from .report import render_focusing_figure, write_json, write_trajectory_csv
from .spectral import amplification_rate, duffing_regime

THREADS_ENV = "CONTACT_FOCUS_THREADS"

# Parameters of the reference focusing experiment (underdamped regime).
FIG1_PARAMS = {"delta": 0.3, "alpha": 1.0, "beta": 1.0, "gamma": 0.5, "omega": 1.2}

# Default fiber perturbations: perturbation-scale vectors in the sector where
# the short-window envelope fit resolves the predicted rate (see README).
DEFAULT_FIG1_PHI0 = ((0.010, 0.004), (0.007, 0.007), (0.004, 0.010))

_CONFIG_KEYS = {"system", "mode", "y0", "phi0", "h2_0", "c", "t_end", "h",
                "stride", "fit_window", "envelope_fit", "output_dir", "emit_svg"}
_SYSTEM_KEYS = {
    KIND_DUFFING: {"kind", "delta", "alpha", "beta", "gamma", "omega"},
    KIND_LINEAR: {"kind", "matrix"},
    KIND_HARMONIC: {"kind"},
    KIND_SCALAR_DECAY: {"kind", "lam"},
}


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Simulation config: one ContactConfig template plus multi-case plumbing."""

    system: DriftSystem
    mode: str
    y0: list
    phi0_cases: list
    h2_0: np.ndarray
    c: float
    t_end: float
    h: float
    stride: int
    fit_window: tuple[float, float]
    envelope_fit: bool
    output_dir: str | None
    emit_svg: bool

    def case(self, k: int) -> ContactConfig:
        return ContactConfig(system=self.system, mode=self.mode, y0=self.y0,
                             phi0=self.phi0_cases[k], h2_0=self.h2_0, c=self.c,
                             t_end=self.t_end, h=self.h, stride=self.stride,
                             fit_window=self.fit_window,
                             envelope_fit=self.envelope_fit)


def _build_system(spec: dict) -> DriftSystem:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InputError("'system' must be an object with a 'kind' key")
    kind = spec["kind"]
    if kind not in SYSTEM_KINDS:
        raise InputError(f"unknown system kind {kind!r}; expected one of {SYSTEM_KINDS}")
    unknown = set(spec) - _SYSTEM_KEYS[kind]
    if unknown:
        raise InputError(f"unknown {kind} parameter keys: {sorted(unknown)}")
    if kind == KIND_DUFFING:
        return duffing(**{k: float(v) for k, v in spec.items() if k != "kind"})
    if kind == KIND_LINEAR:
        if "matrix" not in spec:
            raise InputError("linear system requires 'matrix'")
        return linear(spec["matrix"])
    if kind == KIND_HARMONIC:
        return harmonic()
    if "lam" not in spec:
        raise InputError("scalar_decay system requires 'lam'")
    return scalar_decay(float(spec["lam"]))


def load_run_config(payload: dict) -> RunConfig:
    if not isinstance(payload, dict):
        raise InputError("config must be a JSON object")
    unknown = set(payload) - _CONFIG_KEYS
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    missing = {"system", "y0", "phi0", "t_end", "fit_window"} - set(payload)
    if missing:
        raise InputError(f"missing config keys: {sorted(missing)}")
    system = _build_system(payload["system"])
    m = system.dim
    phi0_raw = payload["phi0"]
    if not isinstance(phi0_raw, list) or not phi0_raw:
        raise InputError("'phi0' must be a non-empty list of fiber vectors")
    if not isinstance(phi0_raw[0], list):
        raise InputError("'phi0' must be a list of vectors (wrap a single case in a list)")
    h2_0 = payload.get("h2_0", "identity")
    h2_0 = np.eye(m) if h2_0 == "identity" else np.asarray(h2_0, dtype=float)
    window = payload["fit_window"]
    if not (isinstance(window, list) and len(window) == 2):
        raise InputError("'fit_window' must be a [t_lo, t_hi] pair")
    try:
        cfg = RunConfig(
            system=system,
            mode=payload.get("mode", "coupled"),
            y0=payload["y0"],
            phi0_cases=phi0_raw,
            h2_0=h2_0,
            c=float(payload.get("c", 0.0)),
            t_end=float(payload["t_end"]),
            h=float(payload.get("h", 1e-3)),
            stride=int(payload.get("stride", 10)),
            fit_window=(float(window[0]), float(window[1])),
            envelope_fit=bool(payload.get("envelope_fit", True)),
            output_dir=payload.get("output_dir"),
            emit_svg=bool(payload.get("emit_svg", False)),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed config value: {exc}") from exc
    for k in range(len(cfg.phi0_cases)):
        cfg.case(k)  # validates every case eagerly
    return cfg


def _predicted_sigma(config: RunConfig) -> float | None:
    rep = amplification_rate(eval_jacobian(config.system, 0.0,
                                           np.zeros(config.system.dim)))
    return rep.sigma


def _provenance(config: RunConfig) -> dict:
    sysd = {"kind": config.system.kind}
    if config.system.kind == KIND_DUFFING:
        p = config.system.params
        sysd.update(delta=p.delta, alpha=p.alpha, beta=p.beta, gamma=p.gamma,
                    omega=p.omega)
    elif config.system.kind == KIND_LINEAR:
        sysd["matrix"] = config.system.params.tolist()
    elif config.system.kind == KIND_SCALAR_DECAY:
        sysd["lam"] = config.system.params
    return {
        "tool": "contactfocus",
        "version": __version__,
        "system": sysd,
        "mode": config.mode,
        "y0": list(map(float, config.y0)),
        "phi0_cases": [list(map(float, v)) for v in config.phi0_cases],
        "h2_0": np.asarray(config.h2_0, dtype=float).tolist(),
        "c": config.c,
        "t_end": config.t_end,
        "h": config.h,
        "stride": config.stride,
        "fit_window": list(config.fit_window),
        "envelope_fit": config.envelope_fit,
    }


def _case_report(record: TrajectoryRecord, sigma: float | None
                 ) -> tuple[dict, FitReport | None]:
    drift_eps = constraint_drift(record)
    entry: dict = {
        "constraint_drift": drift_eps,
        "constraint_gate": 1e-6 * (1.0 + abs(float(record.epsilon[0]))),
        "max_deviation": float(record.deviation.max()),
        "final_deviation": float(record.deviation[-1]),
        "zero_fiber": bool(np.all(record.config.phi0 == 0.0)),
    }
    fit = None
    try:
        fit = fit_decay_rate(record, predicted_sigma=sigma)
        entry["fit"] = fit.as_dict()
    except FitError as exc:
        entry["fit"] = None
        entry["fit_error"] = str(exc)
    if sigma is not None:
        try:
            diag = locking_diagnostics(record, sigma)
            entry["locking"] = diag.as_dict()
        except FitError as exc:
            entry["locking"] = None
            entry["locking_error"] = str(exc)
    return entry, fit


def _run_cases(config: RunConfig) -> list[TrajectoryRecord]:
    n_cases = len(config.phi0_cases)
    max_workers = n_cases
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            max_workers = max(1, min(n_cases, int(env)))
        except ValueError as exc:
            raise InputError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    if max_workers == 1 or n_cases == 1:
        return [run_focusing(config.case(k)) for k in range(n_cases)]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda k: run_focusing(config.case(k)), range(n_cases)))


def _simulate_to_dir(config: RunConfig, out_dir: FilePath) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    records = _run_cases(config)
    sigma = _predicted_sigma(config)
    report = {"provenance": _provenance(config), "predicted_sigma": sigma, "cases": []}
    fits: list[FitReport | None] = []
    for k, record in enumerate(records):
        csv_path = out_dir / f"trajectory_{k}.csv"
        write_trajectory_csv(csv_path, record)
        entry, fit = _case_report(record, sigma)
        entry["csv"] = csv_path.name
        report["cases"].append(entry)
        fits.append(fit)
    if config.emit_svg:
        figure_path = out_dir / "fig1.svg"
        render_focusing_figure(figure_path, records, fits, sigma, config.fit_window)
        report["figure"] = figure_path.name
    write_json(out_dir / "report.json", report)
    return report


# -- subcommands -------------------------------------------------------------


def cmd_spectral(args) -> int:
    if args.system == KIND_DUFFING:
        if args.delta is None or args.alpha is None:
            print("spectral: duffing requires --delta and --alpha", file=sys.stderr)
            return 2
        if args.delta > 0 and args.alpha > 0:
            rep = duffing_regime(args.delta, args.alpha)
        else:
            rep = amplification_rate([[0.0, 1.0], [-args.alpha, -args.delta]])
        params = {"delta": args.delta, "alpha": args.alpha}
    elif args.system == KIND_SCALAR_DECAY:
        if args.lam is None:
            print("spectral: scalar_decay requires --lam", file=sys.stderr)
            return 2
        rep = amplification_rate(eval_jacobian(scalar_decay(args.lam), 0.0, [0.0]))
        params = {"lam": args.lam}
    elif args.system == KIND_LINEAR:
        if args.matrix is None:
            print("spectral: linear requires --matrix", file=sys.stderr)
            return 2
        try:
            system = linear(json.loads(args.matrix))
        except (json.JSONDecodeError, InputError) as exc:
            print(f"spectral: bad --matrix: {exc}", file=sys.stderr)
            return 2
        rep = amplification_rate(system.params)
        params = {"matrix": system.params.tolist()}
    else:
        rep = amplification_rate(eval_jacobian(harmonic(), 0.0, [0.0, 0.0]))
        params = {}
    payload = {"system": args.system, "params": params}
    payload.update(rep.as_dict())
    print(json.dumps(payload, indent=2))
    return 0


def cmd_simulate(args) -> int:
    path = FilePath(args.config)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"simulate: cannot read config: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"simulate: config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    config = load_run_config(payload)
    out_dir = args.out or config.output_dir
    if out_dir is None:
        print("simulate: no output directory (set 'output_dir' or pass --out)",
              file=sys.stderr)
        return 2
    _simulate_to_dir(config, FilePath(out_dir))
    return 0


def fig1_config(out_dir: str | None = None) -> RunConfig:
    """The reference experiment: three fiber perturbations of the underdamped system."""
    tau_f = 2.0 / FIG1_PARAMS["delta"]
    t_end = 20.0
    return RunConfig(
        system=duffing(**FIG1_PARAMS),
        mode="coupled",
        y0=[0.0, 0.0],
        phi0_cases=[list(v) for v in DEFAULT_FIG1_PHI0],
        h2_0=np.eye(2),
        c=0.0,
        t_end=t_end,
        h=1e-3,
        stride=10,
        fit_window=(tau_f, min(3.0 * tau_f, t_end)),
        envelope_fit=True,
        output_dir=out_dir,
        emit_svg=True,
    )


def cmd_fig1(args) -> int:
    _simulate_to_dir(fig1_config(args.outdir), FilePath(args.outdir))
    return 0


def cmd_closure(args) -> int:
    if args.case in BUILTIN_CASES:
        data = BUILTIN_CASES[args.case]()
    else:
        path = FilePath(args.case)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            print(f"closure: not a built-in case ({sorted(BUILTIN_CASES)}) and "
                  f"cannot read as file: {exc}", file=sys.stderr)
            return 2
        except json.JSONDecodeError as exc:
            print(f"closure: case file is not valid JSON: {exc}", file=sys.stderr)
            return 2
        data = load_case(payload)
    report = verify_closure(data, p_max=args.p_max)
    print(json.dumps(report.as_dict(), indent=2))
    return 0 if report.all_zero else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contactfocus",
        description="Contact-dynamics focusing experiments and closure verification")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_spec = sub.add_parser("spectral", help="eigenvalues, rate, and timescale as JSON")
    p_spec.add_argument("--system", required=True, choices=list(SYSTEM_KINDS))
    p_spec.add_argument("--delta", type=float)
    p_spec.add_argument("--alpha", type=float)
    p_spec.add_argument("--beta", type=float, default=1.0)
    p_spec.add_argument("--gamma", type=float, default=0.5)
    p_spec.add_argument("--omega", type=float, default=1.2)
    p_spec.add_argument("--lam", type=float)
    p_spec.add_argument("--matrix", help="JSON matrix for the linear system")
    p_spec.set_defaults(func=cmd_spectral)

    p_sim = sub.add_parser("simulate", help="run the coupled flow from a JSON config")
    p_sim.add_argument("config", help="path to the run config (strict JSON schema)")
    p_sim.add_argument("--out", help="output directory (overrides config output_dir)")
    p_sim.set_defaults(func=cmd_simulate)

    p_fig = sub.add_parser("fig1", help="run the reference focusing experiment")
    p_fig.add_argument("outdir", help="output directory for CSVs, report.json, fig1.svg")
    p_fig.set_defaults(func=cmd_fig1)

    p_clo = sub.add_parser("closure", help="verify closure residuals of a potential")
    p_clo.add_argument("case", help=f"built-in case {sorted(BUILTIN_CASES)} or a JSON file")
    p_clo.add_argument("--p-max", type=int, default=None, dest="p_max")
    p_clo.set_defaults(func=cmd_closure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2
    except BlowUpError as exc:
        print(f"{args.command}: numerical failure: {exc}", file=sys.stderr)
        return 3
    except FitError as exc:
        print(f"{args.command}: fit failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
