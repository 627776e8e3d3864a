"""Command-line surface: catalog browsing, transformation, equivalence
checking, linearization, simulation, and verification.

Config files are flat ``key = value`` text with JSON-typed values (strings
quoted, arrays in brackets); unknown keys are rejected and the file is echoed
verbatim into every report for provenance.  All output is deterministic.

Exit codes: 0 success, 1 config error, 2 mathematical obstruction (with
witness), 3 tolerance failure, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import coupled, equivalence, fieldgrid, gauge, gauged, solver
from .errors import (
    BlowUp,
    ConfigError,
    DomainError,
    NlsGaugeError,
    NonConservingModel,
    NotIntegrable,
    PeriodicityViolation,
)
from .fieldgrid import FLOOR_DEFAULT, ComplexField, Grid1D
from .models import (
    RhoExpr,
    model_from_config,
    model_to_config,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_OBSTRUCTION = 2
EXIT_TOLERANCE = 3
EXIT_SOLVER = 4


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; values are JSON literals.  Blank lines and
    lines starting with '#' are ignored."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            out[key] = json.loads(value.strip())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return out


def load_config(path: str | None) -> tuple[dict, str]:
    if path is None:
        raise ConfigError("this command requires --config <path>")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config_text(text), text


_FAMILY_KEYS = {
    "dnls": {"b"},
    "doebner-goldin": {"c", "D"},
    "eip": {"kappa"},
    "entropic": {"kappa_fn", "D", "G"},
    "five-function": {"f1", "f2", "f3", "f4", "f5"},
    "gauged-anomalous": {"q", "D", "alpha"},
    "eip-transformed": {"kappa"},
    "entropic-transformed": {"g1", "g2", "G", "D"},
}


def check_keys(cfg: dict, allowed: set, required: set = frozenset()) -> None:
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = sorted(required - set(cfg))
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")


def model_keys_for(cfg: dict) -> set:
    family = cfg.get("family")
    if family not in _FAMILY_KEYS:
        raise ConfigError(f"unknown family {family!r}")
    return {"family"} | _FAMILY_KEYS[family]


def build_model(cfg: dict):
    try:
        return model_from_config(cfg)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad model config: {exc}") from exc


_GRID_KEYS = {"x_min", "x_max", "n", "boundary"}
_INIT_KEYS = {"amplitude", "width", "center", "momentum", "psi_csv"}
_SOLVER_KEYS = {"scheme", "dt", "t_end", "snapshot_every"}


def build_grid(cfg: dict) -> Grid1D:
    try:
        return Grid1D(
            x_min=float(cfg.get("x_min", -20.0)),
            x_max=float(cfg.get("x_max", 20.0)),
            n=int(cfg.get("n", 512)),
            boundary=cfg.get("boundary", "dirichlet"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_initial_state(cfg: dict, grid: Grid1D) -> ComplexField:
    if "psi_csv" in cfg:
        try:
            return fieldgrid.read_field_csv(cfg["psi_csv"], boundary=grid.boundary)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"bad psi_csv: {exc}") from exc
    amp = float(cfg.get("amplitude", 0.8))
    width = float(cfg.get("width", 16.0))
    center = float(cfg.get("center", 0.0))
    momentum = float(cfg.get("momentum", 0.0))
    if amp <= 0 or width <= 0:
        raise ConfigError("amplitude and width must be positive")
    x = grid.x
    values = amp * np.exp(-((x - center) ** 2) / width) * np.exp(1j * momentum * x)
    return ComplexField(values=values.astype(complex), grid=grid)


def build_solver_config(cfg: dict, floor: float) -> solver.SolverConfig:
    return solver.SolverConfig(
        scheme=cfg.get("scheme", "CrankNicolsonFD"),
        dt=float(cfg.get("dt", 1e-3)),
        t_end=float(cfg.get("t_end", 1.0)),
        snapshot_every=int(cfg.get("snapshot_every", 100)),
        floor=floor,
    )


def rho_expr_from(cfg_value) -> RhoExpr:
    try:
        return RhoExpr.from_triples(cfg_value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad coefficient triples: {exc}") from exc


# ---------------------------------------------------------------------------
# report output
# ---------------------------------------------------------------------------


def _fmt(value, indent: str = "") -> str:
    if isinstance(value, dict):
        lines = []
        for k, v in value.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}{k}:")
                lines.append(_fmt(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {_fmt(v)}")
        return "\n".join(lines)
    if isinstance(value, list):
        return "\n".join(f"{indent}- {json.dumps(v)}" for v in value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return f"{value}"


def write_report(out_dir: str, name: str, config_text: str, body: dict) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    lines = ["# configuration (verbatim)"]
    lines += ["# | " + ln for ln in config_text.splitlines()]
    lines.append("")
    lines.append("# result")
    lines.append(_fmt(body))
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return path


def write_plot(out_dir: str, name: str, xs, ys) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        for x, y in zip(xs, ys):
            fh.write("%.17g %.17g\n" % (x, y))
    return path


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

_CATALOG = {
    "dnls": (
        "parameters b1, b2, b3, b4; W = b1 rho + b2 rho^2 + b3 rho dS, "
        "J = b4 rho^2; canonical iff b3 = -2 b4; "
        "generator sigma = (b4/2) int rho dx"
    ),
    "doebner-goldin": (
        "parameters c1..c5, D; W = sum c_i R_i over "
        "R1 = div(rho grad S)/rho, R2 = lap rho/rho, R3 = (grad S)^2, "
        "R4 = grad S.grad rho/rho, R5 = (grad rho/rho)^2; J = D grad rho; "
        "canonical iff c1 = -c4 = D, c3 = 0, c2 = -2 c5; "
        "generator sigma = (D/2) log rho"
    ),
    "eip": (
        "parameter kappa; W = -2 kappa rho (dS)^2, J = 2 kappa rho^2 dS; "
        "generator sigma = kappa int rho dS dx (nonlocal; curl-obstructed for n > 1)"
    ),
    "entropic": (
        "parameters kappa(rho), D, G(rho); W = -D f(rho) lap S + G, "
        "J = -D f grad rho with f = rho (log kappa)'; "
        "generator sigma = (D/2) log kappa (requires monomial kappa)"
    ),
    "five-function": (
        "parameters f1..f5 (functions of rho); "
        "W = f1 lap S + f2 grad rho.grad S + f3 (grad rho)^2 + f4 lap rho, "
        "J = 2 f5 grad rho; closed under gauge push-forward; "
        "generator sigma = int (f5/rho) drho"
    ),
    "gauged-anomalous": (
        "parameters q, D, alpha; W = qD rho^{q-1} lap S + alpha-terms, "
        "J = Dq rho^{q-1} grad rho; "
        "generator sigma = (D/2)(q rho^{q-1} - 1)/(q - 1), log form at q = 1"
    ),
    "eip-transformed": (
        "parameter kappa; real nonlinearity "
        "-2 kappa rho/(1 + kappa rho) (dS)^2 + (kappa/2) rho lap log rho; J = 0"
    ),
    "entropic-transformed": (
        "parameters g1, g2, G, D; real nonlinearity "
        "-(D^2/2)[g1 lap rho + g2 (grad rho)^2] + G(rho); J = 0"
    ),
}


def cmd_catalog(args) -> int:
    if args.family is not None:
        if args.family not in _CATALOG:
            sys.stderr.write(f"unknown family {args.family!r}\n")
            return EXIT_CONFIG
        sys.stdout.write(f"{args.family}: {_CATALOG[args.family]}\n")
        return EXIT_OK
    for name in _CATALOG:
        sys.stdout.write(f"{name}: {_CATALOG[name]}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# transform / equiv / linearize
# ---------------------------------------------------------------------------


def cmd_transform(args, floor: float) -> int:
    cfg, text = load_config(args.config)
    check_keys(cfg, model_keys_for(cfg) | {"dims"}, {"family"})
    model = build_model(cfg)
    dims = args.dims if args.dims is not None else int(cfg.get("dims", 1))
    ok, reason = gauge.curl_condition_holds(model, dims)
    if not ok:
        sys.stderr.write(f"curl condition fails for n>1: {reason}\n")
        return EXIT_OBSTRUCTION
    result = gauge.transform_model(model)
    body = {
        "original": model_to_config(model),
        "dims": dims,
        "curl_condition": reason,
    }
    body.update(result.to_report())
    write_report(args.out, "transform_report.txt", text, body)
    return EXIT_OK


def cmd_equiv(args, floor: float) -> int:
    cfg, text = load_config(args.config)
    keys = {f"f{i}" for i in range(1, 6)} | {f"g{i}" for i in range(1, 6)}
    check_keys(cfg, keys, keys)
    from .models import FiveFunction

    f = FiveFunction(*(rho_expr_from(cfg[f"f{i}"]) for i in range(1, 6)))
    g = FiveFunction(*(rho_expr_from(cfg[f"g{i}"]) for i in range(1, 6)))
    result = equivalence.equivalence_generator(f, g)
    if isinstance(result, equivalence.NotEquivalent):
        body = {"equivalent": False, "witness": result.witness}
        write_report(args.out, "equiv_report.txt", text, body)
        sys.stderr.write(f"not equivalent: {result.witness}\n")
        return EXIT_OBSTRUCTION
    body = {"equivalent": True, "generator_omega": result.to_triples()}
    write_report(args.out, "equiv_report.txt", text, body)
    return EXIT_OK


def cmd_linearize(args, floor: float) -> int:
    cfg, text = load_config(args.config)
    keys = {f"f{i}" for i in range(1, 6)}
    check_keys(cfg, keys, keys)
    from .models import FiveFunction

    f = FiveFunction(*(rho_expr_from(cfg[f"f{i}"]) for i in range(1, 6)))
    result = equivalence.linearizable(f)
    if isinstance(result, equivalence.NotLinearizable):
        body = {"linearizable": False, "witness": result.witness}
        write_report(args.out, "linearize_report.txt", text, body)
        sys.stderr.write(f"not linearizable: {result.witness}\n")
        return EXIT_OBSTRUCTION
    body = {"linearizable": True, "generator_omega": result.to_triples()}
    write_report(args.out, "linearize_report.txt", text, body)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate / verify
# ---------------------------------------------------------------------------


def cmd_simulate(args, floor: float) -> int:
    cfg, text = load_config(args.config)
    check_keys(
        cfg,
        model_keys_for(cfg) | _GRID_KEYS | _INIT_KEYS | _SOLVER_KEYS,
        {"family"},
    )
    model = build_model(cfg)
    grid = build_grid(cfg)
    psi0 = build_initial_state(cfg, grid)
    scfg = build_solver_config(cfg, floor)
    traj = solver.integrate(model, psi0, scfg)
    solver.export_trajectory(traj, args.out, floor)
    write_plot(args.out, "plot_N.dat", traj.times, [d["N"] for d in traj.diagnostics])
    write_plot(
        args.out,
        "plot_continuity.dat",
        traj.times,
        [d["continuity_residual"] for d in traj.diagnostics],
    )
    body = {
        "snapshots": len(traj.times),
        "t_end": traj.times[-1],
        "N_initial": traj.diagnostics[0]["N"],
        "N_drift": traj.n_drift(),
        "max_continuity_residual": max(
            d["continuity_residual"] for d in traj.diagnostics
        ),
    }
    write_report(args.out, "simulate_report.txt", text, body)
    return EXIT_OK


_VERIFY_TOL_KEYS = {
    "tolerance_rho",
    "tolerance_phase",
    "tolerance_collapse",
    "tolerance_N",
}


def cmd_verify(args, floor: float) -> int:
    cfg, text = load_config(args.config)
    mode = cfg.get("mode", "equivalence")
    if mode == "linearization":
        check_keys(
            cfg,
            {"mode", "D", "tolerance_rho"} | _GRID_KEYS | _INIT_KEYS | _SOLVER_KEYS,
            {"D"},
        )
        grid = build_grid(cfg)
        psi0 = build_initial_state(cfg, grid)
        scfg = build_solver_config(cfg, floor)
        report = solver.verify_linearization(float(cfg["D"]), psi0, scfg)
        tol = args.tolerance if args.tolerance is not None else float(
            cfg.get("tolerance_rho", 1e-4)
        )
        body = dict(report.to_report())
        body["tolerance_rho"] = tol
        body["passed"] = report.max_rho_discrepancy <= tol
        write_report(args.out, "verify_report.txt", text, body)
        if not body["passed"]:
            sys.stderr.write(
                "tolerance exceeded: max_rho_discrepancy = %.3e > %.3e\n"
                % (report.max_rho_discrepancy, tol)
            )
            return EXIT_TOLERANCE
        return EXIT_OK
    if mode != "equivalence":
        raise ConfigError(f"unknown verify mode {mode!r}")
    check_keys(
        cfg,
        model_keys_for(cfg)
        | {"mode"}
        | _GRID_KEYS
        | _INIT_KEYS
        | _SOLVER_KEYS
        | _VERIFY_TOL_KEYS,
        {"family"},
    )
    model = build_model(cfg)
    grid = build_grid(cfg)
    psi0 = build_initial_state(cfg, grid)
    scfg = build_solver_config(cfg, floor)
    report = solver.verify_equivalence(model, psi0, scfg)
    tols = {
        "tolerance_rho": float(cfg.get("tolerance_rho", 1e-5)),
        "tolerance_phase": float(cfg.get("tolerance_phase", 1e-5)),
        "tolerance_collapse": float(cfg.get("tolerance_collapse", 1e-8)),
        "tolerance_N": float(cfg.get("tolerance_N", 1e-8)),
    }
    if args.tolerance is not None:
        tols = {k: args.tolerance for k in tols}
    residuals = {
        "tolerance_rho": report.max_rho_discrepancy,
        "tolerance_phase": report.phase_relation_residual,
        "tolerance_collapse": report.current_collapse_residual,
        "tolerance_N": max(report.N_drift_original, report.N_drift_transformed),
    }
    body = dict(report.to_report())
    body.update(tols)
    failed = sorted(k for k in tols if residuals[k] > tols[k])
    body["passed"] = not failed
    path = write_report(args.out, "verify_report.txt", text, body)
    traj = solver.integrate(model, psi0, scfg)
    write_plot(args.out, "plot_N.dat", traj.times, [d["N"] for d in traj.diagnostics])
    write_plot(
        args.out,
        "plot_continuity.dat",
        traj.times,
        [d["continuity_residual"] for d in traj.diagnostics],
    )
    solver.export_trajectory(traj, os.path.join(args.out, "trajectory"), floor)
    if failed:
        sys.stderr.write("tolerance exceeded:\n")
        for k in failed:
            sys.stderr.write(
                "  %s: residual %.3e > %.3e\n" % (k, residuals[k], tols[k])
            )
        return EXIT_TOLERANCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# coupled / gauged
# ---------------------------------------------------------------------------


def cmd_coupled_transform(args, floor: float) -> int:
    cfg, text = load_config(args.config)
    check_keys(
        cfg,
        {"p", "a", "b", "c", "d", "e", "fpot", "multiplets"},
        {"p", "a", "b", "c", "d", "e"},
    )
    try:
        model = coupled.CoupledModel.make(
            p=int(cfg["p"]),
            a=cfg["a"],
            b=cfg["b"],
            c=cfg["c"],
            d=cfg["d"],
            e=cfg["e"],
            fpot=cfg.get("fpot"),
            multiplets=cfg.get("multiplets"),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad coupled model: {exc}") from exc
    result = coupled.transform_coupled(model)
    body = dict(result.to_report())
    body["special_reduction"] = repr(coupled.special_reduction(model))
    write_report(args.out, "coupled_transform_report.txt", text, body)
    return EXIT_OK


def cmd_gauged_transform(args, floor: float) -> int:
    cfg, text = load_config(args.config)
    check_keys(cfg, {"q", "D", "alpha", "side"}, {"q", "D", "alpha"})
    try:
        model = gauged.GaugedAnomalous(
            Fraction(cfg["q"]), Fraction(cfg["D"]), Fraction(cfg["alpha"])
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad model parameters: {exc}") from exc
    side = cfg.get("side", "matter")
    if side not in ("matter", "field"):
        raise ConfigError(f"side must be 'matter' or 'field', got {side!r}")
    result = gauged.matter_transform(model)
    body = dict(result.to_report())
    body["side"] = side
    if side == "field":
        body["note"] = (
            "field-side route: shift the potential by the generator gradient; "
            "same generator and beta as the matter route"
        )
    write_report(args.out, "gauged_transform_report.txt", text, body)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nls-gauge",
        description="gauge transformations of the third kind for 1-D NLSEs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, needs_config=True):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        p.add_argument("--config", default=None, help="run configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--tolerance", type=float, default=None)
        p.add_argument("--dims", type=int, default=None)
        return p

    cat = sub.add_parser("catalog")
    cat.set_defaults(func=None)
    cat.add_argument("--family", default=None)

    add("transform", cmd_transform)
    add("equiv", cmd_equiv)
    add("linearize", cmd_linearize)
    add("simulate", cmd_simulate)
    add("verify", cmd_verify)
    add("coupled-transform", cmd_coupled_transform)
    add("gauged-transform", cmd_gauged_transform)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "catalog":
        return cmd_catalog(args)
    floor = FLOOR_DEFAULT
    env_floor = os.environ.get("MG_FLOOR")
    if env_floor is not None:
        try:
            floor = float(env_floor)
        except ValueError:
            sys.stderr.write(f"config error: bad MG_FLOOR {env_floor!r}\n")
            return EXIT_CONFIG
        if floor <= 0:
            sys.stderr.write("config error: MG_FLOOR must be positive\n")
            return EXIT_CONFIG
    try:
        return args.func(args, floor)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (NotIntegrable, NonConservingModel, PeriodicityViolation, DomainError) as exc:
        sys.stderr.write(f"mathematical obstruction: {exc}\n")
        return EXIT_OBSTRUCTION
    except BlowUp as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_SOLVER
    except NlsGaugeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
