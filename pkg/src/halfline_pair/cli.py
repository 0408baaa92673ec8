"""Command-line front end.

    halfline-pair check-potential --config well.json
    halfline-pair spectrum1d      --config well.json --out results/
    halfline-pair certify         --config harmonic.json --rho 0.75
    halfline-pair spectrum2d      --config harmonic.json --X 20 --h 0.05 --symmetry plus
    halfline-pair weyl            --config harmonic.json
    halfline-pair count-bound     --config well.json --R 5,10,20
    halfline-pair sweep           --config well.json --rho 0.6,0.75,0.9

Exit status: 0 on success, 1 when a computation fails (a diagnostic JSON is
written), 2 for invalid configuration or usage.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .certificate import find_certificate, mass_function
from .counting import finiteness_audit
from .errors import ConfigError, HalflinePairError, PreconditionError
from .oned import Grid1D, agmon_check, appendix_audit, ground_state, solve_ground_state
from .potentials import PotentialSpec, check_assumptions
from .reporting import to_json_text, write_columns, write_csv, write_json
from .twod import Grid2D, discrete_below, weyl_residual

SCHEMA_VERSION = 1

# machine-readable anchors: which statement each report exercises
ANCHORS = {
    "check-potential": "standing assumptions on the pair potential: bounded negative part, tail value, "
                       "sufficient conditions for an isolated one-particle ground state",
    "spectrum1d": "one-particle operator on the half-line: isolated ground state, positivity, "
                  "exponential decay and the boundary identities it satisfies",
    "certify": "existence of a two-particle bound state below the threshold via the trial state "
               "built from the cumulative ground-state mass",
    "spectrum2d": "discrete spectrum of the exchange-sector operators below the threshold is non-empty and finite",
    "weyl": "the half-line above the threshold belongs to the essential spectrum (Weyl sequence)",
    "count-bound": "finiteness of the discrete spectrum through localisation and a Bargmann-type count",
    "sweep": "existence certificate repeated over the exponent of the trial state",
}

DEFAULTS = {
    "grid1d": {"h": 1e-3, "x_max": None, "n_points": None, "bc_origin": "neumann", "bc_outer": "dirichlet"},
    "grid2d": {"X": 20.0, "h": 0.05, "outer_bc": "dirichlet", "symmetry": "plus", "q_minus_full_dirichlet": False},
    "certificate": {"rho": [0.75], "n_max": 512},
    "counting": {"R": [5.0, 10.0, 20.0]},
    "weyl": {"X": 70.0, "h": 0.1, "k": 0.0, "n": [8, 16, 32]},
    "assumptions": {"probe_xmax": 50.0, "tol": 1e-8},
}


@dataclass
class RunConfig:
    potential: PotentialSpec
    sections: dict
    outputs: Path
    raw_potential: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        out = {"schema": SCHEMA_VERSION, "potential": self.potential.to_json()}
        out.update(copy.deepcopy(self.sections))
        out["outputs"] = str(self.outputs)
        return out


def _positive(value, name: str, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _as_list(value, name: str) -> list:
    values = value if isinstance(value, list) else [value]
    return [_positive(v, name) for v in values]


def _parse_list(text: str, name: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name} must be a comma-separated list of numbers, got {text!r}") from exc


def load_config(path: str | None, args: argparse.Namespace) -> RunConfig:
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file {path} not found") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if data.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema {data.get('schema')!r}; expected {SCHEMA_VERSION}")
    if "potential" not in data:
        raise ConfigError("config needs a 'potential' entry")
    unknown = set(data) - {"schema", "potential", "outputs", *DEFAULTS}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    spec = PotentialSpec.from_json(data["potential"])

    sections = copy.deepcopy(DEFAULTS)
    for name, section in sections.items():
        given = data.get(name, {})
        if not isinstance(given, dict):
            raise ConfigError(f"config section {name!r} must be an object")
        extra = set(given) - set(section)
        if extra:
            raise ConfigError(f"unknown keys in {name!r}: {sorted(extra)}")
        section.update(given)

    g1 = sections["grid1d"]
    if g1["x_max"] is not None:
        g1["x_max"] = _positive(g1["x_max"], "grid1d.x_max")
    if g1["n_points"] is not None:
        g1["n_points"] = _positive(g1["n_points"], "grid1d.n_points", integer=True)
        if g1["x_max"] is None:
            raise ConfigError("grid1d.n_points needs grid1d.x_max")
    g1["h"] = _positive(g1["h"], "grid1d.h")

    g2 = sections["grid2d"]
    if args.X is not None:
        g2["X"] = args.X
    if args.h is not None:
        g2["h"] = args.h
    if args.symmetry is not None:
        g2["symmetry"] = args.symmetry
    g2["X"] = _positive(g2["X"], "grid2d.X")
    g2["h"] = _positive(g2["h"], "grid2d.h")

    cert = sections["certificate"]
    if args.rho is not None:
        cert["rho"] = _parse_list(args.rho, "--rho")
    cert["rho"] = _as_list(cert["rho"], "certificate.rho")
    cert["n_max"] = _positive(cert["n_max"], "certificate.n_max", integer=True)

    cnt = sections["counting"]
    if args.R is not None:
        cnt["R"] = _parse_list(args.R, "--R")
    cnt["R"] = _as_list(cnt["R"], "counting.R")

    w = sections["weyl"]
    w["X"] = _positive(w["X"], "weyl.X")
    w["h"] = _positive(w["h"], "weyl.h")
    w["n"] = [int(_positive(n, "weyl.n", integer=True)) for n in (w["n"] if isinstance(w["n"], list) else [w["n"]])]
    if isinstance(w["k"], bool) or not isinstance(w["k"], (int, float)) or w["k"] < 0:
        raise ConfigError("weyl.k must be a non-negative number")

    a = sections["assumptions"]
    a["probe_xmax"] = _positive(a["probe_xmax"], "assumptions.probe_xmax")
    a["tol"] = _positive(a["tol"], "assumptions.tol")

    outputs = Path(args.out or data.get("outputs") or "results")
    return RunConfig(spec, sections, outputs, data["potential"])


def _one_particle(cfg: RunConfig):
    g1 = cfg.sections["grid1d"]
    if g1["n_points"] is not None:
        grid = Grid1D(g1["x_max"], g1["n_points"], g1["bc_origin"], g1["bc_outer"])
        return ground_state(cfg.potential, grid)
    return solve_ground_state(cfg.potential, g1["h"], g1["x_max"], g1["bc_origin"], g1["bc_outer"])


def _grid2d(section: dict, X=None, h=None) -> Grid2D:
    X = section["X"] if X is None else X
    h = section["h"] if h is None else h
    return Grid2D(round(X / h) * h, h, section.get("symmetry", "plus"), section.get("outer_bc", "dirichlet"),
                  section.get("q_minus_full_dirichlet", False))


def cmd_check_potential(cfg: RunConfig) -> dict:
    a = cfg.sections["assumptions"]
    return check_assumptions(cfg.potential, a["probe_xmax"], a["tol"]).to_json()


def cmd_spectrum1d(cfg: RunConfig) -> dict:
    res = _one_particle(cfg)
    out = res.to_json()
    write_columns(cfg.outputs / "psi0.csv", ["x", "psi0"], res.x, res.psi0)
    out["audit"] = appendix_audit(cfg.potential, res).to_json()
    if res.below_tail:
        try:
            out["agmon"] = agmon_check(cfg.potential, res, 0.9).to_json()
        except HalflinePairError as exc:
            out["agmon"] = {"error": str(exc)}
    return out


def _certificate(cfg: RunConfig, res, rho: float):
    F = mass_function(res)
    return find_certificate(cfg.potential, F, rho, n_max=cfg.sections["certificate"]["n_max"])


def _trace_rows(report):
    return [(t.n, t.A, t.B, t.C, t.D, t.G) for t in report.trace]


def cmd_certify(cfg: RunConfig) -> dict:
    res = _one_particle(cfg)
    rho = cfg.sections["certificate"]["rho"][0]
    report = _certificate(cfg, res, rho)
    write_csv(cfg.outputs / "gn_trace.csv", ["n", "A", "B_n", "C_n", "D_n", "G_n"], _trace_rows(report))
    return {"eps0": res.eps0, "b_confirmed": res.b_confirmed, "certificate": report.to_json()}


def cmd_sweep(cfg: RunConfig) -> dict:
    res = _one_particle(cfg)
    rhos = cfg.sections["certificate"]["rho"]
    with ThreadPoolExecutor() as pool:
        reports = list(pool.map(lambda r: _certificate(cfg, res, r), rhos))
    for rho, rep in zip(rhos, reports):
        write_csv(cfg.outputs / f"gn_trace_rho{rho:g}.csv", ["n", "A", "B_n", "C_n", "D_n", "G_n"], _trace_rows(rep))
    return {"eps0": res.eps0, "b_confirmed": res.b_confirmed, "certificates": [r.to_json() for r in reports]}


def cmd_spectrum2d(cfg: RunConfig) -> dict:
    res = _one_particle(cfg)
    grid = _grid2d(cfg.sections["grid2d"])
    return discrete_below(cfg.potential, grid, res.eps0).to_json()


def cmd_weyl(cfg: RunConfig) -> dict:
    w = cfg.sections["weyl"]
    grid = Grid2D(round(w["X"] / w["h"]) * w["h"], w["h"], "plus",
                  cfg.sections["grid2d"].get("outer_bc", "dirichlet"))
    rows = [weyl_residual(cfg.potential, None, float(w["k"]), n, grid).to_json() for n in w["n"]]
    ratios = [a["residual"] / b["residual"] for a, b in zip(rows, rows[1:])]
    return {"residuals": rows, "decrease_factors": ratios}


def cmd_count_bound(cfg: RunConfig) -> dict:
    res = _one_particle(cfg)
    out = []
    for R in cfg.sections["counting"]["R"]:
        rep = finiteness_audit(cfg.potential, res, R)
        write_columns(cfg.outputs / f"Z_R{R:g}.csv", ["x2", "Z_R"], rep.Z.x, rep.Z.Z)
        out.append(rep.to_json())
    return {"eps0": res.eps0, "e2": res.e2, "reports": out}


COMMANDS = {
    "check-potential": cmd_check_potential,
    "spectrum1d": cmd_spectrum1d,
    "certify": cmd_certify,
    "spectrum2d": cmd_spectrum2d,
    "weyl": cmd_weyl,
    "count-bound": cmd_count_bound,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="halfline-pair", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=ANCHORS[name])
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (default: config 'outputs' or ./results)")
        p.add_argument("--rho", help="comma-separated trial exponents in (1/2, 1)")
        p.add_argument("--R", help="comma-separated localisation radii")
        p.add_argument("--X", type=float, help="2D truncation length")
        p.add_argument("--h", type=float, help="2D grid spacing")
        p.add_argument("--symmetry", choices=("plus", "minus"), help="exchange sector")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    report = {"command": args.command, "paper_ref": ANCHORS[args.command], "config": cfg.resolved()}
    try:
        report["result"] = COMMANDS[args.command](cfg)
    except (ConfigError, PreconditionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (HalflinePairError, ArithmeticError) as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        for attr in ("eigenvalues", "residuals"):
            if getattr(exc, attr, None) is not None:
                report["error"][attr] = list(getattr(exc, attr))
        write_json(cfg.outputs / f"{args.command}.error.json", report)
        sys.stdout.write(to_json_text(report))
        return 1
    path = write_json(cfg.outputs / f"{args.command}.json", report)
    print(path)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
