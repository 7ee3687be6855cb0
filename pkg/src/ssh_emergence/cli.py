"""Command-line front end.

Every subcommand prints a short human-readable summary. With ``--output``
it also writes a CSV (15 significant digits, no timestamps) and a JSON
manifest ``<output>.manifest.json`` holding the resolved parameters and the
CSV's SHA-256.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bloch import CrystalSpec, all_band_edges, dispersion_curve
from .errors import GapClosedError, SSHEmergenceError, ValidationError
from .homotopy import (HomotopyConfig, endpoint_topology, gap_scan, min_gap)
from .reduction import dimer_crystal, hopping_report, ssh_limit, tight_binding_check
from .single_well import (WellParams, asymptotic_energy, in_asymptotic_regime,
                          solve_ground_state)
from .ssh import (FiniteChain, SSHParams, dispersion, edge_mode_count, spectral_gap,
                  winding_number)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4
EXIT_RESOURCE = 5

EXIT_CODES_HELP = """exit codes:
  0  success
  2  usage error (bad flag, unknown config key)
  3  validation error (parameters violate a model invariant, e.g. closed gap
     or overlapping wells)
  4  numerical failure (band-edge scan or convergence)
  5  resource guard (matrix too large)
"""

COMMANDS = ("ssh", "single-well", "bands", "reduce", "homotopy", "finite-volume")

REQUIRED = object()

# per command: parameter name -> (type, default)
PARAMETERS = {
    "ssh": {"t_in": (float, REQUIRED), "t_out": (float, REQUIRED), "n_cells": (int, 40),
            "n_k": (int, 65), "winding": (bool, False), "tol": (float, None)},
    "single-well": {"lambda": (float, REQUIRED), "w": (float, REQUIRED)},
    "bands": {"lambda": (float, REQUIRED), "d_in": (float, REQUIRED),
              "d_out": (float, REQUIRED), "w_a": (float, REQUIRED), "w_b": (float, REQUIRED),
              "n_k": (int, 64)},
    "reduce": {"lambda": (list, REQUIRED), "d": (float, 0.5), "w": (float, 0.1),
               "alpha": (float, 1 / 15)},
    "homotopy": {"lambda": (float, 10.0), "d": (float, 0.5), "w": (float, 0.1),
                 "alpha": (float, 1 / 15), "beta": (float, 1 / 20), "n_eps": (int, 201)},
    "finite-volume": {"lambda": (float, REQUIRED), "d": (float, 0.5), "w": (float, 0.1),
                      "alpha": (float, 1 / 15), "n_cells": (int, 8),
                      "points_per_cell": (int, 4096)},
}


class UsageError(SSHEmergenceError):
    exit_code = EXIT_USAGE


@dataclass
class RunConfig:
    command: str
    params: dict
    output_path: Path | None = None
    format: str = "pretty"
    svg_path: Path | None = None
    extra: dict = field(default_factory=dict)


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.15g}"


def to_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def read_csv(text: str):
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    return header, [[float(v) for v in line.split(",")] for line in lines[1:]]


def atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_").lower()] = value
    return values


def _coerce(name, kind, raw):
    try:
        if kind is bool:
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is list:
            items = raw if isinstance(raw, list) else str(raw).replace(",", " ").split()
            return [float(v) for v in items]
        return kind(raw)
    except (TypeError, ValueError):
        raise UsageError(f"--{name.replace('_', '-')}: cannot parse {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssh-emergence",
        description="Band structures of square-well dimer crystals, their SSH "
                    "tight-binding limits, and the gap-preserving homotopy between "
                    "the two dimerizations.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="flat key = value parameter file")
        p.add_argument("--output", "-o", type=Path, help="write CSV here (plus manifest)")
        p.add_argument("--format", choices=("csv", "pretty"), default="pretty",
                       help="stdout format (default: pretty)")
        return p

    def depth(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--lambda", dest="lambda_", type=float, default=None,
                       help="well depth parameter; potential is -lambda^2 in the wells")
        g.add_argument("--lambda2", type=float, default=None, help="lambda^2 instead of lambda")

    p = common(sub.add_parser("ssh", help="discrete SSH chain",
                              epilog=EXIT_CODES_HELP,
                              formatter_class=argparse.RawDescriptionHelpFormatter))
    p.add_argument("--t-in", type=float)
    p.add_argument("--t-out", type=float)
    p.add_argument("--n-cells", type=int)
    p.add_argument("--n-k", type=int)
    p.add_argument("--winding", action="store_const", const=True, default=None,
                   help="require and report the winding number")
    p.add_argument("--tol", type=float, help="edge-mode threshold (default gap/4)")

    p = common(sub.add_parser("single-well", help="single square-well ground state"))
    depth(p)
    p.add_argument("--w", type=float)

    p = common(sub.add_parser("bands", help="two lowest bands of a crystal"))
    depth(p)
    for flag in ("--d-in", "--d-out", "--w-a", "--w-b"):
        p.add_argument(flag, type=float)
    p.add_argument("--n-k", type=int)

    p = common(sub.add_parser("reduce", help="tight-binding hoppings rho1, rho2"))
    g = p.add_mutually_exclusive_group()
    g.add_argument("--lambda", dest="lambda_", type=float, nargs="+", default=None)
    g.add_argument("--lambda2", type=float, nargs="+", default=None)
    for flag in ("--d", "--w", "--alpha"):
        p.add_argument(flag, type=float)

    p = common(sub.add_parser("homotopy", help="gap scan along the deformation path"))
    depth(p)
    for flag in ("--d", "--w", "--alpha", "--beta"):
        p.add_argument(flag, type=float)
    p.add_argument("--n-eps", type=int)
    p.add_argument("--svg", type=Path, help="also write an SVG line chart of the scan")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel processes (default $SSH_EMERGENCE_THREADS or 1)")

    p = common(sub.add_parser("finite-volume",
                              help="finite chain of wells against the SSH bands"))
    depth(p)
    for flag in ("--d", "--w", "--alpha"):
        p.add_argument(flag, type=float)
    p.add_argument("--n-cells", type=int)
    p.add_argument("--points-per-cell", type=int)
    return parser


def parse_config(argv, config_file=None) -> RunConfig:
    """Resolve defaults < config file < flags into a validated RunConfig."""
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    spec = PARAMETERS[command]
    raw = {}
    path = config_file or getattr(args, "config", None)
    if path is not None:
        file_values = read_config_file(path)
        if "lambda2" in file_values and "lambda" in spec:
            value = file_values.pop("lambda2")
            file_values["lambda"] = (
                [math.sqrt(v) for v in _coerce("lambda2", list, value)]
                if spec["lambda"][0] is list else math.sqrt(_coerce("lambda2", float, value)))
        unknown = sorted(set(file_values) - set(spec))
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
        raw.update(file_values)

    flags = vars(args)
    for name in spec:
        key = "lambda_" if name == "lambda" else name
        if flags.get(key) is not None:
            raw[name] = flags[key]
    if "lambda" in spec and flags.get("lambda2") is not None:
        value = flags["lambda2"]
        raw["lambda"] = [math.sqrt(v) for v in value] if isinstance(value, list) else math.sqrt(value)

    params = {}
    for name, (kind, default) in spec.items():
        if name in raw:
            params[name] = _coerce(name, kind, raw[name])
        elif default is not REQUIRED:
            params[name] = default
        else:
            raise UsageError(f"missing required parameter --{name.replace('_', '-')}")

    config = RunConfig(command=command, params=params, output_path=args.output,
                       format=args.format, svg_path=getattr(args, "svg", None),
                       extra={"workers": getattr(args, "workers", None)})
    validate(config)
    return config


def validate(config: RunConfig):
    """Build the module objects once so invariant violations surface early."""
    p = config.params
    if config.command == "ssh":
        params = SSHParams(p["t_in"], p["t_out"])
        FiniteChain(p["n_cells"], params)
        if p["winding"] and not params.gapped:
            raise GapClosedError(
                f"gap closed: t_in == t_out == {p['t_in']}; winding number undefined")
    elif config.command == "single-well":
        WellParams(p["lambda"], p["w"])
    elif config.command == "bands":
        _crystal(p)
    elif config.command == "reduce":
        for lam in p["lambda"]:
            dimer_crystal(lam, p["d"], p["w"], p["alpha"])
    elif config.command == "homotopy":
        _homotopy_config(p)
    elif config.command == "finite-volume":
        dimer_crystal(p["lambda"], p["d"], p["w"], p["alpha"])
        if p["n_cells"] < 8 or p["points_per_cell"] < 256:
            raise ValidationError("finite-volume needs n_cells >= 8 and points_per_cell >= 256")


def _crystal(p):
    return CrystalSpec(lam=p["lambda"], d_in=p["d_in"], d_out=p["d_out"],
                       w_A=p["w_a"], w_B=p["w_b"])


def _homotopy_config(p):
    return HomotopyConfig(lam=p["lambda"], d=p["d"], w=p["w"], alpha=p["alpha"],
                          beta=p["beta"], n_eps=p["n_eps"])


def _run_ssh(p):
    params = SSHParams(p["t_in"], p["t_out"])
    ks = np.linspace(0, 2 * np.pi, p["n_k"])
    lower, upper = dispersion(params, ks)
    header = ["k", "E_minus", "E_plus"]
    rows = list(zip(ks, lower, upper))
    chain = FiniteChain(p["n_cells"], params)
    summary = {"t_in": params.t_in, "t_out": params.t_out, "gap": spectral_gap(params)}
    if params.gapped:
        summary["winding"] = winding_number(params)
        summary["edge_modes"] = edge_mode_count(chain, p["tol"])
    return header, rows, summary


def _run_single_well(p):
    well = WellParams(p["lambda"], p["w"])
    st = solve_ground_state(well)
    header = ["lambda", "w", "e0", "q", "kappa", "A", "asymptotic_e0", "asymptotic_valid"]
    row = [well.lam, well.w, st.e0, st.q, st.kappa, st.norm_A, asymptotic_energy(well),
           in_asymptotic_regime(well)]
    summary = dict(zip(header, row))
    if not summary["asymptotic_valid"]:
        summary["note"] = "asymptotic regime invalid (lambda * w is not large)"
    return header, [row], summary


def _run_bands(p):
    crystal = _crystal(p)
    k1, e1 = dispersion_curve(crystal, 1, p["n_k"])
    _, e2 = dispersion_curve(crystal, 2, p["n_k"])
    periodic, antiperiodic = all_band_edges(crystal, 2)
    summary = {"mu1(0)": periodic[0], "mu2(0)": periodic[1],
               "mu1(pi)": antiperiodic[0], "mu2(pi)": antiperiodic[1],
               "gap0": periodic[1] - periodic[0], "gapPi": antiperiodic[1] - antiperiodic[0]}
    return ["k", "E_band1", "E_band2"], list(zip(k1, e1, e2)), summary


def _run_reduce(p):
    header = ["lambda", "rho1", "rho2", "ratio", "exp_minus_alpha", "deviation"]
    rows = []
    target = math.exp(-p["alpha"])
    for lam in p["lambda"]:
        rep = hopping_report(dimer_crystal(lam, p["d"], p["w"], p["alpha"]), p["alpha"])
        rows.append([lam, rep.rho1, rep.rho2, rep.ratio, target, abs(rep.ratio - target)])
    last = hopping_report(dimer_crystal(p["lambda"][-1], p["d"], p["w"], p["alpha"]))
    limit = ssh_limit(last)
    summary = {"t_in": limit.t_in, "t_out": limit.t_out}
    if limit.gapped:
        summary["winding"] = winding_number(limit)
    return header, rows, summary


def _run_homotopy(p, workers=None):
    config = _homotopy_config(p)
    scan = gap_scan(config, workers)
    header = ["eps", "mu1_0", "mu2_0", "mu1_pi", "mu2_pi", "gap0", "gapPi"]
    rows = [[r.eps, r.mu1_0, r.mu2_0, r.mu1_pi, r.mu2_pi, r.gap0, r.gapPi] for r in scan]
    summary = {"min gap c_lambda": min_gap(scan)}
    try:
        summary["endpoint indices (eps=-1, eps=+1)"] = endpoint_topology(config)
    except GapClosedError as exc:
        summary["endpoint indices"] = f"undefined ({exc})"
    return header, rows, summary


def _run_finite_volume(p):
    crystal = dimer_crystal(p["lambda"], p["d"], p["w"], p["alpha"])
    check = tight_binding_check(crystal, p["n_cells"], p["points_per_cell"])
    header = ["index", "E_minus_e0", "rescaled", "edge_artifact"]
    scale = max(abs(check.rho1), abs(check.rho2))
    rows = [[i, v * scale, v, a] for i, (v, a) in
            enumerate(zip(check.rescaled, check.edge_artifact))]
    summary = {"r": check.r, "e0 (grid)": check.e0, "rho1": check.rho1, "rho2": check.rho2,
               "band distance": check.distance,
               "edge artifacts": int(np.count_nonzero(check.edge_artifact))}
    return header, rows, summary


def svg_chart(rows, width=640, height=420) -> str:
    """Four band-edge curves against eps as a standalone SVG."""
    data = np.array([[r[0], r[1], r[2], r[3], r[4]] for r in rows], dtype=float)
    eps, curves = data[:, 0], data[:, 1:]
    pad = 50
    lo, hi = float(curves.min()), float(curves.max())
    span = hi - lo or 1.0

    def px(e, v):
        x = pad + (e + 1) / 2 * (width - 2 * pad)
        y = height - pad - (v - lo) / span * (height - 2 * pad)
        return f"{x:.2f},{y:.2f}"

    colors = ["#d4a017", "#d4a017", "#1f5fbf", "#1f5fbf"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">eps</text>',
             f'<text x="12" y="{height / 2}" transform="rotate(-90 12 {height / 2})" '
             'text-anchor="middle">eigenvalues</text>']
    for col, color in enumerate(colors):
        pts = " ".join(px(e, v) for e, v in zip(eps, curves[:, col]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def run(config: RunConfig, stdout=None) -> int:
    out = stdout or sys.stdout
    start = time.perf_counter()
    p = config.params
    if config.command == "homotopy":
        header, rows, summary = _run_homotopy(p, config.extra.get("workers"))
    else:
        runner = {"ssh": _run_ssh, "single-well": _run_single_well, "bands": _run_bands,
                  "reduce": _run_reduce, "finite-volume": _run_finite_volume}[config.command]
        header, rows, summary = runner(p)
    text = to_csv(header, rows)
    if config.format == "csv":
        out.write(text)
    elif len(rows) <= 20:
        print("  ".join(f"{h:>16}" for h in header), file=out)
        for row in rows:
            print("  ".join(f"{fmt(v):>16}" for v in row), file=out)
    for key, value in summary.items():
        shown = fmt(value) if isinstance(value, (float, int, np.floating)) else value
        print(f"{key}: {shown}", file=out if config.format == "pretty" else sys.stderr)
    if config.output_path is not None:
        atomic_write(config.output_path, text)
        manifest = {
            "command": config.command,
            "parameters": p,
            "version": __version__,
            "duration_s": round(time.perf_counter() - start, 3),
            "output": str(config.output_path),
            "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        }
        atomic_write(Path(str(config.output_path) + ".manifest.json"),
                     json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if config.svg_path is not None:
        atomic_write(config.svg_path, svg_chart(rows))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
        return run(config)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except SSHEmergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
