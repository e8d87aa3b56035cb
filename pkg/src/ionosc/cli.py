"""Command-line front end.

Exit codes: 0 ok, 1 comparison over tolerance, 2 usage/config error,
3 numerical invariant violated during a run.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config, parse_matrix, resolved_summary
from .scenario import NumericalInvariantError, deviation_metrics, run, theory_probabilities
from .theory import (
    MassSpectrum,
    flavor_index,
    flavor_labels,
    probability_exact,
    probability_ultra,
    rotation2,
    tribimaximal,
)

EXIT_OK, EXIT_TOL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(x):
    return format(float(x), ".17g")


def write_csv(header, rows, out):
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(x) for x in row) + "\n")


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="\n")


def parse_mixing_flag(text):
    if text == "tribimaximal":
        return tribimaximal()
    if text.startswith("rotation2:"):
        try:
            return rotation2(float(text.split(":", 1)[1]))
        except ValueError:
            raise UsageError(f"bad rotation angle in {text!r}") from None
    path = Path(text)
    if not path.is_file():
        raise UsageError(f"--mixing must be tribimaximal, rotation2:THETA or a JSON file, got {text!r}")
    data = json.loads(path.read_text())
    rows = data["matrix"] if isinstance(data, dict) else data
    try:
        return parse_matrix(rows)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{text}: {exc}") from None


def _float_list(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_theory(args):
    U = parse_mixing_flag(args.mixing)
    if len(args.masses) != U.dim:
        raise UsageError(f"{len(args.masses)} masses given for a {U.dim}-flavor mixing matrix")
    try:
        alpha = flavor_index(int(args.alpha) if args.alpha.isdigit() else args.alpha, U.dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n = int(np.floor(args.tmax / args.dt + 1e-9)) + 1
    t = np.arange(n) * args.dt
    masses = MassSpectrum(args.masses)
    if args.mode == "exact":
        cols = [probability_exact(U, masses, args.cp, alpha, b, t) for b in range(U.dim)]
    else:
        if not args.cp > 0:
            raise UsageError("--mode ultra needs --cp > 0")
        cols = [probability_ultra(U, masses.delta_m2(), args.cp, alpha, b, t) for b in range(U.dim)]
    header = ["t_ms"] + [f"P_{f}" for f in flavor_labels(U.dim)]
    out = _open_out(args.output)
    try:
        write_csv(header, np.column_stack([t] + cols), out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def record_header(flavors):
    return ["t_ms"] + [f"P_{f}" for f in flavors] + ["leakage", "norm"]


def cmd_simulate(args):
    raw, config = load_config(args.config)
    outputs = raw.get("output", {})
    csv_path = args.csv or outputs.get("csv")
    json_path = args.json or outputs.get("json")
    if json_path is None and csv_path not in (None, "-"):
        json_path = str(Path(csv_path).with_suffix(".json"))
    record = run(config)
    rows = np.column_stack([record.times, record.P, record.leakage, record.norm])
    total = record.P.sum(axis=1) + record.leakage
    if np.max(np.abs(total - 1.0)) > 1e-8:
        raise NumericalInvariantError("probability row sum drifted beyond 1e-8")
    out = _open_out(csv_path)
    try:
        write_csv(record_header(record.flavors), rows, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if json_path:
        sidecar = {
            "config": {k: v for k, v in raw.items() if k != "output"},
            "resolved": resolved_summary(config),
            "diagnostics": record.diagnostics,
            "columns": record_header(record.flavors),
        }
        Path(json_path).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def read_record(path):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        rows = [[float(x) for x in row] for row in reader if row]
    if not header or header[0] != "t_ms":
        raise UsageError(f"{path}: not a simulation record (missing t_ms header)")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    flavors = [h[2:] for h in header if h.startswith("P_")]
    return header, data, flavors


def cmd_compare(args):
    header, data, flavors = read_record(args.record)
    raw, config = load_config(args.config)
    if tuple(flavors) != tuple(config.flavors):
        raise UsageError(f"record flavors {flavors} do not match config flavors {list(config.flavors)}")
    sidecar = Path(args.record).with_suffix(".json")
    if sidecar.is_file():
        echoed = json.loads(sidecar.read_text()).get("config")
        if echoed is not None and echoed != {k: v for k, v in raw.items() if k != "output"}:
            raise UsageError(f"record {args.record} was produced from a different config")
    times = data[:, 0]
    P = data[:, 1 : 1 + len(flavors)]
    reference = P if args.self_compare else theory_probabilities(config, times)
    metrics = deviation_metrics(P, reference, config.flavors)
    metrics["tol"] = args.tol
    metrics["pass"] = metrics["max_abs_dev"] <= args.tol
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return EXIT_OK if metrics["pass"] else EXIT_TOL


def _spectrum_rows(config, p):
    pair, enc = config.hamiltonian
    masses = config.mass_spectrum.masses
    H = pair.h(p)
    rows = []
    for k in range(enc.n_generations):
        idx = enc.block(k)
        w = np.linalg.eigvalsh(H[np.ix_(idx, idx)])
        rows.append([f"nu{k + 1}", fmt(masses[k]), fmt(w[0]), fmt(w[1])])
    if enc.leftover:
        idx = np.array(enc.leftover)
        w = np.linalg.eigvalsh(H[np.ix_(idx, idx)])
        rows.append(["leftover", "", fmt(w[0]), fmt(w[-1])])
    return rows


def cmd_spectrum(args):
    _, config = load_config(args.config)
    p = config.central_momentum if args.p is None else args.p
    print("block,mass,E_min,E_max")
    for row in _spectrum_rows(config, p):
        print(",".join(row))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="ionosc", description="Trapped-ion neutrino oscillation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="analytic flavor probabilities as CSV")
    p.add_argument("--mixing", default="tribimaximal", help="tribimaximal | rotation2:THETA | matrix JSON file")
    p.add_argument("--masses", type=_float_list, required=True, help="rest-mass energies in kHz, e.g. 5,6,7")
    p.add_argument("--cp", type=float, required=True, help="kinetic energy c|p| in kHz")
    p.add_argument("--alpha", default="e", help="initial flavor (e, mu, tau or index)")
    p.add_argument("--tmax", type=float, default=10.0, help="final time in ms")
    p.add_argument("--dt", type=float, default=0.01, help="time step in ms")
    p.add_argument("--mode", choices=["exact", "ultra"], default="exact")
    p.add_argument("-o", "--output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("simulate", help="run an ion simulation from a JSON config")
    p.add_argument("config")
    p.add_argument("--csv", help="CSV path (default: config output.csv or stdout)")
    p.add_argument("--json", help="JSON sidecar path (default: CSV path with .json suffix)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare a simulation record against theory")
    p.add_argument("record")
    p.add_argument("config")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--self", dest="self_compare", action="store_true", help="compare the record with itself")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("spectrum", help="block eigenvalues of the configured Hamiltonian")
    p.add_argument("config")
    p.add_argument("--p", type=float, help="momentum (default: config central momentum)")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "dt", 1.0) <= 0:
        print("ionosc: error: --dt must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"ionosc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalInvariantError as exc:
        print(f"ionosc: numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"ionosc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
