"""Command-line entry point: simulate, experiment, fit, serve, client.

All output is plain text: transcripts as JSON lines, experiment tables as
CSV.  Every command is deterministic given --seed, and numeric fields use
the shortest round-trip decimal so repeated runs are byte-identical.

Exit codes: 0 success, 2 usage error, 3 runtime or protocol failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, harness, net
from .datagen import BetaScaled, Cohort, TruncNormal, fixed_cohort, iid_cohort
from .params import choose_params
from .protocol import ProtocolConfig, Transcript, run_private_min

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

RESULT_COLUMNS = ("n", "epsilon", "mechanism", "param_mode", "x_min",
                  "mean_abs_err", "q05", "q95", "reps", "seed")


class UsageError(ValueError):
    pass


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _jsonable(value):
    # strict JSON has no Infinity literal; 'inf' survives a float() round trip
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def transcript_json_lines(transcript: Transcript) -> str:
    """One JSON object per round, then a summary line with the estimate."""
    lines = [
        json.dumps({"round": r.round, "tau": r.tau, "sum_z": r.sum_z,
                    "phi": _jsonable(r.phi), "branch": r.branch})
        for r in transcript.rounds
    ]
    cfg = transcript.config
    lines.append(json.dumps({
        "estimate": transcript.estimate,
        "degenerate_gamma": transcript.degenerate_gamma,
        "n": cfg.n, "epsilon": _jsonable(cfg.epsilon), "depth": cfg.depth,
        "gamma": cfg.gamma,
    }))
    return "\n".join(lines) + "\n"


def write_result_csv(rows, out_path) -> None:
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, col)) for col in RESULT_COLUMNS])


def write_guideline_csv(points, out_path) -> None:
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "guideline_value"])
        for n, value in points:
            writer.writerow([str(n), repr(float(value))])


def _parse_epsilon(text: str) -> float:
    value = float(text)
    if math.isnan(value) or value <= 0:
        raise UsageError(f"--epsilon must be positive (or 'inf'), got {text!r}")
    return value


def _build_model(args):
    kind = args.model
    x_min, delta = args.x_min, args.delta
    if kind == "uniform":
        return BetaScaled(1.0, 1.0, x_min, delta)
    if kind == "beta":
        return BetaScaled(args.model_alpha, args.model_beta, x_min, delta)
    if kind == "truncnorm":
        return TruncNormal(args.mu, args.sigma, x_min, x_min + delta)
    raise UsageError(f"unknown model {kind!r}")


def _simulate_cohort(args, rng) -> Cohort:
    if args.data is not None:
        try:
            values = [float(s) for s in args.data.split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"--data must be a comma-separated list of reals") from None
        if not values:
            raise UsageError("--data is empty")
        if args.n is not None and args.n != len(values):
            raise UsageError(f"--n {args.n} does not match {len(values)} --data values")
        return Cohort(np.array(values), args.setting)
    if args.n is None:
        raise UsageError("either --n (with --model) or --data is required")
    model = _build_model(args)
    if args.setting == "fixed":
        return fixed_cohort(model, args.n)
    return iid_cohort(model, args.n, rng)


def cmd_simulate(args) -> int:
    if (args.gamma is None) == (args.param_mode is None):
        raise UsageError("pass exactly one of --gamma or --param-mode")
    if args.gamma is not None and args.depth is None:
        raise UsageError("--gamma requires --depth")
    if args.param_mode is not None and args.depth is not None:
        raise UsageError("--depth conflicts with --param-mode (the schedule sets it)")

    epsilon = _parse_epsilon(args.epsilon)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
    try:
        cohort = _simulate_cohort(args, rng)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    if args.param_mode is not None:
        params = choose_params(args.param_mode, cohort.n, epsilon)
        depth, gamma = params.depth, params.gamma
    else:
        depth, gamma = args.depth, args.gamma

    config = ProtocolConfig(epsilon=epsilon, depth=depth, gamma=gamma, n=cohort.n)
    transcript = run_private_min(cohort, config, rng)
    text = transcript_json_lines(transcript)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = harness.parse_experiment_config(args.config)
    cells = harness.run_experiment(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_result_csv(cells, out_dir / "results.csv")

    # guidelines anchor on the bisection mechanism's worst-case curve
    binary = [c for c in cells if c.mechanism == harness.MECH_BINARY_SEARCH]
    for epsilon in spec.epsilon_grid:
        curve_cells = sorted((c for c in binary if c.epsilon == epsilon), key=lambda c: c.n)
        if not curve_cells:
            continue
        anchor = curve_cells[-1].mean_abs_err
        points = harness.guideline_curve(spec.param_mode, spec.model.fat_alpha,
                                         [c.n for c in curve_cells], epsilon,
                                         anchor=anchor)
        write_guideline_csv(points, out_dir / f"guideline_eps{epsilon:g}.csv")

    meta = {
        "config": str(args.config),
        "quantiles": "q05/q95 taken at the worst x_min placement, not pooled",
        "worst_rule": "per cell, max over xmin_grid of the per-placement mean error",
        "seed": spec.seed,
    }
    (out_dir / "run_meta.json").write_text(json.dumps(meta, indent=2) + "\n",
                                           encoding="utf-8")
    return EXIT_OK


def cmd_fit(args) -> int:
    points = []
    with open(args.csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"n", "mean_abs_err"} <= set(reader.fieldnames):
            raise RuntimeError(f"{args.csv}: need columns n and mean_abs_err")
        for lineno, row in enumerate(reader, start=2):
            try:
                points.append((int(row["n"]), float(row["mean_abs_err"])))
            except (TypeError, ValueError):
                raise RuntimeError(f"{args.csv}: line {lineno}: malformed row") from None
    fit = analysis.fit_rate(points)
    print(f"A = {fit.A!r}")
    print(f"B = {fit.B!r}")
    print(f"C = {fit.C!r}")
    print(f"alpha_hat = {fit.alpha_hat!r}")
    print(f"residual = {fit.residual!r}")
    if fit.A <= 0:
        print("error curve is not decaying (A <= 0); no rate recovered", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _parse_bind(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep:
        raise UsageError(f"address must be host:port, got {text!r}")
    try:
        return host, int(port)
    except ValueError:
        raise UsageError(f"bad port in address {text!r}") from None


def cmd_serve(args) -> int:
    host, port = _parse_bind(args.bind)
    epsilon = _parse_epsilon(args.epsilon)
    config = ProtocolConfig(epsilon=epsilon, depth=args.depth, gamma=args.gamma,
                            n=args.clients)
    server = net.MinServer(config, args.clients, host=host,
                           port=port, round_timeout=args.timeout)
    print(f"LISTENING {server.address[0]}:{server.address[1]}", flush=True)
    transcript = server.run()
    print(f"RESULT {net.format_real(transcript.estimate)}")
    if args.out:
        Path(args.out).write_text(transcript_json_lines(transcript), encoding="utf-8")
    return EXIT_OK


def cmd_client(args) -> int:
    if not -1.0 <= args.value <= 1.0:
        raise UsageError(f"--value must lie in [-1, 1], got {args.value}")
    estimate = net.run_client(_parse_bind(args.connect), args.value, args.seed,
                              timeout=args.timeout)
    print(net.format_real(estimate))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldpmin",
        description="Locally private minimum finding: simulator, experiments and demo network protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one protocol simulation, dump the transcript")
    sim.add_argument("--n", type=int, default=None, help="cohort size (with --model)")
    sim.add_argument("--epsilon", required=True, help="total privacy budget; 'inf' disables noise")
    sim.add_argument("--depth", type=int, default=None, help="rounds L (with --gamma)")
    sim.add_argument("--gamma", type=float, default=None, help="explicit decision threshold")
    sim.add_argument("--param-mode", default=None,
                     help="schedule: lower_alpha | known_alpha:<a0> | unknown_alpha[:base]")
    sim.add_argument("--model", default="uniform", choices=["uniform", "beta", "truncnorm"])
    sim.add_argument("--model-alpha", type=float, default=1.0)
    sim.add_argument("--model-beta", type=float, default=1.0)
    sim.add_argument("--x-min", type=float, default=-1.0)
    sim.add_argument("--delta", type=float, default=2.0)
    sim.add_argument("--mu", type=float, default=0.0)
    sim.add_argument("--sigma", type=float, default=1.0)
    sim.add_argument("--setting", default="fixed", choices=["fixed", "iid"])
    sim.add_argument("--data", default=None,
                     help="comma-separated explicit user values (overrides --model)")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default=None, help="write the transcript here instead of stdout")
    sim.set_defaults(func=cmd_simulate)

    exp = sub.add_parser("experiment", help="run a sweep from a config file, emit CSV")
    exp.add_argument("config", help="flat key = value config file")
    exp.add_argument("--out-dir", default=".", help="directory for results.csv and guidelines")
    exp.set_defaults(func=cmd_experiment)

    fit = sub.add_parser("fit", help="fit the decay rate of an error curve CSV")
    fit.add_argument("csv", help="CSV with columns n, mean_abs_err (extras ignored)")
    fit.set_defaults(func=cmd_fit)

    srv = sub.add_parser("serve", help="aggregate one networked session")
    srv.add_argument("--bind", default="127.0.0.1:0", help="host:port to listen on")
    srv.add_argument("--clients", type=int, required=True)
    srv.add_argument("--epsilon", required=True)
    srv.add_argument("--depth", type=int, required=True)
    srv.add_argument("--gamma", type=float, required=True)
    srv.add_argument("--timeout", type=float, default=30.0, help="per-round barrier timeout (s)")
    srv.add_argument("--out", default=None, help="write the transcript here")
    srv.set_defaults(func=cmd_serve)

    cli = sub.add_parser("client", help="participate as one user")
    cli.add_argument("--connect", required=True, help="server host:port")
    cli.add_argument("--value", type=float, required=True, help="this user's datum in [-1, 1]")
    cli.add_argument("--seed", type=int, required=True)
    cli.add_argument("--timeout", type=float, default=30.0)
    cli.set_defaults(func=cmd_client)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except harness.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (net.SessionAborted, ConnectionError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
