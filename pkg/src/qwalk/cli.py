"""
Command-line front end.

    qwalk fit-returns   --csv prices.csv --num 4 --step 1 -o out/
    qwalk fit-binomial  --n 31 --p 0.3 --num 2 --step 3 -o out/
    qwalk fit-lognormal --spot 6 --strike 7 --rate 0.04 --vol 0.4 --maturity-days 90 \\
                        --num 3 --step 4 --qubits 5 -o out/
    qwalk price-call    --spot 6 --strike 7 --rate 0.04 --vol 0.4 --maturity-days 90
    qwalk dtqw-demo     --coin H --init symmetric --steps 50 -o out/
    qwalk rerun         out/manifest.json -o out2/

Exit codes: 0 success, 1 invalid input, 2 internal error. The seed defaults
to $QWALK_SEED, else 0.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import warnings

import numpy as np

from . import __version__, plotting
from .errors import QWalkError
from .ingest import daily_returns, read_ohlc_csv
from .objective import TargetDistribution, total_variation
from .optimize.cobyla import OptimizerOptions
from .optimize.fit import default_workers, fit
from .pricing import black_scholes_call, call_payoff_expectation, undiscounted_call
from .report import (ArtifactWriter, boxplot_dict, dumps, manifest_dict, result_dict,
                     timing_dict, write_fit_artifacts)
from .targets import (DEFAULT_TRUNCATION_SIGMAS, PricingParams, binomial_target,
                      histogram_from_returns, lognormal_target)
from .walk import (MultiSSQWConfig, dtqw_distribution, min_dtqw_qubits, run_multi_ssqw)

log = logging.getLogger("qwalk")

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2

# arguments that change where/how a run executes but not what it computes
NON_SEMANTIC = {"output_dir", "parallel", "ascii", "verbose", "command", "func"}


class UsageError(QWalkError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _env_seed() -> int:
    raw = os.environ.get("QWALK_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"QWALK_SEED must be an integer, got {raw!r}") from None


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _fit_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--num", type=_positive_int, required=True, help="number of walkers")
    p.add_argument("--step", type=_positive_int, required=True, help="steps per run")
    p.add_argument("--restarts", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=None, help="default: $QWALK_SEED or 0")
    p.add_argument("--kl-weight", type=float, default=1.0)
    p.add_argument("--initial-position", type=int, default=None,
                   help="start bin (default: mode of the target)")
    p.add_argument("--max-evals", type=_positive_int, default=1000)
    p.add_argument("--rhobeg", type=float, default=0.5, help="initial trust radius")
    p.add_argument("--rhoend", type=float, default=1e-6, help="final trust radius")
    p.add_argument("--parallel", type=_positive_int, default=None,
                   help="worker processes for restarts (default: all cores)")
    p.add_argument("--ascii", action="store_true", help="also print a text bar chart")
    p.add_argument("-o", "--output-dir", required=True)


def _pricing_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spot", type=float, default=6.0)
    p.add_argument("--strike", type=float, default=7.0)
    p.add_argument("--rate", type=float, default=0.04)
    p.add_argument("--vol", type=float, default=0.4)
    p.add_argument("--maturity-days", type=float, default=90.0)
    p.add_argument("--qubits", type=_positive_int, default=5)
    p.add_argument("--truncation-sigmas", type=float, default=DEFAULT_TRUNCATION_SIGMAS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwalk", description="Split-step quantum walk distribution fitting.")
    parser.add_argument("--version", action="version", version=f"qwalk {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit-returns", help="fit a daily-return histogram from an OHLC CSV")
    p.add_argument("--csv", required=True, dest="csv_path")
    p.add_argument("--bins", type=_positive_int, default=16)
    p.add_argument("--log-returns", action="store_true")
    _fit_options(p)
    p.set_defaults(func=cmd_fit_returns)

    p = sub.add_parser("fit-binomial", help="fit a binomial PMF")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    _fit_options(p)
    p.set_defaults(func=cmd_fit_binomial)

    p = sub.add_parser("fit-lognormal", help="fit a log-normal price law and price a call on it")
    _pricing_options(p)
    _fit_options(p)
    p.set_defaults(func=cmd_fit_lognormal)

    p = sub.add_parser("price-call", help="call payoff on the discretised log-normal law")
    _pricing_options(p)
    p.add_argument("--discount", action="store_true")
    p.add_argument("-o", "--output-dir", default=None)
    p.set_defaults(func=cmd_price_call)

    p = sub.add_parser("dtqw-demo", help="plain DTQW position distribution")
    p.add_argument("--coin", choices=["Z", "X", "H"], default="H")
    p.add_argument("--init", choices=["up", "down", "symmetric"], default="symmetric")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--ascii", action="store_true")
    p.add_argument("-o", "--output-dir", required=True)
    p.set_defaults(func=cmd_dtqw_demo)

    p = sub.add_parser("rerun", help="repeat the run recorded in a manifest.json")
    p.add_argument("manifest")
    p.add_argument("-o", "--output-dir", required=True)
    p.add_argument("--parallel", type=_positive_int, default=None)
    p.set_defaults(func=cmd_rerun)
    return parser


def _semantic_args(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NON_SEMANTIC}


def _run_fit(args, target: TargetDistribution, xlabel: str, extra=None) -> dict:
    seed = args.seed if args.seed is not None else _env_seed()
    args.seed = seed
    start = target.mode_index() if args.initial_position is None else args.initial_position
    config = MultiSSQWConfig(target.position_qubits, args.num, args.step, start)
    options = OptimizerOptions(args.rhobeg, args.rhoend, args.max_evals)
    workers = args.parallel or default_workers()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = fit(config, target, args.restarts, seed, options, args.kl_weight,
                     workers=workers)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    trained = run_multi_ssqw(config, result.best_params)
    res = result_dict(config, target, result, trained, options, args.kl_weight)
    with ArtifactWriter(args.output_dir) as out:
        write_fit_artifacts(out, res, boxplot_dict(result), timing_dict(result), xlabel)
        if extra is not None:
            extra(out, trained)
        names = list(out.names) + ["manifest.json"]
        out.json("manifest.json", manifest_dict(args.command, _semantic_args(args), seed, names))
    best = res["best"]
    print(f"best loss {best['loss']['combined']:.6g}  (mse {best['loss']['mse']:.3g}, "
          f"kl {best['loss']['kl']:.3g})  total variation {best['total_variation']:.4f}  "
          f"restart {best['restart']} of {result.restarts}")
    if args.ascii:
        print(plotting.ascii_bars(target.bin_labels, {"target": target.probs, "trained": trained}))
    print(f"artifacts written to {args.output_dir}")
    return res


def cmd_fit_returns(args) -> int:
    try:
        series = read_ohlc_csv(args.csv_path)
    except OSError as exc:
        raise UsageError(f"cannot read {args.csv_path}: {exc.strerror or exc}") from None
    returns = daily_returns(series, log_returns=args.log_returns)
    target = histogram_from_returns(returns, args.bins,
                                    name=f"daily returns ({os.path.basename(args.csv_path)})")
    _run_fit(args, target, "daily return (%)")
    return EXIT_OK


def cmd_fit_binomial(args) -> int:
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    qubits = max(1, math.ceil(math.log2(args.n + 1)))
    target = binomial_target(args.n, args.p, qubits)
    _run_fit(args, target, "successes k")
    return EXIT_OK


def _pricing(args) -> PricingParams:
    pp = PricingParams(args.spot, args.strike, args.rate, args.vol, args.maturity_days)
    if pp.volatility <= 0:
        raise UsageError("--vol must be > 0")
    return pp


def payoff_dict(pp: PricingParams, target: TargetDistribution, trained=None,
                discount: bool = False) -> dict:
    out = {
        "schema": "qwalk.payoffs/1",
        "spot": pp.spot, "strike": pp.strike, "rate": pp.rate,
        "volatility": pp.volatility, "maturity_days": pp.maturity_days,
        "discounted": discount,
        "targeted_payoff": call_payoff_expectation(target, pp.strike, discount, pp.rate,
                                                   pp.maturity_days),
        "black_scholes_price": black_scholes_call(pp),
        "analytic_expected_payoff": undiscounted_call(pp),
    }
    if trained is not None:
        out["trained_payoff"] = call_payoff_expectation(target, pp.strike, discount, pp.rate,
                                                        pp.maturity_days, probs=trained)
    return out


def cmd_fit_lognormal(args) -> int:
    pp = _pricing(args)
    target = lognormal_target(pp, args.qubits, args.truncation_sigmas)
    payoffs = {}

    def write_payoffs(out, trained):
        payoffs.update(payoff_dict(pp, target, trained))
        out.json("payoffs.json", payoffs)

    _run_fit(args, target, "price", extra=write_payoffs)
    print(f"expected payoff: targeted {payoffs['targeted_payoff']:.4f}, "
          f"trained {payoffs['trained_payoff']:.4f}")
    return EXIT_OK


def cmd_price_call(args) -> int:
    pp = _pricing(args)
    target = lognormal_target(pp, args.qubits, args.truncation_sigmas)
    res = payoff_dict(pp, target, discount=args.discount)
    res["qubits"] = args.qubits
    res["truncation_sigmas"] = args.truncation_sigmas
    text = dumps(res)
    if args.output_dir:
        with ArtifactWriter(args.output_dir) as out:
            out.json("payoffs.json", res)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_dtqw_demo(args) -> int:
    if args.steps < 0:
        raise UsageError(f"--steps must be >= 0, got {args.steps}")
    n = min_dtqw_qubits(args.steps)
    probs = dtqw_distribution(args.coin, args.init, args.steps, n)
    centre = 1 << (n - 1)
    offsets = np.arange(probs.size) - centre
    res = {
        "schema": "qwalk.dtqw/1",
        "coin": args.coin,
        "initial_coin_state": args.init,
        "steps": args.steps,
        "position_qubits": n,
        "start_index": centre,
        "offsets": [int(v) for v in offsets],
        "probs": [float(v) for v in probs],
    }
    with ArtifactWriter(args.output_dir) as out:
        out.json("distribution.json", res)
        plotting.distribution_plot(offsets, probs, None, out.path("distribution.svg"),
                                   title=f"DTQW, {args.coin} coin, {args.init} start, t={args.steps}",
                                   xlabel="displacement")
        names = list(out.names) + ["manifest.json"]
        out.json("manifest.json", manifest_dict(args.command, _semantic_args(args), 0, names))
    if args.ascii:
        keep = probs > 1e-12
        print(plotting.ascii_bars(offsets[keep], {"probability": probs[keep]}))
    print(f"artifacts written to {args.output_dir}")
    return EXIT_OK


def cmd_rerun(args) -> int:
    try:
        with open(args.manifest) as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load manifest {args.manifest}: {exc}") from None
    if manifest.get("subcommand") in (None, "rerun"):
        raise UsageError("manifest does not name a runnable subcommand")
    parser = build_parser()
    defaults = parser.parse_args(_minimal_argv(manifest["subcommand"], args.output_dir))
    for k, v in manifest["arguments"].items():
        setattr(defaults, k, v)
    defaults.output_dir = args.output_dir
    if hasattr(defaults, "parallel"):
        defaults.parallel = args.parallel
    return defaults.func(defaults)


def _minimal_argv(subcommand: str, output_dir: str) -> list[str]:
    argv = [subcommand]
    if subcommand.startswith("fit-"):
        argv += ["--num", "1", "--step", "1"]
    if subcommand == "fit-returns":
        argv += ["--csv", "-"]
    if subcommand == "fit-binomial":
        argv += ["--n", "1", "--p", "0.5"]
    if subcommand != "price-call" or output_dir:
        argv += ["-o", output_dir]
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except QWalkError as exc:
        print(f"qwalk: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"qwalk: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
