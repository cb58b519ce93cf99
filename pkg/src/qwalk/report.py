"""
JSON artifacts for fit runs and the files written next to them.

Every fit writes, into one output directory:

    result.json    fit result, target and trained distributions, fit metrics
    boxplot.json   five-number summary of the per-restart final losses
    timing.json    per-restart wall-clock times (the only non-reproducible file)
    manifest.json  subcommand, resolved configuration, seed, artifact names
    dist.svg, trace.svg, boxplot.svg, timing.svg

Plots are drawn from the same dictionaries that are serialised, so they never
carry information the JSON does not.
"""
from __future__ import annotations

import json
import math
import shutil
import tempfile
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .objective import TargetDistribution, total_variation
from .optimize.fit import FitResult
from .walk import MultiSSQWConfig, unpack_params

SCHEMA_DIR = Path(__file__).with_name("schemas")


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _nums(a):
    return [_num(v) for v in np.asarray(a, dtype=float).ravel()]


def config_dict(config: MultiSSQWConfig) -> dict:
    return {
        "position_qubits": config.position_qubits,
        "num_walkers": config.num_walkers,
        "steps": config.steps,
        "initial_position": config.initial_position,
    }


def target_dict(target: TargetDistribution) -> dict:
    return {"name": target.name, "bin_labels": _nums(target.bin_labels), "probs": _nums(target.probs)}


def params_dict(params) -> dict:
    init, walkers = unpack_params(params)
    return {
        "flat": _nums(params),
        "initial_coin": list(init.as_tuple()),
        "walkers": [{"coin1": list(w.coin1.as_tuple()), "coin2": list(w.coin2.as_tuple())}
                    for w in walkers],
    }


def five_numbers(values) -> dict:
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    q = np.percentile(v, [0, 25, 50, 75, 100])
    return {"count": int(v.size), "min": q[0], "q1": q[1], "median": q[2], "q3": q[3], "max": q[4],
            "mean": float(v.mean())}


def result_dict(config: MultiSSQWConfig, target: TargetDistribution, fit: FitResult,
                trained, options, kl_weight: float) -> dict:
    return {
        "schema": "qwalk.result/1",
        "config": config_dict(config),
        "optimizer": {
            "method": "COBYLA",
            "initial_trust_radius": options.initial_trust_radius,
            "final_trust_radius": options.final_trust_radius,
            "max_evaluations": options.max_evaluations,
            "kl_weight": kl_weight,
        },
        "seed": fit.seed,
        "restarts": fit.restarts,
        "target": target_dict(target),
        "trained": {"probs": _nums(trained)},
        "best": {
            "restart": fit.best_restart,
            "params": params_dict(fit.best_params),
            "loss": fit.best_loss.as_dict(),
            "total_variation": total_variation(target.probs, trained),
        },
        "restart_final_losses": _nums(fit.restart_final_losses),
        "restart_evaluations": [int(v) for v in fit.restart_evaluations],
        "best_trace": _nums(fit.best_trace),
        "failed_restarts": [{"restart": i, "error": e} for i, e in fit.failed_restarts],
    }


def boxplot_dict(fit: FitResult) -> dict:
    return {"schema": "qwalk.boxplot/1", "restart_final_losses": five_numbers(fit.restart_final_losses)}


def timing_dict(fit: FitResult) -> dict:
    t = fit.restart_wall_times
    return {
        "schema": "qwalk.timing/1",
        "restart_wall_times": _nums(t),
        "mean_seconds": float(t.mean()),
        "total_seconds": float(t.sum()),
        "mean_evaluations": float(fit.restart_evaluations.mean()),
    }


def manifest_dict(subcommand: str, arguments: dict, seed: int, artifacts) -> dict:
    return {
        "schema": "qwalk.manifest/1",
        "tool": "qwalk",
        "version": __version__,
        "subcommand": subcommand,
        "arguments": arguments,
        "seed": seed,
        "artifacts": sorted(artifacts),
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def load_schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())


class ArtifactWriter:
    """Collects artifacts in a scratch directory and moves them into place on commit.

    Nothing appears in the output directory unless every artifact was produced.
    """

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)
        self._tmp = None
        self.names: list[str] = []

    def __enter__(self):
        self._tmp = Path(tempfile.mkdtemp(prefix=".qwalk-"))
        return self

    def path(self, name: str) -> Path:
        self.names.append(name)
        return self._tmp / name

    def json(self, name: str, obj) -> None:
        self.path(name).write_text(dumps(obj))

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                self.output_dir.mkdir(parents=True, exist_ok=True)
                for name in self.names:
                    shutil.move(str(self._tmp / name), str(self.output_dir / name))
        finally:
            shutil.rmtree(self._tmp, ignore_errors=True)
        return False


def write_fit_artifacts(writer: ArtifactWriter, result: dict, boxplot: dict, timing: dict,
                        xlabel: str) -> None:
    writer.json("result.json", result)
    writer.json("boxplot.json", boxplot)
    writer.json("timing.json", timing)
    t = result["target"]
    plotting.distribution_plot(t["bin_labels"], t["probs"], result["trained"]["probs"],
                               writer.path("dist.svg"), title=t["name"], xlabel=xlabel)
    plotting.trace_plot(result["best_trace"], writer.path("trace.svg"))
    plotting.boxplot_plot(result["restart_final_losses"], writer.path("boxplot.svg"))
    plotting.timing_plot(timing["restart_wall_times"], writer.path("timing.svg"))
