"""Weighted Hermite variations of fractional Brownian motion."""
import json

from ._core import (correction_constant, fourth_moment, ks_two_sample, regime, rho, sample_paths,
                    set_worker_count, sigma_sq, weight, weighted_variation, worker_count)
from ._core import run_suite as _run_suite

__all__ = ["correction_constant", "fourth_moment", "ks_two_sample", "regime", "rho", "run_suite",
           "sample_paths", "set_worker_count", "sigma_sq", "weight", "weighted_variation", "worker_count"]


def run_suite(subcommand, **config):
    """Run a verification suite; returns (report dict, passed)."""
    config["subcommand"] = subcommand
    report, passed = _run_suite(json.dumps(config))
    return json.loads(report), passed
