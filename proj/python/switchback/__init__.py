"""Design, simulate and analyze switchback experiments."""

import json

from . import _switchback as _core
from ._switchback import (
    Design,
    SwitchbackError,
    determining_point,
    determining_window,
    enumerate_paths,
    ht_estimator,
    is_persistent,
    normal_ci,
    optimal_design,
    optimal_design_bruteforce,
    path_probability,
    sample_path,
    subset_selection_objective,
    variance_estimates,
)

__all__ = [
    "Design",
    "SwitchbackError",
    "analyze",
    "asymptotic_test",
    "determining_point",
    "determining_window",
    "enumerate_paths",
    "estimand",
    "exact_test",
    "ht_estimator",
    "identify_m_subroutine",
    "is_persistent",
    "normal_ci",
    "optimal_design",
    "optimal_design_bruteforce",
    "path_probability",
    "risk",
    "run_study",
    "sample_path",
    "simulate",
    "subset_selection_objective",
    "variance_estimates",
]


def risk(design, model, p, method="closed", reps=100000, seed=0, bound=1.0):
    """Risk report for a design under a model dict (see the CLI model format)."""
    return json.loads(_core.risk(design, json.dumps(model), p, method, reps, seed, bound))


def simulate(design, model, seed):
    """One experiment: returns (path string, observed outcomes)."""
    return _core.simulate(design, json.dumps(model), seed)


def estimand(model, horizon, p):
    return _core.estimand(json.dumps(model), horizon, p)


def exact_test(design, p, path, observed, resamples=10000, seed=0):
    return json.loads(_core.exact_test(design, p, path, list(observed), resamples, seed))


def asymptotic_test(tau_hat, sigma2_hat):
    return json.loads(_core.asymptotic_test(tau_hat, sigma2_hat))


def analyze(design, p, path, observed, resamples=10000, seed=0, level=0.95):
    return json.loads(_core.analyze(design, p, path, list(observed), resamples, seed, level))


def identify_m_subroutine(first, second):
    """Each summary is a dict with tau_hat, sigma2_hat, p and n."""
    return json.loads(_core.identify_m_subroutine(json.dumps(first), json.dumps(second)))


def run_study(config):
    """Runs a study config dict and returns its table as CSV text."""
    return _core.run_study(json.dumps(config))
