#!/usr/bin/env python3
"""
verify_suites.py

Randomized property suites run by `fractaldim verify`. Every trial draws its
inputs from np.random.SeedSequence(seed, spawn_key=(property index, trial)), so a
failing trial is replayable from the seed and the two indices in the report.

Status: Development
"""

import logging
from typing import Callable, NamedTuple

import numpy as np

from fractals.errors import FractalError
from fractals.geometry import ScaleGrid, diameter
from fractals.ifs import equal_ratio_system, lower_dim_formula, product_ifs, product_lower_dim, verify_ssc
from fractals.lowerdim import estimate_lower_dim_measure
from fractals.measure import (
    DiscreteMeasure,
    convolve,
    domination_constant,
    kantorovich_distance,
    mixture,
    scale_measure,
    translate,
)
from fractals.quantization import quant_error_exact_1d

ORDERS = (1.0, 2.0, 3.0)


class Property(NamedTuple):
    suite: str
    name: str
    check: Callable


def _random_measure(rng, min_atoms=1, max_atoms=8):
    size = int(rng.integers(min_atoms, max_atoms + 1))
    points = rng.uniform(-5.0, 5.0, size)
    return DiscreteMeasure(points.reshape(-1, 1), rng.dirichlet(np.ones(size)))


def _draw_order(rng):
    return int(rng.integers(1, 7)), float(rng.choice(ORDERS))


def _measure_dict(mu):
    return {"support": mu.points.tolist(), "weights": mu.weights.tolist()}


def _relative_tol(*values, tol=1e-12):
    return tol * max(1.0, *(abs(v) for v in values))


def _dirac_convolution_quant(rng):
    mu = _random_measure(rng)
    x = float(rng.uniform(-5.0, 5.0))
    n, r = _draw_order(rng)
    before = quant_error_exact_1d(mu, n, r).error
    after = quant_error_exact_1d(convolve(mu, DiscreteMeasure.dirac([x])), n, r).error
    return _relative_tol(before) - abs(before - after), {"mu": _measure_dict(mu), "x": x, "n": n, "r": r}


def _translation_quant(rng):
    mu = _random_measure(rng)
    x = float(rng.uniform(-5.0, 5.0))
    n, r = _draw_order(rng)
    before = quant_error_exact_1d(mu, n, r).error
    after = quant_error_exact_1d(translate(mu, [x]), n, r).error
    return _relative_tol(before) - abs(before - after), {"mu": _measure_dict(mu), "x": x, "n": n, "r": r}


def _translate_is_dirac_convolution(rng):
    mu = _random_measure(rng)
    x = float(rng.uniform(-5.0, 5.0))
    shifted = translate(mu, [x])
    convolved = convolve(mu, DiscreteMeasure.dirac([-x]))
    gap = np.inf
    if len(shifted) == len(convolved):
        gap = max(np.abs(shifted.points - convolved.points).max(), np.abs(shifted.weights - convolved.weights).max())
    return 1e-12 - gap, {"mu": _measure_dict(mu), "x": x}


def _translation_lipschitz(rng):
    mu = _random_measure(rng)
    x = float(rng.uniform(-5.0, 5.0))
    moved = kantorovich_distance(mu, translate(mu, [x]))
    return abs(x) + 1e-12 - moved, {"mu": _measure_dict(mu), "x": x}


def _superadditivity(rng):
    mu, nu = _random_measure(rng), _random_measure(rng)
    n, r = _draw_order(rng)
    total = quant_error_exact_1d(mixture([(1.0, mu), (1.0, nu)]), n, r).error
    parts = quant_error_exact_1d(mu, n, r).error + quant_error_exact_1d(nu, n, r).error
    context = {"mu": _measure_dict(mu), "nu": _measure_dict(nu), "n": n, "r": r}
    return total - parts + _relative_tol(parts), context


def _doubling_bound(rng):
    mu, nu = _random_measure(rng), _random_measure(rng)
    n, r = _draw_order(rng)
    total = quant_error_exact_1d(mixture([(1.0, mu), (1.0, nu)]), 2 * n, r).error
    parts = quant_error_exact_1d(mu, n, r).error + quant_error_exact_1d(nu, n, r).error
    context = {"mu": _measure_dict(mu), "nu": _measure_dict(nu), "n": n, "r": r}
    return parts - total + _relative_tol(parts), context


def _lower_estimate_scaling(rng):
    mu = _random_measure(rng, min_atoms=2)
    beta = float(rng.uniform(0.1, 10.0))
    diam = diameter(mu.support)
    grid = ScaleGrid(diam / 64, diam, levels=7)
    before = estimate_lower_dim_measure(mu, grid).value
    after = estimate_lower_dim_measure(scale_measure(mu, beta), grid.scaled(1 / beta)).value
    return 1e-9 - abs(before - after), {"mu": _measure_dict(mu), "beta": beta, "grid": grid.to_dict()}


def _kantorovich_homogeneity(rng):
    mu, nu = _random_measure(rng), _random_measure(rng)
    beta = float(rng.uniform(0.1, 10.0))
    before = kantorovich_distance(mu, nu)
    after = kantorovich_distance(scale_measure(mu, beta), scale_measure(nu, beta))
    context = {"mu": _measure_dict(mu), "nu": _measure_dict(nu), "beta": beta}
    return 1e-10 - abs(after - before / beta), context


def _quant_scaling(rng):
    mu = _random_measure(rng)
    beta = float(rng.uniform(0.1, 10.0))
    n, r = _draw_order(rng)
    before = quant_error_exact_1d(mu, n, r).error
    after = quant_error_exact_1d(scale_measure(mu, beta), n, r).error
    expected = before / beta ** r
    return _relative_tol(expected, tol=1e-9) - abs(after - expected), {"mu": _measure_dict(mu), "beta": beta, "n": n, "r": r}


def _domination(rng):
    nu = _random_measure(rng)
    tilt = rng.uniform(0.1, 1.0, len(nu))
    mu = DiscreteMeasure(nu.points, tilt * nu.weights / np.dot(tilt, nu.weights))
    n, r = _draw_order(rng)
    bound = domination_constant(mu, nu)
    dominated = quant_error_exact_1d(mu, n, r).error
    dominating = bound * quant_error_exact_1d(nu, n, r).error
    context = {"mu": _measure_dict(mu), "nu": _measure_dict(nu), "C": bound, "n": n, "r": r}
    return dominating - dominated + _relative_tol(dominating), context


def _random_equal_ratio_pair(rng):
    count = int(rng.integers(2, 4))
    ratio = float(rng.uniform(0.05, 1.0 / count - 0.02))
    first = equal_ratio_system(ratio, count, rng.dirichlet(np.ones(count)))
    second = equal_ratio_system(ratio, count, rng.dirichlet(np.ones(count)))
    return first, second


def _product_additivity(rng):
    first, second = _random_equal_ratio_pair(rng)
    context = {"first": first.to_dict(), "second": second.to_dict()}
    direct = lower_dim_formula(product_ifs(first, second))
    return 1e-12 - abs(product_lower_dim(first, second) - direct), context


def _product_separation(rng):
    first, second = _random_equal_ratio_pair(rng)
    report = verify_ssc(product_ifs(first, second))
    slack = report.margin if report.ssc_holds else min(report.margin, 0.0) - 1.0
    return slack, {"first": first.to_dict(), "second": second.to_dict()}


PROPERTIES = (
    Property("convolution", "dirac-convolution-quant-invariance", _dirac_convolution_quant),
    Property("convolution", "translation-quant-invariance", _translation_quant),
    Property("convolution", "translate-equals-dirac-convolution", _translate_is_dirac_convolution),
    Property("convolution", "translation-kantorovich-lipschitz", _translation_lipschitz),
    Property("sum", "superadditivity", _superadditivity),
    Property("sum", "doubling-upper-bound", _doubling_bound),
    Property("scaling", "lower-estimate-scaling-covariance", _lower_estimate_scaling),
    Property("scaling", "kantorovich-homogeneity", _kantorovich_homogeneity),
    Property("scaling", "quant-error-scaling", _quant_scaling),
    Property("domination", "domination-monotonicity", _domination),
    Property("product", "lower-dim-additivity", _product_additivity),
    Property("product", "product-separation", _product_separation),
)

SUITES = tuple(dict.fromkeys(p.suite for p in PROPERTIES))


def trial_rng(seed, index, trial):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index, trial)))


def run_property(index, prop: Property, seed, trials):
    passed = 0
    worst = np.inf
    counterexample = None
    for trial in range(trials):
        rng = trial_rng(seed, index, trial)
        try:
            slack, context = prop.check(rng)
        except FractalError as e:
            slack, context = -np.inf, {"error": f"{type(e).__name__}: {e}"}
        if slack >= 0:
            passed += 1
        elif counterexample is None:
            counterexample = {"trial": trial, "slack": float(slack), **context}
            logging.warning(f"{prop.suite}/{prop.name} failed at trial {trial}")
        worst = min(worst, float(slack))
    return {"passed": passed, "trials": trials, "worst_slack": worst, "counterexample": counterexample}


def run_suites(suite="all", seed=0, trials=200):
    """Run one suite (or all) and return the JSON-ready report; report['passed'] is the verdict."""
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    results = {}
    for index, prop in enumerate(PROPERTIES):
        if suite not in ("all", prop.suite):
            continue
        logging.info(f"running {prop.suite}/{prop.name} ({trials} trials)")
        results.setdefault(prop.suite, {})[prop.name] = run_property(index, prop, seed, trials)
    passed = all(entry["passed"] == entry["trials"] for props in results.values() for entry in props.values())
    return {"seed": seed, "trials": trials, "suite": suite, "passed": passed, "suites": results}
