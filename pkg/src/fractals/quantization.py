#!/usr/bin/env python3
"""
quantization.py

Quantization errors V_{n,r} of discrete measures, error curves, the
quantization dimension estimator and coefficients, and the Graf-Luschgy
equation for self-similar measures together with its inverse.

Two engines compute V_{n,r}:
    - exact (1D, r >= 1): optimal codebooks induce contiguous clusters of the
      sorted support, so a dynamic program over (prefix, clusters) is exact.
    - Lloyd (any dimension): best of several seeded Lloyd runs; an upper bound.

Status: Development
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect, brentq, minimize
from scipy.spatial.distance import cdist
from scipy.stats import linregress

from fractals.config import (
    DEFAULT_LLOYD_RESTARTS,
    DEFAULT_SEED,
    EXACT_DP_CAP,
    EXACT_GENERAL_ORDER_CAP,
    LLOYD_MAX_ITER,
    PROBABILITY_TOL,
)
from fractals.errors import (
    InsufficientDataError,
    InvalidInputError,
    NumericalFailureError,
    ResourceLimitError,
    UnsupportedModeError,
    UnsupportedOrderError,
)
from fractals.geometry import PointSet
from fractals.ifs import designate
from fractals.lowerdim import DimensionEstimate
from fractals.measure import DiscreteMeasure

EXACT = "exact1d"
LLOYD = "lloyd"


@dataclass(frozen=True, eq=False)
class QuantizerResult:
    n: int
    r: float
    centers: PointSet
    error: float
    exact: bool

    def to_dict(self):
        return {
            "n": self.n,
            "r": self.r,
            "V": self.error,
            "exact": self.exact,
            "centers": self.centers.points.tolist(),
        }


class CurveEntry(NamedTuple):
    n: int
    V: float
    exact: bool


@dataclass(frozen=True)
class ErrorCurve:
    r: float
    entries: Tuple[CurveEntry, ...]

    def __post_init__(self):
        ns = [e.n for e in self.entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise InvalidInputError("error curve entries need strictly increasing n")

    def ns(self) -> np.ndarray:
        return np.array([e.n for e in self.entries])

    def values(self) -> np.ndarray:
        return np.array([e.V for e in self.entries])

    def to_records(self):
        return [[e.n, e.V, e.exact] for e in self.entries]

    def to_dict(self):
        return {"r": self.r, "entries": self.to_records()}


class GLSolution(NamedTuple):
    value: float
    residual: float
    bracket: Tuple[float, float]
    x: float

    def to_dict(self):
        return {"D": self.value, "residual": self.residual, "x": self.x, "bracket": list(self.bracket)}


def _check_order(r):
    if not r > 0:
        raise InvalidInputError(f"quantization order must be positive, got {r}")


def _check_codebook_size(n):
    if int(n) != n or n <= 0:
        raise InvalidInputError(f"codebook size must be a positive integer, got {n}")


def distortion(mu: DiscreteMeasure, centers, r: float) -> float:
    """sum_x w(x) min_c |x - c|^r."""
    centers = centers.points if isinstance(centers, PointSet) else np.atleast_2d(np.asarray(centers, dtype=float))
    nearest = cdist(mu.points, centers).min(axis=1)
    return math.fsum(mu.weights * nearest ** r)


def _weighted_median(xs, ws):
    """Smallest minimizer of sum w|x - c|, or the midpoint of a flat minimum."""
    cum = np.cumsum(ws)
    half = cum[-1] / 2
    k = int(np.searchsorted(cum, half * (1 - 1e-12), side="left"))
    if cum[k] <= half * (1 + 1e-12) and k + 1 < len(xs):
        return (xs[k] + xs[k + 1]) / 2
    return xs[k]


def cluster_cost(xs, ws, r: float):
    """
    Optimal single-center cost and center of a sorted 1D cluster.

    Closed forms for r = 1 (weighted median) and r = 2 (weighted mean); a root of
    the derivative for other r >= 1; the best support point for r < 1, where the
    cost is concave between atoms.
    """
    xs = np.asarray(xs, dtype=float)
    ws = np.asarray(ws, dtype=float)
    if xs.size == 0:
        raise InvalidInputError("cluster must not be empty")
    if xs[0] == xs[-1]:
        return 0.0, float(xs[0])
    if r == 2:
        center = float(np.dot(ws, xs) / ws.sum())
    elif r == 1:
        center = float(_weighted_median(xs, ws))
    elif r > 1:
        def slope(c):
            d = c - xs
            return float(np.dot(ws, np.sign(d) * np.abs(d) ** (r - 1)))

        center = float(brentq(slope, xs[0], xs[-1], xtol=1e-15))
    else:
        costs = [np.dot(ws, np.abs(xs - c) ** r) for c in xs]
        center = float(xs[int(np.argmin(costs))])
    return math.fsum(ws * np.abs(xs - center) ** r), center


class _PrefixCosts:
    """Vectorized cluster costs of [i, j) for r in {1, 2} from prefix sums."""

    def __init__(self, xs, ws, r):
        self.r = r
        self.xs = xs - xs[0]
        self.W = np.concatenate([[0.0], np.cumsum(ws)])
        self.WX = np.concatenate([[0.0], np.cumsum(ws * self.xs)])
        self.WXX = np.concatenate([[0.0], np.cumsum(ws * self.xs ** 2)])

    def __call__(self, i, j):
        W, WX = self.W, self.WX
        if self.r == 2:
            mass = W[j] - W[i]
            first = WX[j] - WX[i]
            return np.maximum(self.WXX[j] - self.WXX[i] - first ** 2 / mass, 0.0)
        # the median atom k is the first one whose prefix mass reaches half the cluster
        target = W[i] + (W[j] - W[i]) / 2
        k = np.clip(np.searchsorted(W, target, side="left") - 1, i, j - 1)
        c = self.xs[k]
        left = c * (W[k] - W[i]) - (WX[k] - WX[i])
        right = (WX[j] - WX[k]) - c * (W[j] - W[k])
        return np.maximum(left + right, 0.0)


class _ExactSolver:
    """
    Dynamic program over (clusters used, sorted prefix) for one 1D measure.

    Tables for every layer up to `layers` are kept, so one run answers every
    n <= layers. Ties go to the smallest split index.
    """

    def __init__(self, mu: DiscreteMeasure, layers: int, r: float):
        self.mu = mu
        self.r = r
        self.xs = mu.points[:, 0]
        self.ws = mu.weights
        self.size = len(self.xs)
        self.layers = min(layers, self.size)
        if r in (1, 2):
            costs = _PrefixCosts(self.xs, self.ws, r)
            if self.size <= EXACT_DP_CAP:
                self._run_full(self._matrix_from_prefix(costs))
            else:
                self._run_divide_and_conquer(costs)
        else:
            if self.size > EXACT_GENERAL_ORDER_CAP:
                raise ResourceLimitError(
                    f"exact engine for r={r} handles at most {EXACT_GENERAL_ORDER_CAP} atoms, got {self.size}"
                )
            self._run_full(self._matrix_by_search())

    def _matrix_from_prefix(self, costs):
        i, j = np.meshgrid(np.arange(self.size + 1), np.arange(self.size + 1), indexing="ij")
        valid = i < j
        matrix = np.full((self.size + 1, self.size + 1), np.inf)
        matrix[valid] = costs(i[valid], j[valid])
        return matrix

    def _matrix_by_search(self):
        matrix = np.full((self.size + 1, self.size + 1), np.inf)
        for i in range(self.size):
            for j in range(i + 1, self.size + 1):
                matrix[i, j] = cluster_cost(self.xs[i:j], self.ws[i:j], self.r)[0]
        return matrix

    def _run_full(self, matrix):
        self.value = np.full((self.layers + 1, self.size + 1), np.inf)
        self.split = np.zeros((self.layers + 1, self.size + 1), dtype=int)
        self.value[0, 0] = 0.0
        for layer in range(1, self.layers + 1):
            candidates = self.value[layer - 1][:, None] + matrix
            self.split[layer] = np.argmin(candidates, axis=0)
            self.value[layer] = candidates[self.split[layer], np.arange(self.size + 1)]
            logging.debug(f"exact DP layer {layer}: V = {self.value[layer, -1]:.6g}")

    def _run_divide_and_conquer(self, costs):
        self.value = np.full((self.layers + 1, self.size + 1), np.inf)
        self.split = np.zeros((self.layers + 1, self.size + 1), dtype=int)
        self.value[0, 0] = 0.0
        for layer in range(1, self.layers + 1):
            previous = self.value[layer - 1]
            current = self.value[layer]
            split = self.split[layer]
            # optimal split points are monotone in j; each task is (j_lo, j_hi, opt_lo, opt_hi)
            tasks = [(layer, self.size, layer - 1, self.size - 1)]
            while tasks:
                j_lo, j_hi, opt_lo, opt_hi = tasks.pop()
                if j_lo > j_hi:
                    continue
                mid = (j_lo + j_hi) // 2
                candidates = np.arange(opt_lo, min(mid - 1, opt_hi) + 1)
                values = previous[candidates] + costs(candidates, mid)
                best = int(np.argmin(values))
                current[mid] = values[best]
                split[mid] = candidates[best]
                tasks.append((j_lo, mid - 1, opt_lo, split[mid]))
                tasks.append((mid + 1, j_hi, split[mid], opt_hi))
            logging.debug(f"exact DP layer {layer} (divide and conquer): V = {current[-1]:.6g}")

    def result(self, n: int) -> QuantizerResult:
        if n >= self.size:
            return QuantizerResult(n, self.r, self.mu.support, 0.0, True)
        bounds = []
        j = self.size
        for layer in range(n, 0, -1):
            i = int(self.split[layer, j])
            bounds.append((i, j))
            j = i
        centers = [cluster_cost(self.xs[i:j], self.ws[i:j], self.r)[1] for i, j in reversed(bounds)]
        centers = PointSet(np.array(centers).reshape(-1, 1))
        return QuantizerResult(n, self.r, centers, distortion(self.mu, centers, self.r), True)


def _exact_solver(mu: DiscreteMeasure, n_max: int, r: float) -> _ExactSolver:
    if mu.dim != 1:
        raise UnsupportedModeError(f"the exact engine handles 1D measures only, got dimension {mu.dim}")
    if r < 1:
        raise UnsupportedOrderError(f"the exact engine needs r >= 1 (cluster costs must be convex), got {r}")
    return _ExactSolver(mu, n_max, r)


def quant_error_exact_1d(mu: DiscreteMeasure, n: int, r: float) -> QuantizerResult:
    """
    Exact V_{n,r} of a 1D measure with its optimal codebook.

    Finite (unnormalized) measures are accepted; V is then the unnormalized integral.
    """
    _check_codebook_size(n)
    _check_order(r)
    return _exact_solver(mu, n, r).result(n)


def _recenter(points, weights, r, current):
    if r == 2:
        return weights @ points / weights.sum()
    if points.shape[1] == 1:
        order = np.argsort(points[:, 0], kind="stable")
        return np.array([cluster_cost(points[order, 0], weights[order], r)[1]])

    def objective(c):
        return float(np.dot(weights, np.linalg.norm(points - c, axis=1) ** r))

    found = minimize(objective, current, method="Powell")
    return found.x if objective(found.x) < objective(current) else current


def _lloyd_run(points, weights, start, r, max_iter):
    centers = start.copy()
    labels = None
    for iteration in range(max_iter):
        new_labels = cdist(points, centers).argmin(axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(len(centers)):
            members = labels == k
            if members.any():
                centers[k] = _recenter(points[members], weights[members], r, centers[k])
    nearest = cdist(points, centers).min(axis=1)
    return centers, math.fsum(weights * nearest ** r), iteration + 1


def quant_error_lloyd(
    mu: DiscreteMeasure,
    n: int,
    r: float,
    restarts: int = DEFAULT_LLOYD_RESTARTS,
    seed=DEFAULT_SEED,
    max_iter: int = LLOYD_MAX_ITER,
) -> QuantizerResult:
    """Best of `restarts` Lloyd runs seeded from one SeedSequence; an upper bound on V_{n,r}."""
    _check_codebook_size(n)
    _check_order(r)
    if restarts < 1:
        raise InvalidInputError("Lloyd needs at least one restart")
    if n >= len(mu):
        return QuantizerResult(n, r, mu.support, 0.0, False)
    probabilities = mu.weights / mu.weights.sum()
    best_centers, best_error = None, math.inf
    for restart, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        start = mu.points[rng.choice(len(mu), size=n, replace=False, p=probabilities)]
        centers, error, iterations = _lloyd_run(mu.points, mu.weights, start, r, max_iter)
        logging.debug(f"Lloyd restart {restart}: V = {error:.6g} after {iterations} iterations")
        if error < best_error:
            best_centers, best_error = centers, error
    return QuantizerResult(n, r, PointSet(best_centers).sorted(), best_error, False)


def error_curve(
    mu: DiscreteMeasure,
    n_max: int,
    r: float,
    mode: str = EXACT,
    restarts: int = DEFAULT_LLOYD_RESTARTS,
    seed=DEFAULT_SEED,
) -> ErrorCurve:
    """V_{n,r} for n = 1..n_max by one engine, made non-increasing."""
    _check_codebook_size(n_max)
    _check_order(r)
    if mode == EXACT:
        solver = _exact_solver(mu, n_max, r)
        values = np.array([solver.result(n).error for n in range(1, n_max + 1)])
    elif mode == LLOYD:
        values = np.array([quant_error_lloyd(mu, n, r, restarts, seed).error for n in range(1, n_max + 1)])
    else:
        raise UnsupportedModeError(f"unknown quantization engine {mode!r} (expected {EXACT!r} or {LLOYD!r})")
    repaired = np.minimum.accumulate(values)
    if mode == LLOYD and np.any(repaired < values):
        logging.warning(f"Lloyd curve was not monotone at n = {(np.flatnonzero(repaired < values) + 1).tolist()}; repaired")
    return ErrorCurve(r, tuple(CurveEntry(n, float(v), mode == EXACT) for n, v in zip(range(1, n_max + 1), repaired)))


def _window(curve: ErrorCurve, window: Optional[Tuple[int, int]]):
    if window is None:
        return curve.entries[len(curve.entries) // 2:]
    n_lo, n_hi = window
    return tuple(e for e in curve.entries if n_lo <= e.n <= n_hi)


def estimate_quant_dim(curve: ErrorCurve, window: Optional[Tuple[int, int]] = None) -> DimensionEstimate:
    """
    Least-squares slope of log n against -log(V)/r over the fit window (default: the
    larger half of the curve). A curve that reaches V = 0 belongs to a finitely
    supported measure and reports 0.
    """
    entries = _window(curve, window)
    r = curve.r
    if any(e.V == 0 for e in curve.entries):
        raw = tuple((e.n, 0.0) for e in entries if e.V == 0)
        return DimensionEstimate(0.0, "zero-error", raw=raw, lower_proxy=0.0, upper_proxy=0.0,
                                 diagnostics={"first_zero": next(e.n for e in curve.entries if e.V == 0)})
    usable = [e for e in entries if e.V > 0]
    if len(usable) < 3:
        raise InsufficientDataError(f"quantization dimension fit needs 3 positive curve points, got {len(usable)}")
    x = np.array([-math.log(e.V) / r for e in usable])
    y = np.array([math.log(e.n) for e in usable])
    if np.ptp(x) == 0:
        raise InsufficientDataError("error curve is flat over the fit window")
    fit = linregress(x, y)
    raw = tuple((e.n, r * math.log(e.n) / -math.log(e.V)) for e in usable if e.n > 1 and e.V < 1)
    lower = min((v for _, v in raw), default=None)
    upper = max((v for _, v in raw), default=None)
    return DimensionEstimate(
        value=max(float(fit.slope), 0.0),
        method="loglog-fit",
        raw=raw,
        lower_proxy=lower,
        upper_proxy=upper,
        diagnostics={
            "window": [usable[0].n, usable[-1].n],
            "intercept": float(fit.intercept),
            "rvalue": float(fit.rvalue),
            "points": len(usable),
        },
    )


def quant_coefficients(curve: ErrorCurve, s: float):
    """The diagnostic sequence (n, n^{r/s} V_{n,r})."""
    if not s > 0:
        raise InvalidInputError(f"coefficient exponent must be positive, got {s}")
    return [(e.n, e.n ** (curve.r / s) * e.V) for e in curve.entries]


def _validate_gl_inputs(p, c, r):
    p = np.asarray(p, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    if p.size != c.size or p.size < 2:
        raise InvalidInputError(f"need matching probability and ratio vectors of length >= 2, got {p.size} and {c.size}")
    if np.any(p <= 0) or abs(math.fsum(p) - 1.0) > PROBABILITY_TOL:
        raise InvalidInputError("probabilities must be positive and sum to 1")
    if np.any(c <= 0) or np.any(c >= 1):
        raise InvalidInputError("contraction ratios must lie in (0, 1)")
    _check_order(r)
    return p, c


def solve_graf_luschgy(p: Sequence[float], c: Sequence[float], r: float) -> GLSolution:
    """
    D_r from sum_i (p_i c_i^r)^{D/(D+r)} = 1.

    phi(x) = sum_i (p_i c_i^r)^x decreases from N at x = 0 to below 1 at x = 1, so
    bisection on x = D/(D+r) is always bracketed.
    """
    p, c = _validate_gl_inputs(p, c, r)
    base = p * c ** r

    def excess(x):
        return math.fsum(base ** x) - 1.0

    x = bisect(excess, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    residual = excess(x)
    if abs(residual) > 1e-12:
        raise NumericalFailureError(f"Graf-Luschgy bisection stopped with residual {residual!r}")
    return GLSolution(r * x / (1 - x), residual, (0.0, 1.0), x)


def inverse_graf_luschgy(alpha: float, r: float, dim: int = 1):
    """
    A model whose quantization dimension of order r is alpha: an equal-weight
    two-map system per axis with ratio 2^{-dim/alpha}, or the uniform cube when
    alpha = dim.
    """
    _check_order(r)
    if not (0 < alpha <= dim):
        raise InvalidInputError(f"target quantization dimension must lie in (0, {dim}], got {alpha}")
    return designate(alpha / dim, dim)
