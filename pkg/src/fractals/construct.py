#!/usr/bin/env python3
"""
construct.py

Constructive density: given a compact set or a probability measure, a
tolerance epsilon and a target dimension, build a nearby object whose dimension
is known exactly, together with a finite realization and an exact check of the
distance to the input.

Sets:
    anchors form an epsilon-net of the input; a block of diameter epsilon/4
    (nothing, a central Cantor set, or an interval) starts at every anchor.
Measures:
    the input is pushed onto an epsilon/2-net (theta) and convolved with a
    self-similar measure shrunk to diameter epsilon/2 (lambda_1).

Status: Development
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.spatial.distance import cdist

from fractals.config import CONSTRUCTION_MAX_DEPTH, DIMENSION_TOL, TRANSPORT_CAP
from fractals.errors import BudgetError, InvalidInputError, NumericalFailureError, ResourceLimitError, UnsupportedModeError
from fractals.geometry import PointSet, greedy_net, hausdorff_distance
from fractals.ifs import IFSystem, attractor_hull, cantor_system, designate, lower_dim_formula, similarity_dim
from fractals.measure import DiracCombination, DiscreteMeasure, convolve, kantorovich_distance
from fractals.quantization import inverse_graf_luschgy
from fractals.symbolic import CertifiedDims, Convolve, DiracCombo, Invariant, Scale, Uniform, certified_dims, realize

EMPTY_BLOCK = "empty"
CANTOR_BLOCK = "cantor"
INTERVAL_BLOCK = "interval"
SPLIT_BLOCK = "ball-plus-points"


class BlockDescriptor(NamedTuple):
    kind: str
    ratio: Optional[float] = None
    depth: Optional[int] = None
    width: Optional[float] = None

    def to_dict(self):
        return {"kind": self.kind, "ratio": self.ratio, "depth": self.depth, "width": self.width}


@dataclass(frozen=True, eq=False)
class SetApproximation:
    epsilon: float
    anchors: PointSet
    block: BlockDescriptor
    realized: PointSet
    certified_lower_dim: float
    certified_hausdorff_dim: Optional[float]
    hausdorff_check: float

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "anchors": self.anchors.points.tolist(),
            "block": self.block.to_dict(),
            "certified_lower_dim": self.certified_lower_dim,
            "certified_hausdorff_dim": self.certified_hausdorff_dim,
            "realized_points": len(self.realized),
            "hausdorff_check": self.hausdorff_check,
        }


class EpsilonBudget(NamedTuple):
    net: float
    scale: float
    depth: float

    @property
    def total(self) -> float:
        return self.net + self.scale + self.depth

    def to_dict(self):
        return {"net": self.net, "scale": self.scale, "depth": self.depth, "total": self.total}


@dataclass(frozen=True, eq=False)
class MeasureApproximation:
    epsilon: float
    symbolic: object
    realized: DiscreteMeasure
    certified: CertifiedDims
    epsilon_budget: EpsilonBudget
    depth: int
    kantorovich_check: Optional[float] = None
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "depth": self.depth,
            "certified": self.certified.to_dict(),
            "epsilon_budget": self.epsilon_budget.to_dict(),
            "kantorovich_check": self.kantorovich_check,
            "realized_atoms": len(self.realized),
            "notes": dict(self.notes),
        }


def _check_epsilon(epsilon):
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")


def epsilon_net(A: PointSet, epsilon: float) -> PointSet:
    """
    Greedy anchors a_1..a_n from A: every point of A is strictly closer than
    epsilon to an anchor and distinct anchors are at least epsilon apart.
    """
    _check_epsilon(epsilon)
    chosen = greedy_net(A.points, epsilon, strict=True)
    return PointSet(A.points[chosen]).sorted()


def _require_line(A: PointSet):
    if A.dim != 1:
        raise UnsupportedModeError(f"set constructions work on the line, got dimension {A.dim}")


def _block_offsets(kind: str, ratio: Optional[float], depth: int) -> np.ndarray:
    """Block points in [0, 1] starting at 0."""
    if kind == EMPTY_BLOCK:
        return np.zeros(1)
    if kind == INTERVAL_BLOCK:
        return np.arange(2 ** depth + 1) / 2 ** depth
    # left endpoints f_w(0) of the depth-k cylinders
    system = cantor_system(ratio)
    points = np.zeros((1, 1))
    for _ in range(depth):
        points = np.concatenate([m.apply(points) for m in system.maps])
    return np.sort(points[:, 0])


def _verified(A: PointSet, realized: PointSet, epsilon: float) -> float:
    check = hausdorff_distance(A, realized)
    if not check < epsilon:
        raise NumericalFailureError(f"realized set is {check!r} away from the input, not below epsilon {epsilon!r}")
    return check


def _approximate_set(A: PointSet, epsilon: float, gamma: float, depth: int) -> SetApproximation:
    _require_line(A)
    _check_epsilon(epsilon)
    if not 0 <= gamma <= 1:
        raise InvalidInputError(f"target dimension on the line must lie in [0, 1], got {gamma}")
    if depth < 1:
        raise InvalidInputError("block depth must be at least 1")
    anchors = epsilon_net(A, epsilon)
    width = epsilon / 4
    if gamma == 0:
        block = BlockDescriptor(EMPTY_BLOCK)
        lower = hausdorff = 0.0
    elif gamma == 1:
        block = BlockDescriptor(INTERVAL_BLOCK, depth=depth, width=width)
        lower = hausdorff = 1.0
    else:
        ratio = 2.0 ** (-1.0 / gamma)
        block = BlockDescriptor(CANTOR_BLOCK, ratio=ratio, depth=depth, width=width)
        system = cantor_system(ratio)
        # finite unions of separated copies keep the dimensions of one copy;
        # for two equal-weight maps both equal log 2 / log(1 / ratio)
        lower = lower_dim_formula(system)
        hausdorff = similarity_dim(system)
        if not math.isclose(hausdorff, lower, rel_tol=0.0, abs_tol=DIMENSION_TOL):
            raise NumericalFailureError(f"Cantor block dimensions disagree: {lower!r} vs {hausdorff!r}")
        hausdorff = lower
    offsets = _block_offsets(block.kind, block.ratio, depth)
    realized = PointSet((anchors.points[:, 0][:, None] + width * offsets[None, :]).reshape(-1, 1)).sorted()
    check = _verified(A, realized, epsilon)
    logging.debug(f"set approximation: {len(anchors)} anchors, {block.kind} blocks, hausdorff {check:.6g}")
    return SetApproximation(epsilon, anchors, block, realized, lower, hausdorff, check)


def approximate_set_lower_dim(A: PointSet, epsilon: float, gamma: float, depth: int = 10) -> SetApproximation:
    """A set within epsilon of A (Hausdorff) whose lower dimension is gamma."""
    return _approximate_set(A, epsilon, gamma, depth)


def approximate_set_equal_dims(A: PointSet, epsilon: float, gamma: float, depth: int = 10) -> SetApproximation:
    """
    A set within epsilon of A whose lower and Hausdorff dimensions both equal gamma.

    The blocks are central Cantor sets (or intervals), which are Ahlfors regular, so
    the union is Ahlfors regular as well.
    """
    approximation = _approximate_set(A, epsilon, gamma, depth)
    if not math.isclose(
        approximation.certified_hausdorff_dim, approximation.certified_lower_dim, rel_tol=0.0, abs_tol=DIMENSION_TOL
    ):
        raise NumericalFailureError("Ahlfors-regular blocks must certify equal dimensions")
    return approximation


def approximate_set_split_dims(A: PointSet, epsilon: float, depth: int = 10) -> SetApproximation:
    """
    A set within epsilon of A with lower dimension 0 and Hausdorff dimension 1:
    a dyadic sample of the ball of radius epsilon/2 around the first anchor plus
    the remaining anchors as isolated points.
    """
    _require_line(A)
    _check_epsilon(epsilon)
    anchors = epsilon_net(A, epsilon).points[:, 0]
    if len(anchors) == 1:
        # one anchor: add an isolated point so the lower dimension drops to zero
        anchors = np.array([anchors[0], anchors[0] + 3 * epsilon / 4])
    first = anchors[0]
    ball = first - epsilon / 2 + epsilon * np.arange(2 ** depth + 1) / 2 ** depth
    realized = PointSet(np.concatenate([ball, anchors[1:]]).reshape(-1, 1)).sorted()
    check = _verified(A, realized, epsilon)
    block = BlockDescriptor(SPLIT_BLOCK, depth=depth, width=epsilon)
    return SetApproximation(epsilon, PointSet(anchors), block, realized, 0.0, 1.0, check)


def push_to_net(theta: DiscreteMeasure, epsilon: float):
    """Move every atom to its nearest anchor of an epsilon/2-net; returns the new measure and the transport cost."""
    anchors = epsilon_net(theta.support, epsilon / 2).points
    dist = cdist(theta.points, anchors)
    nearest = dist.argmin(axis=1)
    moved = dist[np.arange(len(theta)), nearest]
    net_error = math.fsum(theta.weights * moved)
    return DiracCombination(anchors[nearest], theta.weights), net_error


def _model_node(model):
    if isinstance(model, IFSystem):
        return Invariant(model), model
    return Uniform(model), model.as_ifs()


def _kantorovich_check(theta, realized, epsilon):
    if theta.dim > 1 and len(theta) + len(realized) > TRANSPORT_CAP:
        logging.warning(f"skipping exact Kantorovich check: {len(theta) + len(realized)} atoms exceed {TRANSPORT_CAP}")
        return None
    check = kantorovich_distance(theta, realized)
    if not check < epsilon:
        raise NumericalFailureError(f"realized measure is {check!r} away from the input, not below epsilon {epsilon!r}")
    return check


def _approximate_measure(theta, epsilon, target, r, depth, model_for_target):
    theta.require_normalized("measure approximation")
    _check_epsilon(epsilon)
    if not 0 <= target <= theta.dim:
        raise InvalidInputError(f"target dimension must lie in [0, {theta.dim}], got {target}")
    if not 1 <= depth <= CONSTRUCTION_MAX_DEPTH:
        raise InvalidInputError(f"realization depth must lie in [1, {CONSTRUCTION_MAX_DEPTH}], got {depth}")
    anchored, net_error = push_to_net(theta, epsilon)
    if target == 0:
        symbolic = DiracCombo(anchored)
        budget = EpsilonBudget(net_error, 0.0, 0.0)
        check = _kantorovich_check(theta, anchored, epsilon)
        return MeasureApproximation(epsilon, symbolic, anchored, certified_dims(symbolic, r), budget, 0, check)

    node, system = _model_node(model_for_target(target))
    beta = 2 * attractor_hull(system).diameter / epsilon
    shrunk = Scale(node, beta)
    symbolic = Convolve(DiracCombo(anchored), shrunk)
    budget = None
    for k in range(depth, CONSTRUCTION_MAX_DEPTH + 1):
        try:
            part, depth_error = realize(shrunk, k)
        except ResourceLimitError as e:
            raise BudgetError(f"epsilon budget not met before the depth cap: {e}", budget and budget.to_dict()) from e
        scale_error = math.fsum(part.weights * np.linalg.norm(part.points, axis=1))
        budget = EpsilonBudget(net_error, scale_error, depth_error)
        if budget.total < epsilon:
            break
        logging.debug(f"depth {k}: budget {budget.total:.6g} >= epsilon {epsilon:.6g}, going deeper")
    else:
        raise BudgetError(f"epsilon budget {budget.total!r} not below {epsilon!r} at depth {CONSTRUCTION_MAX_DEPTH}",
                          budget.to_dict())
    realized = convolve(anchored, part)
    check = _kantorovich_check(theta, realized, epsilon)
    notes = {"scale_factor": beta, "anchors": len(anchored), "model": node.to_dict()}
    return MeasureApproximation(epsilon, symbolic, realized, certified_dims(symbolic, r), budget, k, check, notes)


def approximate_measure_lower_dim(
    theta: DiscreteMeasure, epsilon: float, beta: float, depth: int = 10, r: float = 2.0
) -> MeasureApproximation:
    """A measure within epsilon of theta (Kantorovich) whose lower dimension is beta."""
    return _approximate_measure(theta, epsilon, beta, r, depth, lambda b: designate(b / theta.dim, theta.dim))


def approximate_measure_quant_dim(
    theta: DiscreteMeasure, epsilon: float, alpha: float, r: float = 2.0, depth: int = 10
) -> MeasureApproximation:
    """A measure within epsilon of theta whose quantization dimension of order r is alpha."""
    return _approximate_measure(theta, epsilon, alpha, r, depth, lambda a: inverse_graf_luschgy(a, r, theta.dim))
