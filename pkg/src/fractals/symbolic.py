#!/usr/bin/env python3
"""
symbolic.py

Expression trees over measures. A tree is exact: its dimensions are certified
by rewrite rules (discrete base cases, closed forms for separated self-similar
measures, invariance under Dirac convolution, scaling and translation, the max
rule for finite sums), and `realize` turns it into a finite measure with a
bound on its Kantorovich distance to the exact one.

JSON form: every node is an object with an "op" tag in
{dirac, invariant, uniform, convolve, scale, translate, mixture}.

Status: Development
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from fractals.config import PROBABILITY_TOL
from fractals.errors import InvalidInputError, ParseError
from fractals.ifs import (
    IFSystem,
    UniformCube,
    discretize_depth,
    hausdorff_dim_formula,
    lower_dim_formula,
    verify_ssc,
)
from fractals.measure import DiracCombination, DiscreteMeasure, convolve, mixture, scale_measure, translate
from fractals.quantization import solve_graf_luschgy

# certificate entries name the lemma each rewrite rests on
DISCRETE_LOWER = "rem24"
FINITE_QUANT = "example-1"
FINITE_HAUSDORFF = "finite-support-hausdorff-zero"
SELF_SIMILAR_LOWER = "example-2-lower"
GRAF_LUSCHGY = "example-2-graf-luschgy"
ENTROPY_LYAPUNOV = "example-2-entropy-lyapunov"
UNIFORM = "uniform-lebesgue"
DIRAC_CONVOLUTION_LOWER = "convothm"
DIRAC_CONVOLUTION_QUANT = "lipdim1"
SCALING = "1179"
FINITE_SUM_MAX = "lipdim"


class SymbolicMeasure:
    """Base class of expression nodes."""

    op = None

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def is_discrete(self) -> bool:
        """True when the exact measure is finitely supported."""
        return False

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class DiracCombo(SymbolicMeasure):
    measure: DiracCombination
    op = "dirac"

    @property
    def dim(self):
        return self.measure.dim

    def is_discrete(self):
        return True

    def to_dict(self):
        return {
            "op": self.op,
            "dim": self.dim,
            "support": self.measure.points.tolist(),
            "weights": self.measure.weights.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Invariant(SymbolicMeasure):
    system: IFSystem
    op = "invariant"

    @property
    def dim(self):
        return self.system.dim

    def to_dict(self):
        return {"op": self.op, "ifs": self.system.to_dict()}


@dataclass(frozen=True)
class Uniform(SymbolicMeasure):
    cube: UniformCube
    op = "uniform"

    @property
    def dim(self):
        return self.cube.dim

    def to_dict(self):
        return {"op": self.op, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Convolve(SymbolicMeasure):
    left: SymbolicMeasure
    right: SymbolicMeasure
    op = "convolve"

    def __post_init__(self):
        if self.left.dim != self.right.dim:
            raise InvalidInputError(f"cannot convolve measures on R^{self.left.dim} and R^{self.right.dim}")

    @property
    def dim(self):
        return self.left.dim

    def is_discrete(self):
        return self.left.is_discrete() and self.right.is_discrete()

    def to_dict(self):
        return {"op": self.op, "left": self.left.to_dict(), "right": self.right.to_dict()}


@dataclass(frozen=True, eq=False)
class Scale(SymbolicMeasure):
    """theta(E) = child(beta E)."""

    child: SymbolicMeasure
    beta: float
    op = "scale"

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidInputError(f"scaling factor must be positive, got {self.beta}")

    @property
    def dim(self):
        return self.child.dim

    def is_discrete(self):
        return self.child.is_discrete()

    def to_dict(self):
        return {"op": self.op, "beta": self.beta, "child": self.child.to_dict()}


@dataclass(frozen=True, eq=False)
class Translate(SymbolicMeasure):
    """(child + x)(E) = child(E + x)."""

    child: SymbolicMeasure
    x: Tuple[float, ...]
    op = "translate"

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        if len(x) != self.child.dim:
            raise InvalidInputError(f"translation vector has {len(x)} coordinates, measure lives in R^{self.child.dim}")
        object.__setattr__(self, "x", x)

    @property
    def dim(self):
        return self.child.dim

    def is_discrete(self):
        return self.child.is_discrete()

    def to_dict(self):
        return {"op": self.op, "x": list(self.x), "child": self.child.to_dict()}


@dataclass(frozen=True, eq=False)
class Mixture(SymbolicMeasure):
    components: Tuple[Tuple[float, SymbolicMeasure], ...]
    op = "mixture"

    def __post_init__(self):
        components = tuple((float(a), node) for a, node in self.components)
        if not components:
            raise InvalidInputError("mixture needs at least one component")
        if any(a <= 0 for a, _ in components):
            raise InvalidInputError("mixture weights must be positive")
        if abs(math.fsum(a for a, _ in components) - 1.0) > PROBABILITY_TOL:
            raise InvalidInputError("mixture weights must sum to 1")
        if len({node.dim for _, node in components}) != 1:
            raise InvalidInputError("mixture components live in different dimensions")
        object.__setattr__(self, "components", components)

    @property
    def dim(self):
        return self.components[0][1].dim

    def is_discrete(self):
        return all(node.is_discrete() for _, node in self.components)

    def to_dict(self):
        return {
            "op": self.op,
            "components": [{"weight": a, "measure": node.to_dict()} for a, node in self.components],
        }


@dataclass(frozen=True)
class CertifiedDims:
    """Exact dimensions with the rules that justify them; None means unknown."""

    r: float
    lower_dim: Optional[float] = None
    quant_dim: Optional[float] = None
    hausdorff_dim: Optional[float] = None
    lower_certificate: Tuple[str, ...] = ()
    quant_certificate: Tuple[str, ...] = ()
    hausdorff_certificate: Tuple[str, ...] = ()

    def __post_init__(self):
        for value, certificate in self._pairs():
            if (value is None) != (not certificate):
                raise InvalidInputError("a certified dimension needs a certificate and vice versa")

    def _pairs(self):
        return (
            (self.lower_dim, self.lower_certificate),
            (self.quant_dim, self.quant_certificate),
            (self.hausdorff_dim, self.hausdorff_certificate),
        )

    @property
    def certificate(self) -> Tuple[str, ...]:
        names = []
        for _, certificate in self._pairs():
            names.extend(c for c in certificate if c not in names)
        return tuple(names)

    def to_dict(self):
        return {
            "r": self.r,
            "lower_dim": self.lower_dim,
            "quant_dim": self.quant_dim,
            "hausdorff_dim": self.hausdorff_dim,
            "certificate": {
                "lower_dim": list(self.lower_certificate),
                "quant_dim": list(self.quant_certificate),
                "hausdorff_dim": list(self.hausdorff_certificate),
            },
        }


def _extend(value, certificate, rule):
    if value is None:
        return None, ()
    return value, certificate + (rule,)


def certified_dims(sigma: SymbolicMeasure, r: float) -> CertifiedDims:
    """Apply the dimension rewrite rules bottom-up; unknown is a value, never an error."""
    if isinstance(sigma, DiracCombo):
        return CertifiedDims(r, 0.0, 0.0, 0.0, (DISCRETE_LOWER,), (FINITE_QUANT,), (FINITE_HAUSDORFF,))
    if isinstance(sigma, Invariant):
        system = sigma.system
        if not verify_ssc(system).ssc_holds:
            logging.info("invariant measure without a separation certificate; dimensions left unknown")
            return CertifiedDims(r)
        quant = solve_graf_luschgy(system.probabilities, system.ratios, r).value
        return CertifiedDims(
            r,
            lower_dim_formula(system),
            quant,
            hausdorff_dim_formula(system),
            (SELF_SIMILAR_LOWER,),
            (GRAF_LUSCHGY,),
            (ENTROPY_LYAPUNOV,),
        )
    if isinstance(sigma, Uniform):
        m = float(sigma.dim)
        return CertifiedDims(r, m, m, m, (UNIFORM,), (UNIFORM,), (UNIFORM,))
    if isinstance(sigma, Convolve):
        if sigma.right.is_discrete():
            inner = certified_dims(sigma.left, r)
        elif sigma.left.is_discrete():
            inner = certified_dims(sigma.right, r)
        else:
            return CertifiedDims(r)
        lower, lower_cert = _extend(inner.lower_dim, inner.lower_certificate, DIRAC_CONVOLUTION_LOWER)
        quant, quant_cert = _extend(inner.quant_dim, inner.quant_certificate, DIRAC_CONVOLUTION_QUANT)
        return CertifiedDims(r, lower, quant, None, lower_cert, quant_cert)
    if isinstance(sigma, (Scale, Translate)):
        # translate(mu, x) is convolve(mu, delta_{-x})
        lower_rule, quant_rule = (
            (SCALING, SCALING) if isinstance(sigma, Scale) else (DIRAC_CONVOLUTION_LOWER, DIRAC_CONVOLUTION_QUANT)
        )
        inner = certified_dims(sigma.child, r)
        lower, lower_cert = _extend(inner.lower_dim, inner.lower_certificate, lower_rule)
        quant, quant_cert = _extend(inner.quant_dim, inner.quant_certificate, quant_rule)
        return CertifiedDims(r, lower, quant, None, lower_cert, quant_cert)
    if isinstance(sigma, Mixture):
        parts = [certified_dims(node, r) for _, node in sigma.components]
        quant, quant_cert = None, ()
        if all(p.quant_dim is not None for p in parts):
            quant = max(p.quant_dim for p in parts)
            quant_cert = tuple(dict.fromkeys(c for p in parts for c in p.quant_certificate)) + (FINITE_SUM_MAX,)
        if sigma.is_discrete():
            return CertifiedDims(r, 0.0, quant, None, (DISCRETE_LOWER,), quant_cert)
        return CertifiedDims(r, None, quant, None, (), quant_cert)
    raise InvalidInputError(f"unknown symbolic node {type(sigma).__name__}")


class Realization(NamedTuple):
    measure: DiscreteMeasure
    error_bound: float


def realize(sigma: SymbolicMeasure, depth: int) -> Realization:
    """A finite measure within `error_bound` (Kantorovich) of sigma."""
    if isinstance(sigma, DiracCombo):
        return Realization(sigma.measure, 0.0)
    if isinstance(sigma, Invariant):
        return Realization(*discretize_depth(sigma.system, depth))
    if isinstance(sigma, Uniform):
        return Realization(*discretize_depth(sigma.cube.as_ifs(), depth))
    if isinstance(sigma, Convolve):
        left = realize(sigma.left, depth)
        right = realize(sigma.right, depth)
        return Realization(convolve(left.measure, right.measure), left.error_bound + right.error_bound)
    if isinstance(sigma, Scale):
        inner = realize(sigma.child, depth)
        return Realization(scale_measure(inner.measure, sigma.beta), inner.error_bound / sigma.beta)
    if isinstance(sigma, Translate):
        inner = realize(sigma.child, depth)
        return Realization(translate(inner.measure, sigma.x), inner.error_bound)
    if isinstance(sigma, Mixture):
        parts = [(a, realize(node, depth)) for a, node in sigma.components]
        measure = mixture([(a, part.measure) for a, part in parts])
        return Realization(measure, math.fsum(a * part.error_bound for a, part in parts))
    raise InvalidInputError(f"unknown symbolic node {type(sigma).__name__}")


def from_dict(data) -> SymbolicMeasure:
    """Parse the JSON expression tree."""
    if not isinstance(data, dict) or "op" not in data:
        raise ParseError("symbolic measure node must be an object with an 'op' field")
    op = data["op"]
    try:
        if op == "dirac":
            points = np.asarray(data["support"], dtype=float).reshape(-1, int(data.get("dim", 1)))
            return DiracCombo(DiracCombination(points, data["weights"]))
        if op == "invariant":
            return Invariant(IFSystem.from_dict(data["ifs"]))
        if op == "uniform":
            return Uniform(UniformCube(int(data.get("dim", 1))))
        if op == "convolve":
            return Convolve(from_dict(data["left"]), from_dict(data["right"]))
        if op == "scale":
            return Scale(from_dict(data["child"]), float(data["beta"]))
        if op == "translate":
            return Translate(from_dict(data["child"]), tuple(np.atleast_1d(data["x"]).tolist()))
        if op == "mixture":
            return Mixture(tuple((float(c["weight"]), from_dict(c["measure"])) for c in data["components"]))
    except (KeyError, TypeError) as e:
        raise ParseError(f"malformed '{op}' node: {e}") from e
    raise ParseError(f"unknown symbolic op {op!r}")
