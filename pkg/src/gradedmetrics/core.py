"""Graded metrics built from weight sequences and a bounded modulus.

Two metric flavors act on seminorm ladders (non-decreasing arrays of
partial-sum seminorms attached to elements of a graded model): the
standard flavor sums weighted modulus values over the levels, the
supremum flavor takes their maximum.  A depth-N model is an exact
finite-dimensional metric space in its own right, not an approximation
of an infinite one.

Everything here is a pure function of immutable values; concurrent use
needs no synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError

STANDARD = "standard-sum"
SUPREMUM = "supremum"
_FLAVORS = (STANDARD, SUPREMUM)


def phi(x):
    """Bounded modulus x / (1 + x), mapping [0, inf) onto [0, 1).

    Strictly increasing, concave and subadditive with phi(0) == 0; these
    three properties are what turn a seminorm ladder into a metric.
    Accepts scalars or arrays; negative input raises DomainError.
    """
    arr = np.asarray(x, dtype=float)
    if arr.size and np.any(arr < 0):
        raise DomainError("phi is defined on [0, inf) only")
    out = arr / (1.0 + arr)
    if arr.ndim == 0:
        return float(out)
    return out


def phi_inverse(y):
    """Inverse modulus y / (1 - y) on [0, 1)."""
    arr = np.asarray(y, dtype=float)
    if arr.size and (np.any(arr < 0) or np.any(arr >= 1)):
        raise DomainError("phi_inverse is defined on [0, 1) only")
    out = arr / (1.0 - arr)
    if arr.ndim == 0:
        return float(out)
    return out


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class WeightSequence:
    """Positive, non-increasing level weights; one weight per ladder level."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        if vals.ndim != 1 or vals.size == 0:
            raise ShapeError("weights must form a non-empty 1-d array")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise DomainError("weights must be positive and finite")
        if np.any(np.diff(vals) > 0):
            raise DomainError("weights must be non-increasing")
        object.__setattr__(self, "values", _frozen_array(vals))

    def __len__(self):
        return int(self.values.size)

    def head(self, depth):
        if not 1 <= depth <= len(self):
            raise ShapeError(f"depth {depth} outside 1..{len(self)}")
        return self.values[:depth]


def geometric_weights(r, depth):
    """Weight sequence (r, r**2, ..., r**depth) for a ratio r in (0, 1)."""
    if not 0.0 < r < 1.0:
        raise DomainError("geometric ratio must lie in (0, 1)")
    if depth < 1:
        raise DomainError("depth must be positive")
    return WeightSequence(r ** np.arange(1, depth + 1, dtype=float))


@dataclass(frozen=True)
class SeminormLadder:
    """Non-negative, non-decreasing partial-sum seminorms, level 0 upward."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        if vals.ndim != 1 or vals.size == 0:
            raise ShapeError("ladder must form a non-empty 1-d array")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise DomainError("ladder entries must be non-negative and finite")
        if np.any(np.diff(vals) < 0):
            raise DomainError("ladder entries must be non-decreasing")
        object.__setattr__(self, "values", _frozen_array(vals))

    @property
    def depth(self):
        return int(self.values.size)

    def is_zero(self):
        return bool(self.values[-1] == 0.0)


def zero_ladder(depth):
    return SeminormLadder(np.zeros(depth))


@dataclass(frozen=True)
class GradedMetricConfig:
    """Metric flavor, weight sequence and truncation depth of a graded model."""

    flavor: str
    weights: WeightSequence
    truncation: int

    def __post_init__(self):
        if self.flavor not in _FLAVORS:
            raise DomainError(f"unknown flavor {self.flavor!r}; expected one of {_FLAVORS}")
        if not 1 <= self.truncation <= len(self.weights):
            raise ShapeError("truncation must lie within the weight sequence")

    @property
    def level_weights(self):
        return self.weights.head(self.truncation)

    def with_truncation(self, truncation):
        return GradedMetricConfig(self.flavor, self.weights, truncation)

    def metric(self, a, b=None):
        return graded_metric(a, b, self)


def standard_config(depth, r=0.5):
    """Standard-sum metric with geometric weights, the package default."""
    return GradedMetricConfig(STANDARD, geometric_weights(r, depth), depth)


def supremum_config(depth, r=0.5):
    return GradedMetricConfig(SUPREMUM, geometric_weights(r, depth), depth)


def _weighted_terms(a, b, cfg):
    if a.depth != cfg.truncation:
        raise ShapeError(f"ladder depth {a.depth} != truncation {cfg.truncation}")
    if b is None:
        delta = a.values
    else:
        if b.depth != a.depth:
            raise ShapeError(f"ladder depths differ: {a.depth} vs {b.depth}")
        delta = np.abs(a.values - b.values)
    return cfg.level_weights * phi(delta)


def standard_metric(a, b, cfg):
    """Weighted sum of modulus values over ladder levels.

    `b=None` stands for the zero ladder; callers measuring the distance
    between two model elements pass the ladder of their difference, which
    is what makes the result translation invariant.
    """
    return float(np.sum(_weighted_terms(a, b, cfg)))


def sup_metric(a, b, cfg):
    """Weighted maximum of modulus values over ladder levels."""
    return float(np.max(_weighted_terms(a, b, cfg)))


def graded_metric(a, b, cfg):
    if cfg.flavor == STANDARD:
        return standard_metric(a, b, cfg)
    return sup_metric(a, b, cfg)


def comparability_check(ladder, r, depth):
    """Triple (sum metric at ratio r**2, sup metric at r, sum metric at r).

    The triple is expected to be non-decreasing; that ordering is provable
    whenever r <= 1/2 (the sum of the squared-ratio weights is then
    dominated by the sup weight) and fails for generic ladders once
    r > 1/2, so callers should treat the ordering as an input-dependent
    fact, not an identity.  A zero ladder degenerates to (0, 0, 0).
    """
    if ladder.depth != depth:
        raise ShapeError(f"ladder depth {ladder.depth} != {depth}")
    if ladder.is_zero():
        return (0.0, 0.0, 0.0)
    slow = GradedMetricConfig(STANDARD, geometric_weights(r * r, depth), depth)
    sup = GradedMetricConfig(SUPREMUM, geometric_weights(r, depth), depth)
    fast = GradedMetricConfig(STANDARD, geometric_weights(r, depth), depth)
    return (
        standard_metric(ladder, None, slow),
        sup_metric(ladder, None, sup),
        standard_metric(ladder, None, fast),
    )


def line_profile(t):
    """Piecewise profile: t on [0,1], 1-(t-1)/2 on [1,2], 1/2+(t-2)/3 beyond."""
    t = float(t)
    if t < 0:
        raise DomainError("profile argument must be non-negative")
    if t <= 1.0:
        return t
    if t <= 2.0:
        return 1.0 - (t - 1.0) / 2.0
    return 0.5 + (t - 2.0) / 3.0


def piecewise_line_metric(x, y):
    """Translation-invariant distance on the line with disconnected balls.

    The radius-0.6 ball around 0 contains 2 (distance 0.5) but not 1
    (distance 1).  The profile is subadditive only for separations below
    roughly 1.9; beyond that the triangle inequality genuinely fails, so
    this is a ball-geometry counterexample, not a full metric.
    """
    return line_profile(abs(float(x) - float(y)))


@dataclass(frozen=True)
class NonConvexityWitness:
    """Two ladders on a standard-metric sphere whose midpoint leaves the ball."""

    radius: float
    first: SeminormLadder
    second: SeminormLadder
    midpoint: SeminormLadder
    first_value: float
    second_value: float
    midpoint_value: float

    @property
    def margin(self):
        return self.midpoint_value - self.radius


def standard_ball_nonconvexity_witness(cfg, radius=None):
    """Search for a witness that standard-metric balls are not convex.

    Places mass `a` on the first level and `b` on the second level so that
    both points sit on the sphere of the given radius; strict concavity of
    the modulus then pushes their midpoint outside the ball.  The returned
    ladders are those of a*e1, b*e2 and (a*e1 + b*e2)/2.
    """
    if cfg.flavor != STANDARD:
        raise DomainError("non-convexity witness targets the standard flavor")
    if cfg.truncation < 2:
        raise ShapeError("need at least two levels")
    w = cfg.level_weights
    total = float(np.sum(w))
    tail = total - float(w[0])
    if radius is None:
        radius = 0.5 * tail
    if not 0.0 < radius < tail:
        raise DomainError(f"radius must lie in (0, {tail})")
    a = phi_inverse(radius / total)
    b = phi_inverse(radius / tail)
    first = SeminormLadder(np.full(cfg.truncation, a))
    second_vals = np.full(cfg.truncation, b)
    second_vals[0] = 0.0
    second = SeminormLadder(second_vals)
    mid_vals = np.full(cfg.truncation, (a + b) / 2.0)
    mid_vals[0] = a / 2.0
    midpoint = SeminormLadder(mid_vals)
    return NonConvexityWitness(
        radius=float(radius),
        first=first,
        second=second,
        midpoint=midpoint,
        first_value=standard_metric(first, None, cfg),
        second_value=standard_metric(second, None, cfg),
        midpoint_value=standard_metric(midpoint, None, cfg),
    )
