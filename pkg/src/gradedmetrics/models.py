"""Concrete graded elements and their seminorm ladders.

Two models are provided: truncated real sequences, whose ladder collects
partial sums of coordinate magnitudes, and band-limited periodic
functions on the circle, whose ladder collects partial sums of sup norms
of successive spectral derivatives.  Both are immutable value types with
exact vector arithmetic, so metric identities hold exactly at finite
depth instead of up to a tail estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import SeminormLadder, graded_metric
from .errors import DomainError, ShapeError

_GRID_FACTOR = 8  # sup norms are taken on a grid this many times the bandwidth


def _frozen(arr):
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TruncatedSequence:
    """Element of the depth-N sequence model; coords[0] is the first level."""

    coords: np.ndarray

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.coords, dtype=float))
        if vals.ndim != 1 or vals.size == 0:
            raise ShapeError("coords must form a non-empty 1-d array")
        if not np.all(np.isfinite(vals)):
            raise DomainError("coords must be finite")
        object.__setattr__(self, "coords", _frozen(vals))

    @property
    def depth(self):
        return int(self.coords.size)

    def _check_same(self, other):
        if not isinstance(other, TruncatedSequence):
            raise ShapeError("mixed graded models in arithmetic")
        if other.depth != self.depth:
            raise ShapeError(f"depth mismatch {self.depth} vs {other.depth}")

    def __add__(self, other):
        self._check_same(other)
        return TruncatedSequence(self.coords + other.coords)

    def __sub__(self, other):
        self._check_same(other)
        return TruncatedSequence(self.coords - other.coords)

    def __mul__(self, scalar):
        return TruncatedSequence(self.coords * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return TruncatedSequence(-self.coords)

    def level_norms(self, depth=None):
        """Per-level seminorms |coords[k]| (the ladder increments)."""
        depth = self.depth if depth is None else depth
        if depth > self.depth:
            raise ShapeError(f"depth {depth} exceeds truncation {self.depth}")
        return np.abs(self.coords[:depth])

    def ladder(self, depth=None):
        """Partial sums of coordinate magnitudes up to the requested depth."""
        return SeminormLadder(np.cumsum(self.level_norms(depth)))

    def sup_coordinate_norm(self):
        return float(np.max(np.abs(self.coords)))


def zero_sequence(depth):
    return TruncatedSequence(np.zeros(depth))


def unit_sequence(depth, index):
    """Basis vector with a single 1 at the given 0-based level."""
    if not 0 <= index < depth:
        raise ShapeError(f"index {index} outside 0..{depth - 1}")
    coords = np.zeros(depth)
    coords[index] = 1.0
    return TruncatedSequence(coords)


def _mode_numbers(bandwidth):
    return np.arange(-bandwidth, bandwidth + 1)


_BASIS_CACHE = {}


def _eval_basis(bandwidth, size):
    key = (bandwidth, size)
    basis = _BASIS_CACHE.get(key)
    if basis is None:
        x = 2.0 * np.pi * np.arange(size) / size
        basis = np.exp(1j * np.outer(x, _mode_numbers(bandwidth)))
        _BASIS_CACHE[key] = basis
    return basis


@dataclass(frozen=True)
class PeriodicFunction:
    """Real band-limited function on the circle, stored as Fourier modes -B..B."""

    fourier: np.ndarray

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.fourier, dtype=complex))
        if vals.ndim != 1 or vals.size % 2 == 0:
            raise ShapeError("fourier must hold modes -B..B (odd length)")
        if not np.all(np.isfinite(vals)):
            raise DomainError("fourier coefficients must be finite")
        mirrored = np.conj(vals[::-1])
        if not np.allclose(vals, mirrored, rtol=0.0, atol=1e-12):
            raise DomainError("realness requires c[-k] == conj(c[k])")
        # symmetrize so the realness constraint holds exactly from here on
        object.__setattr__(self, "fourier", _frozen((vals + mirrored) / 2.0))

    @property
    def bandwidth(self):
        return int((self.fourier.size - 1) // 2)

    def _check_same(self, other):
        if not isinstance(other, PeriodicFunction):
            raise ShapeError("mixed graded models in arithmetic")
        if other.bandwidth != self.bandwidth:
            raise ShapeError(f"bandwidth mismatch {self.bandwidth} vs {other.bandwidth}")

    def __add__(self, other):
        self._check_same(other)
        return PeriodicFunction(self.fourier + other.fourier)

    def __sub__(self, other):
        self._check_same(other)
        return PeriodicFunction(self.fourier - other.fourier)

    def __mul__(self, scalar):
        return PeriodicFunction(self.fourier * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return PeriodicFunction(-self.fourier)

    def grid(self, size=None):
        """Sample points and values on a uniform grid (default 8x bandwidth)."""
        size = size or _GRID_FACTOR * max(self.bandwidth, 1)
        x = 2.0 * np.pi * np.arange(size) / size
        values = np.real(_eval_basis(self.bandwidth, size) @ self.fourier)
        return x, values

    def __call__(self, x):
        k = _mode_numbers(self.bandwidth)
        return np.real(np.exp(1j * np.multiply.outer(np.asarray(x, dtype=float), k)) @ self.fourier)

    def derivative(self, order=1):
        k = _mode_numbers(self.bandwidth)
        return PeriodicFunction(self.fourier * (1j * k) ** order)

    def embed(self, bandwidth):
        """Same function viewed at a larger bandwidth (zero-padded modes)."""
        if bandwidth < self.bandwidth:
            raise ShapeError("embedding cannot reduce the bandwidth")
        pad = bandwidth - self.bandwidth
        return PeriodicFunction(np.pad(self.fourier, (pad, pad)))

    def sup_norm(self):
        _, values = self.grid()
        return float(np.max(np.abs(values)))

    def level_norms(self, depth):
        """Sup norms of the spectral derivatives of orders 0..depth-1."""
        k = _mode_numbers(self.bandwidth)
        size = _GRID_FACTOR * max(self.bandwidth, 1)
        basis = _eval_basis(self.bandwidth, size)
        coeffs = self.fourier.copy()
        norms = np.empty(depth)
        for i in range(depth):
            norms[i] = np.max(np.abs(np.real(basis @ coeffs)))
            coeffs = coeffs * (1j * k)
        return norms

    def ladder(self, depth):
        """Partial sums of derivative sup norms up to the requested depth."""
        return SeminormLadder(np.cumsum(self.level_norms(depth)))

    def sup_coordinate_norm(self):
        return self.sup_norm()


def zero_function(bandwidth):
    return PeriodicFunction(np.zeros(2 * bandwidth + 1, dtype=complex))


def harmonic(mode, bandwidth=None, amplitude=1.0, cosine=False):
    """amplitude * sin(mode * x), or the cosine companion."""
    if mode < 0:
        raise DomainError("mode must be non-negative")
    bandwidth = mode if bandwidth is None else bandwidth
    if bandwidth < mode:
        raise DomainError(f"bandwidth {bandwidth} below mode {mode}")
    coeffs = np.zeros(2 * bandwidth + 1, dtype=complex)
    center = bandwidth
    if mode == 0:
        coeffs[center] = amplitude if cosine else 0.0
    elif cosine:
        coeffs[center + mode] = amplitude / 2.0
        coeffs[center - mode] = amplitude / 2.0
    else:
        coeffs[center + mode] = amplitude / 2j
        coeffs[center - mode] = -amplitude / 2j
    return PeriodicFunction(coeffs)


def make_fk(k, bandwidth=None):
    """Witness (1/k) * sin(k^2 x) whose derivative sup grows like k^2."""
    if k < 1:
        raise DomainError("k must be a positive integer")
    mode = k * k
    bandwidth = mode if bandwidth is None else bandwidth
    if bandwidth < mode:
        raise DomainError(f"bandwidth {bandwidth} too small for mode {mode}")
    return harmonic(mode, bandwidth=bandwidth, amplitude=1.0 / k)


def random_sequence(rng, depth, scale=1.0):
    return TruncatedSequence(rng.normal(size=depth) * scale)


def random_function(rng, bandwidth, scale=1.0, decay=1.0):
    """Random real trigonometric polynomial with geometrically damped modes."""
    coeffs = np.zeros(2 * bandwidth + 1, dtype=complex)
    center = bandwidth
    coeffs[center] = rng.normal() * scale
    for k in range(1, bandwidth + 1):
        c = (rng.normal() + 1j * rng.normal()) * scale * decay**k
        coeffs[center + k] = c / 2.0
        coeffs[center - k] = np.conj(c) / 2.0
    return PeriodicFunction(coeffs)


def element_norm(v, cfg):
    """Graded-metric distance of a model element from the origin."""
    return graded_metric(v.ladder(cfg.truncation), None, cfg)


def element_metric(u, v, cfg):
    """Graded-metric distance between two elements of the same model."""
    return graded_metric((u - v).ladder(cfg.truncation), None, cfg)


@dataclass(frozen=True)
class CurveSpec:
    """Curve in a graded model with explicit position and velocity accessors."""

    kind: str
    domain: tuple
    position: Callable
    velocity: Callable

    def __post_init__(self):
        a, b = self.domain
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise DomainError("domain must be a finite non-degenerate interval")
        object.__setattr__(self, "domain", (float(a), float(b)))

    @property
    def span(self):
        return self.domain[1] - self.domain[0]

    def restricted(self, a, b):
        if not self.domain[0] <= a < b <= self.domain[1]:
            raise DomainError("restriction must stay inside the domain")
        return CurveSpec(self.kind, (a, b), self.position, self.velocity)


def line_curve(v):
    """t -> t*v on [0, 1] with constant velocity v."""
    return CurveSpec("line", (0.0, 1.0), lambda t: v * float(t), lambda t: v)


def affine_curve(a, b):
    """t -> (1-t)*a + t*b on [0, 1] with constant velocity b - a."""
    diff = b - a
    return CurveSpec(
        "affine",
        (0.0, 1.0),
        lambda t: a + diff * float(t),
        lambda t: diff,
    )


def closed_form_curve(position, velocity, domain=(0.0, 1.0)):
    return CurveSpec("closed-form", tuple(domain), position, velocity)
