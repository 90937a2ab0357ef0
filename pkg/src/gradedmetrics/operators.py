"""Linear operators on graded models and their bounded-norm calculus.

The dilation bound of an operator (supremum of metric ratios over a
punctured ball) is not computable exactly, so it is bracketed: a
deterministic probe plan yields a certified lower bound, and structured
forms (shifts, diagonals, spectral differentiation) carry an analytic
upper bound obtained by re-indexing the seminorm ladder.  Grade-lowering
forms drop one ladder level in their codomain, which is what makes the
re-indexed bound exact at finite truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CertificateViolation,
    ContractionError,
    ConvergenceError,
    DomainError,
    EmptyEstimateError,
    ShapeError,
)
from .models import (
    PeriodicFunction,
    TruncatedSequence,
    element_norm,
    random_function,
    random_sequence,
    unit_sequence,
)

SEQ = "seq"
FN = "fn"


@dataclass(frozen=True)
class LinearOperator:
    """Structured or dense linear map between graded models.

    `ladder_shift` records how many seminorm levels the operator lowers;
    bound estimation evaluates its codomain metric with that many levels
    removed from the truncation.
    """

    kind: str
    space: str
    domain_dim: int
    codomain_dim: int
    ladder_shift: int = 0
    matrix: np.ndarray | None = None
    diag: np.ndarray | None = None
    factors: tuple = ()

    def apply(self, v):
        if self.space == SEQ:
            if not isinstance(v, TruncatedSequence) or v.depth != self.domain_dim:
                raise ShapeError("operator domain mismatch")
            return TruncatedSequence(self._apply_coords(v.coords))
        if not isinstance(v, PeriodicFunction) or v.fourier.size != self.domain_dim:
            raise ShapeError("operator domain mismatch")
        return self._apply_fn(v)

    def _apply_coords(self, c):
        if self.kind == "identity":
            return c
        if self.kind == "up-shift":
            out = c[1:]
            if self.codomain_dim == c.size:
                out = np.append(out, 0.0)
            return out
        if self.kind == "down-shift":
            return np.concatenate(([0.0], c[:-1]))
        if self.kind == "diagonal":
            return self.diag * c
        if self.kind == "dense":
            return self.matrix @ c
        if self.kind == "composition":
            for op in reversed(self.factors):
                c = op._apply_coords(c)
            return c
        raise DomainError(f"unknown operator kind {self.kind!r}")

    def _apply_rows(self, rows):
        """Apply to a batch of coordinate rows at once."""
        if self.kind == "identity":
            return rows
        if self.kind == "up-shift":
            out = rows[:, 1:]
            if self.codomain_dim == rows.shape[1]:
                out = np.hstack([out, np.zeros((rows.shape[0], 1))])
            return out
        if self.kind == "down-shift":
            return np.hstack([np.zeros((rows.shape[0], 1)), rows[:, :-1]])
        if self.kind == "diagonal":
            return rows * self.diag[None, :]
        if self.kind == "dense":
            return rows @ self.matrix.T
        if self.kind == "composition":
            for op in reversed(self.factors):
                rows = op._apply_rows(rows)
            return rows
        raise DomainError(f"unknown operator kind {self.kind!r}")

    def _apply_fn(self, f):
        if self.kind == "identity":
            return f
        if self.kind == "derivative":
            return f.derivative()
        if self.kind == "diagonal":
            return PeriodicFunction(self.diag * f.fourier)
        if self.kind == "dense":
            return PeriodicFunction(self.matrix @ f.fourier)
        if self.kind == "composition":
            for op in reversed(self.factors):
                f = op._apply_fn(f)
            return f
        raise DomainError(f"unknown operator kind {self.kind!r}")

    def materialize(self):
        """Dense matrix of the operator on the truncation."""
        if self.kind == "dense":
            return self.matrix.copy()
        if self.kind == "composition":
            out = self.factors[0].materialize()
            for op in self.factors[1:]:
                out = out @ op.materialize()
            return out
        if self.space == SEQ:
            eye = np.eye(self.domain_dim)
            return np.stack([self._apply_coords(eye[:, j]) for j in range(self.domain_dim)], axis=1)
        if self.kind == "identity":
            return np.eye(self.domain_dim, dtype=complex)
        if self.kind == "derivative":
            bandwidth = (self.domain_dim - 1) // 2
            return np.diag(1j * np.arange(-bandwidth, bandwidth + 1).astype(complex))
        if self.kind == "diagonal":
            return np.diag(self.diag.astype(complex))
        raise DomainError(f"cannot materialize kind {self.kind!r}")

    def compose(self, other):
        if other.codomain_dim != self.domain_dim or other.space != self.space:
            raise ShapeError("composition dimensions do not chain")
        return LinearOperator(
            kind="composition",
            space=self.space,
            domain_dim=other.domain_dim,
            codomain_dim=self.codomain_dim,
            ladder_shift=self.ladder_shift + other.ladder_shift,
            factors=(self, other),
        )

    def analytic_rbound(self, cfg):
        """Upper bound on the metric dilation, when the structure gives one."""
        w = cfg.level_weights
        if self.kind == "identity":
            return 1.0
        if self.kind == "down-shift":
            return float(np.max(w[1:] / w[:-1]))
        if self.kind in ("up-shift", "derivative"):
            ratios = w[:-1] / w[1:]
            if self.ladder_shift == 1:
                return float(np.max(ratios))
            # same-depth variant: the last level absorbs the lost tail
            return float(max(np.max(ratios), (w[-2] + w[-1]) / w[-1]))
        if self.kind == "diagonal":
            return float(max(1.0, np.max(np.abs(self.diag))))
        if self.kind == "composition":
            bounds = [op.analytic_rbound(cfg) for op in self.factors]
            if any(b is None for b in bounds):
                return None
            return float(np.prod(bounds))
        return None


def identity_operator(dim, space=SEQ):
    return LinearOperator("identity", space, dim, dim)


def up_shift(depth, drop_level=True):
    """(sigma a)_n = a_{n+1}; lowers the grade by one level."""
    cod = depth - 1 if drop_level else depth
    if cod < 1:
        raise ShapeError("depth too small for an up-shift")
    return LinearOperator("up-shift", SEQ, depth, cod, ladder_shift=1 if drop_level else 0)


def down_shift(depth):
    """(tau a)_0 = 0, (tau a)_n = a_{n-1}; raises the grade by one level."""
    return LinearOperator("down-shift", SEQ, depth, depth)


def diagonal_operator(values):
    vals = np.atleast_1d(np.asarray(values, dtype=float))
    return LinearOperator("diagonal", SEQ, vals.size, vals.size, diag=vals)


def dense_operator(matrix, space=SEQ):
    mat = np.atleast_2d(np.asarray(matrix))
    return LinearOperator("dense", space, mat.shape[1], mat.shape[0], matrix=mat)


def derivative_operator(bandwidth, drop_level=True):
    """Spectral differentiation on the circle; its ladder action is an up-shift."""
    dim = 2 * bandwidth + 1
    return LinearOperator("derivative", FN, dim, dim, ladder_shift=1 if drop_level else 0)


@dataclass(frozen=True)
class ProbePlan:
    """Deterministic probe battery for dilation-bound estimation.

    Scaled basis elements realize the modulus-saturation suprema that
    random dense vectors miss; the random block guards against structure
    the basis cannot see.
    """

    seed: int = 0
    basis_scales: tuple = tuple(float(t) for t in np.logspace(-3.0, 3.0, 21))
    random_count: int = 200
    random_scales: tuple = tuple(float(t) for t in np.logspace(-3.0, 3.0, 8))

    def seq_probes(self, depth):
        for k in range(depth):
            base = unit_sequence(depth, k)
            for t in self.basis_scales:
                yield f"e{k + 1}*{t:g}", base * t
        rng = np.random.default_rng(self.seed)
        for i in range(self.random_count):
            base = random_sequence(rng, depth)
            for s in self.random_scales:
                yield f"rng{i}*{s:g}", base * s

    def seq_probe_rows(self, depth):
        """All sequence probes as (labels, coordinate-row matrix)."""
        labels = []
        rows = []
        for k in range(depth):
            for t in self.basis_scales:
                labels.append(f"e{k + 1}*{t:g}")
                row = np.zeros(depth)
                row[k] = t
                rows.append(row)
        rng = np.random.default_rng(self.seed)
        for i in range(self.random_count):
            base = rng.normal(size=depth)
            for s in self.random_scales:
                labels.append(f"rng{i}*{s:g}")
                rows.append(base * s)
        return labels, np.asarray(rows)

    def fn_probes(self, bandwidth, random_count=None):
        from .models import harmonic

        for mode in range(1, bandwidth + 1):
            for cosine in (False, True):
                base = harmonic(mode, bandwidth=bandwidth, cosine=cosine)
                for t in self.basis_scales:
                    name = "cos" if cosine else "sin"
                    yield f"{name}{mode}*{t:g}", base * t
        rng = np.random.default_rng(self.seed)
        for i in range(random_count if random_count is not None else self.random_count):
            base = random_function(rng, bandwidth)
            for s in self.random_scales:
                yield f"rng{i}*{s:g}", base * s

    def probes_for(self, op, cfg, random_count=None):
        if op.space == SEQ:
            return self.seq_probes(op.domain_dim)
        bandwidth = (op.domain_dim - 1) // 2
        return self.fn_probes(bandwidth, random_count=random_count)


@dataclass(frozen=True)
class RBoundEstimate:
    """Bracket for a dilation bound: certified probe maximum plus, where
    the structure permits, an analytic ceiling."""

    radius: float
    probe_count: int
    witness: str
    lower_bound: float
    analytic_upper: float | None

    def __post_init__(self):
        if self.analytic_upper is not None and self.lower_bound > self.analytic_upper * (1 + 1e-9):
            raise CertificateViolation(
                f"probe ratio {self.lower_bound} exceeds analytic bound {self.analytic_upper}",
                witness=self.witness,
            )


def _batch_norms(rows, cfg):
    from .core import STANDARD, phi

    ladders = np.cumsum(np.abs(rows), axis=1)[:, : cfg.truncation]
    terms = cfg.level_weights * phi(ladders)
    if cfg.flavor == STANDARD:
        return np.sum(terms, axis=1)
    return np.max(terms, axis=1)


def rbound_estimate(op, cfg, radius=np.inf, plan=None, random_count=None):
    """Estimate the dilation bound of `op` over the punctured radius ball.

    The lower bound is the maximum metric ratio over the probe plan; the
    codomain metric drops as many levels as the operator's ladder shift.
    """
    if radius <= 0.0:
        raise DomainError("radius must be positive")
    plan = plan or ProbePlan()
    if op.space == SEQ and cfg.truncation != op.domain_dim:
        raise ShapeError("config truncation must match the operator domain")
    cod_cfg = cfg if op.ladder_shift == 0 else cfg.with_truncation(cfg.truncation - op.ladder_shift)
    if op.space == SEQ:
        labels, rows = plan.seq_probe_rows(op.domain_dim)
        norms = _batch_norms(rows, cfg)
        inside = (norms > 0.0) & (norms < radius)
        if not inside.any():
            raise EmptyEstimateError("no probe fell inside the ball")
        image_norms = _batch_norms(op._apply_rows(rows[inside]), cod_cfg)
        ratios = image_norms / norms[inside]
        best = int(np.argmax(ratios))
        inside_labels = [lab for lab, keep in zip(labels, inside) if keep]
        return RBoundEstimate(
            radius=float(radius),
            probe_count=int(inside.sum()),
            witness=inside_labels[best],
            lower_bound=float(ratios[best]),
            analytic_upper=op.analytic_rbound(cfg),
        )
    best = -np.inf
    witness = ""
    count = 0
    for label, v in plan.probes_for(op, cfg, random_count=random_count):
        nv = element_norm(v, cfg)
        if nv <= 0.0 or nv >= radius:
            continue
        count += 1
        ratio = element_norm(op.apply(v), cod_cfg) / nv
        if ratio > best:
            best = ratio
            witness = label
    if count == 0:
        raise EmptyEstimateError("no probe fell inside the ball")
    return RBoundEstimate(
        radius=float(radius),
        probe_count=count,
        witness=witness,
        lower_bound=float(best),
        analytic_upper=op.analytic_rbound(cfg),
    )


@dataclass(frozen=True)
class NeumannResult:
    """Truncated geometric-series inverse together with its certificates."""

    operator: LinearOperator
    rho: float
    terms: int
    residual_bound: float
    inverse_bound: float


def neumann_invert(op, cfg, radius=np.inf, tol=1e-10, max_terms=64, rho=None, plan=None):
    """Invert a near-identity operator by its geometric series.

    The series sum_{i<=m} (1 - A)^i is truncated at the first m whose
    a-priori tail bound rho^(m+1) / (1 - rho) falls below `tol`; the
    returned certificates carry that bound and the inverse bound
    1 / (1 - rho).  `rho` defaults to the probe estimate of <1 - A>.
    """
    if op.domain_dim != op.codomain_dim or op.ladder_shift != 0:
        raise ShapeError("series inversion needs an endomorphism")
    a = op.materialize()
    eye = np.eye(a.shape[0], dtype=a.dtype)
    gap = dense_operator(eye - a, space=op.space)
    if rho is None:
        rho = rbound_estimate(gap, cfg, radius=radius, plan=plan).lower_bound
    if rho >= 1.0:
        raise ContractionError(f"<1 - A> estimate {rho} is not below 1")
    if rho == 0.0:
        terms = 0
    else:
        terms = int(np.ceil(np.log(tol * (1.0 - rho)) / np.log(rho))) - 1
        terms = max(terms, 0)
    if terms > max_terms:
        raise ConvergenceError(
            f"need {terms} terms for tolerance {tol}, budget is {max_terms}",
            partial=_partial_sum(eye, eye - a, max_terms),
        )
    total = _partial_sum(eye, eye - a, terms)
    return NeumannResult(
        operator=dense_operator(total, space=op.space),
        rho=float(rho),
        terms=terms,
        residual_bound=float(rho ** (terms + 1) / (1.0 - rho)),
        inverse_bound=float(1.0 / (1.0 - rho)),
    )


def _partial_sum(eye, gap, terms):
    total = eye.copy()
    power = eye.copy()
    for _ in range(terms):
        power = power @ gap
        total = total + power
    return total


def neumann_partial_sums(op, terms):
    """Partial sums S_0..S_terms of the inversion series, as matrices."""
    a = op.materialize()
    eye = np.eye(a.shape[0], dtype=a.dtype)
    gap = eye - a
    sums = [eye.copy()]
    power = eye.copy()
    for _ in range(terms):
        power = power @ gap
        sums.append(sums[-1] + power)
    return sums


def perturbed_invert_bound(ainv_bound, gap):
    """Bounds on <B^-1> and <B^-1 - A^-1> when <A - B> <= gap.

    Returns (ainv / (1 - ainv*gap), ainv**2 * gap / (1 - ainv*gap)).
    """
    if ainv_bound < 0.0 or gap < 0.0:
        raise DomainError("bounds must be non-negative")
    product = ainv_bound * gap
    if product >= 1.0:
        raise ContractionError(f"<A^-1><A-B> = {product} is not below 1")
    denom = 1.0 - product
    return ainv_bound / denom, ainv_bound**2 * gap / denom


@dataclass(frozen=True)
class DistortionReport:
    upper: float
    lower: float
    total: float


def distortion(matrix, rank_tol=1e-12):
    """Upper/lower/total distortion of a linear map between inner-product
    spaces: largest singular value, reciprocal of the smallest, and their max."""
    mat = np.atleast_2d(np.asarray(matrix, dtype=float))
    sv = np.linalg.svd(mat, compute_uv=False)
    upper = float(sv[0]) if sv.size else 0.0
    full_rank = sv.size == mat.shape[1] and sv[-1] > rank_tol * max(sv[0], 1.0)
    lower = float(1.0 / sv[-1]) if full_rank else np.inf
    return DistortionReport(upper=upper, lower=lower, total=max(upper, lower))


def unboundedness_probe(apply_fn, witnesses, norm_fn, base=None, step=1e-3):
    """Dilation ratios along an indexed witness family.

    For linear maps the ratio is norm(f(w)) / norm(w); with a base point
    the difference quotient norm(f(base + step*w) - f(base)) / norm(step*w)
    is used instead.  Monotone growth across the family is the
    unboundedness signal; interpreting it is left to the caller.
    """
    ratios = []
    for w in witnesses:
        if base is None:
            denom = norm_fn(w)
            if denom == 0.0:
                raise DomainError("witnesses must be nonzero")
            ratios.append(norm_fn(apply_fn(w)) / denom)
        else:
            scaled = w * step
            denom = norm_fn(scaled)
            if denom == 0.0:
                raise DomainError("witnesses must be nonzero")
            ratios.append(norm_fn(apply_fn(base + scaled) - apply_fn(base)) / denom)
    return np.asarray(ratios)


def monotone_growth(values, window=None, slack=1e-12):
    """True when the values increase monotonically across the trailing window."""
    vals = np.asarray(values, dtype=float)
    if window is None:
        window = max(vals.size // 2, 2)
    tail = vals[-window:]
    if tail.size < 2:
        return False
    return bool(np.all(np.diff(tail) > slack * np.maximum(np.abs(tail[:-1]), 1.0)))


def plateau_bump(y, half_width=4.0):
    """Smooth compactly supported profile equal to 1 at the origin."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < half_width
    u = y[inside] / half_width
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u * u))
    return out


def oscillating_composition(rate, half_width=4.0):
    """Scalar map y -> bump(y) * sin(rate * y) used as a composition symbol."""

    def g(y):
        return plateau_bump(y, half_width) * np.sin(rate * np.asarray(y, dtype=float))

    return g


def composition_operator(scalar_fn, bandwidth, oversample=8):
    """Post-composition h -> P_B(g o h) on band-limited periodic functions.

    The pointwise composition leaves the band, so the result is projected
    back by a fine-grid FFT.
    """
    size = oversample * max(bandwidth, 1)

    def apply(h):
        _, values = h.grid(size)
        spectrum = np.fft.fft(scalar_fn(values)) / size
        coeffs = np.empty(2 * bandwidth + 1, dtype=complex)
        for k in range(-bandwidth, bandwidth + 1):
            coeffs[k + bandwidth] = spectrum[k % size]
        return PeriodicFunction(coeffs)

    return apply


def peak_function(bandwidth, center=0.0):
    """Fejer-kernel peak of unit height; sharper as the bandwidth grows."""
    k = np.arange(-bandwidth, bandwidth + 1)
    coeffs = (1.0 - np.abs(k) / (bandwidth + 1.0)).astype(complex)
    shifted = coeffs * np.exp(-1j * k * center)
    f = PeriodicFunction(shifted)
    return f * (1.0 / f.sup_norm())
