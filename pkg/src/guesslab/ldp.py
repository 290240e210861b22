"""Asymptotics of the guess rank: SCGF, rate function, finite-n exponents.

For memoryless pair sources the scaled cumulant generating function has
the closed form Lambda(alpha) = alpha * H_{1/(1+alpha)}(X|Y) for
alpha > -1 and plateaus at -H_inf(X|Y) for alpha <= -1.  Its Legendre
transform Lambda*(x) is linear (h_inf - x) on [0, gamma], where gamma
is the right-derivative limit at -1, and is computed by golden-section
maximization of the concave map alpha -> x*alpha - Lambda(alpha) on the
rest of [0, log|X|].  gamma is positive only when some y-column has
tied maximizers; it is estimated by extrapolated one-sided derivatives
rather than by differentiating the closed form symbolically.

ScgfCurve accepts a user-supplied evaluation callable, so the conjugation
machinery also serves plug-in SCGFs; their validity is the caller's burden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .entropy import conditional_min_entropy, conditional_renyi_arimoto, conditional_shannon
from .guesswork import DEFAULT_MAX_TYPE_TUPLES, GuessworkDistribution, guesswork_distribution
from .model import PairSource

__all__ = [
    "ALPHA_BRACKET",
    "GOLDEN_TOL",
    "DomainError",
    "ScgfCurve",
    "RateFunction",
    "scgf_limit",
    "scgf_derivative",
    "gamma",
    "rate_function",
    "legendre_numeric",
    "empirical_exponent",
    "ScgfRow",
    "ExponentRow",
    "ConvergenceReport",
    "convergence_report",
]

ALPHA_BRACKET = 64.0
GOLDEN_TOL = 1e-9
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class DomainError(ValueError):
    """Argument outside the operation's domain."""


def scgf_limit(source: PairSource, alpha: float) -> float:
    """Lambda(alpha) = lim n^-1 log E G^alpha in nats."""
    alpha = float(alpha)
    if alpha <= -1.0:
        return -conditional_min_entropy(source)
    if alpha == 0.0:
        return 0.0
    return alpha * conditional_renyi_arimoto(source, 1.0 / (1.0 + alpha))


@dataclass(frozen=True)
class ScgfCurve:
    """Lambda as an evaluation callable plus derivative queries."""

    evaluation: Callable[[float], float]
    log_x_size: float
    source: PairSource | None = None

    @classmethod
    def from_source(cls, source: PairSource) -> "ScgfCurve":
        return cls(
            evaluation=lambda a: scgf_limit(source, a),
            log_x_size=source.log_x_size,
            source=source,
        )

    def __call__(self, alpha: float) -> float:
        return self.evaluation(alpha)

    def derivative(self, alpha: float) -> float:
        alpha = float(alpha)
        if alpha <= -1.0:
            raise DomainError(f"derivative undefined at alpha <= -1, got {alpha}")
        return _central_derivative(self.evaluation, alpha)


def _central_derivative(fn: Callable[[float], float], alpha: float, h: float = 1e-6) -> float:
    # keep both evaluation points right of the alpha = -1 plateau edge
    h = min(h, (alpha + 1.0) / 4.0)
    d1 = (fn(alpha + h) - fn(alpha - h)) / (2.0 * h)
    d2 = (fn(alpha + h / 2.0) - fn(alpha - h / 2.0)) / h
    return (4.0 * d2 - d1) / 3.0


def scgf_derivative(source: PairSource, alpha: float) -> float:
    """Lambda'(alpha) for alpha > -1; Lambda'(0) = H(X|Y)."""
    return ScgfCurve.from_source(source).derivative(alpha)


def _neville_at_zero(xs: Sequence[float], ys: Sequence[float]) -> float:
    ps = list(ys)
    for level in range(1, len(xs)):
        for i in range(len(xs) - level):
            ps[i] = (xs[i + level] * ps[i] - xs[i] * ps[i + 1]) / (xs[i + level] - xs[i])
    return ps[0]


def gamma(source: PairSource, epsilons: Sequence[float] = (1e-2, 1e-3, 1e-4)) -> float:
    """gamma = lim_{alpha down to -1} Lambda'(alpha), extrapolated to eps = 0."""
    curve = ScgfCurve.from_source(source)
    slopes = [_central_derivative(curve.evaluation, -1.0 + e, h=e / 8.0) for e in epsilons]
    value = _neville_at_zero(list(epsilons), slopes)
    return min(max(value, 0.0), source.log_x_size)


def _golden_max(fn: Callable[[float], float], lo: float, hi: float, tol: float = GOLDEN_TOL) -> tuple[float, float]:
    """Maximize a concave fn on [lo, hi]; returns (argmax, max)."""
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1 = fn(x1)
    f2 = fn(x2)
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = fn(x2)
    arg = 0.5 * (lo + hi)
    return arg, fn(arg)


def legendre_numeric(curve: ScgfCurve, x: float) -> tuple[float, float]:
    """sup over alpha in [-1, ALPHA_BRACKET] of x*alpha - Lambda(alpha).

    Returns (value, argmax).  An argmax pinned at the right bracket end
    means x sits between the bracketed slope and the attainable slope
    limit; the value is then a slight underestimate of the conjugate.
    """
    arg, value = _golden_max(lambda a: x * a - curve(a), -1.0, ALPHA_BRACKET)
    return value, arg


@dataclass(frozen=True)
class RateFunction:
    """Lambda*(x) on [0, log|X|]: linear on [0, gamma], conjugated beyond.

    Guess ranks never exceed the product of the per-letter column support
    sizes, so growth rates above x_sup = log(max_y |support(y)|) have zero
    probability at every n and the rate is +inf there.  Below x_sup the
    bracketed conjugate is finite.
    """

    gamma: float
    h_inf: float
    log_x_size: float
    x_sup: float
    curve: ScgfCurve

    @classmethod
    def from_source(cls, source: PairSource) -> "RateFunction":
        max_support = int((source.joint > 0.0).sum(axis=0).max())
        return cls(
            gamma=gamma(source),
            h_inf=conditional_min_entropy(source),
            log_x_size=source.log_x_size,
            x_sup=math.log(max_support),
            curve=ScgfCurve.from_source(source),
        )

    def __call__(self, x: float) -> float:
        x = float(x)
        if x < 0.0:
            raise DomainError(f"rate function domain is x >= 0, got {x}")
        if x > self.log_x_size or x > self.x_sup + 1e-12:
            return math.inf
        if x <= self.gamma:
            return self.h_inf - x
        value, _ = legendre_numeric(self.curve, x)
        return value


def rate_function(source: PairSource, x: float) -> float:
    """Lambda*(x); +inf sentinel beyond log|X| or the attainable slope range."""
    return RateFunction.from_source(source)(x)


def empirical_exponent(
    source: PairSource,
    x: float,
    eps: float,
    n: int,
    max_type_tuples: int = DEFAULT_MAX_TYPE_TUPLES,
    dist: GuessworkDistribution | None = None,
) -> float:
    """-n^-1 log P(n^-1 log G in [x-eps, x+eps]); +inf for zero-mass events."""
    if x < 0.0:
        raise DomainError(f"x must be >= 0, got {x}")
    if eps <= 0.0:
        raise DomainError(f"eps must be > 0, got {eps}")
    if dist is None:
        dist = guesswork_distribution(source, n, max_type_tuples)
    log_p = dist.log_prob_log_window(x - eps, x + eps)
    if log_p == -math.inf:
        return math.inf
    return -log_p / n


@dataclass(frozen=True)
class ScgfRow:
    n: int
    alpha: float
    empirical: float
    limit: float
    gap: float
    envelope: float | None


@dataclass(frozen=True)
class ExponentRow:
    n: int
    x: float
    eps: float
    empirical: float
    limit: float
    gap: float


@dataclass(frozen=True)
class ConvergenceReport:
    scgf_rows: tuple[ScgfRow, ...]
    exponent_rows: tuple[ExponentRow, ...]


def convergence_report(
    source: PairSource,
    alphas: Sequence[float],
    x_grid: Sequence[float],
    n_max: int,
    eps: float = 0.05,
    max_type_tuples: int = DEFAULT_MAX_TYPE_TUPLES,
) -> ConvergenceReport:
    """Finite-n quantities next to their limits, with the provable
    gap envelope -alpha*log(1 + n log|X|)/n for alpha in (-1, 0)."""
    rate = RateFunction.from_source(source)
    log_x = source.log_x_size
    scgf_rows = []
    exponent_rows = []
    for n in range(1, n_max + 1):
        dist = guesswork_distribution(source, n, max_type_tuples)
        for alpha in alphas:
            empirical = dist.scgf_empirical(alpha)
            limit = scgf_limit(source, alpha)
            envelope = None
            if -1.0 < alpha < 0.0:
                envelope = -alpha * math.log1p(n * log_x) / n
            scgf_rows.append(ScgfRow(n, alpha, empirical, limit, empirical - limit, envelope))
        for x in x_grid:
            empirical = empirical_exponent(source, x, eps, n, dist=dist)
            limit = rate(x)
            gap = empirical - limit if math.isfinite(empirical) and math.isfinite(limit) else math.nan
            exponent_rows.append(ExponentRow(n, x, eps, empirical, limit, gap))
    return ConvergenceReport(tuple(scgf_rows), tuple(exponent_rows))
