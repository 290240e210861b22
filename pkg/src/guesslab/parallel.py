"""Parallel k-of-m conditional guesswork: exact order statistics and asymptotics.

G_{k,m} is the k-th smallest of m independent users' guess ranks.  Its
exact finite-n law is built from the users' rank laws: each user's law
flattens to per-rank probabilities (piecewise constant between the
union of all users' block boundaries), and P(k-min > t) is evaluated
rank by rank with a Poisson-binomial recursion over users, entirely in
exact dyadic arithmetic.  The survival differences telescope, so the
resulting pmf is exactly nonnegative.

The asymptotic layer evaluates the rate function
I_{k,m}(x) = max over index assignments of
Lambda*_{i1}(x) + sum_{l<=k} delta_{i_l}(x) + sum_{l>k} gamma_{i_l}(x),
with delta/gamma the below/above-Shannon clamps of each user's rate
function, and conjugates it numerically for the parallel SCGF.  The max
ranges over permutations of the users by default; an unconstrained
tuple mode is provided for comparison because the constraint is a
modeling choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations

import numpy as np

from .dyadic import DYADIC_ONE, DYADIC_ZERO, Dyadic
from .entropy import conditional_shannon
from .guesswork import (
    DEFAULT_MAX_TYPE_TUPLES,
    GuessworkDistribution,
    TypeBlock,
    YTypeLaw,
    guesswork_distribution,
)
from .ldp import DomainError, RateFunction, _golden_max, scgf_limit
from .model import PairSource

__all__ = [
    "DEFAULT_MAX_RANKS",
    "MAX_KMIN_USERS",
    "MAX_PERM_USERS",
    "SCGF_GRID_STEP",
    "EnsembleError",
    "UserEnsemble",
    "kmin_distribution",
    "kmin_moment_exact",
    "rate_parallel",
    "rate_parallel_iid",
    "scgf_parallel",
    "scgf_parallel_iid",
]

DEFAULT_MAX_RANKS = 1 << 20
MAX_KMIN_USERS = 12
MAX_PERM_USERS = 8
SCGF_GRID_STEP = 1e-4


class EnsembleError(ValueError):
    """Invalid ensemble shape or an operation beyond its size limits."""


@dataclass(frozen=True)
class UserEnsemble:
    """m independent pair sources queried round-robin until k ranks resolve."""

    users: tuple[PairSource, ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        if len(self.users) < 1:
            raise EnsembleError("ensemble needs at least one user")
        if not 1 <= self.k <= len(self.users):
            raise EnsembleError(f"k must satisfy 1 <= k <= {len(self.users)}, got {self.k}")
        sizes = {u.x_alphabet.size for u in self.users}
        if len(sizes) != 1:
            raise EnsembleError(f"users must share the x-alphabet size, got {sorted(sizes)}")

    @property
    def m(self) -> int:
        return len(self.users)

    @property
    def x_size(self) -> int:
        return self.users[0].x_alphabet.size

    @property
    def log_x_size(self) -> float:
        return self.users[0].log_x_size

    @cached_property
    def rate_functions(self) -> tuple[RateFunction, ...]:
        return tuple(RateFunction.from_source(u) for u in self.users)

    @cached_property
    def shannon_values(self) -> tuple[float, ...]:
        return tuple(conditional_shannon(u) for u in self.users)

    @cached_property
    def _xgrid(self) -> np.ndarray:
        points = int(round(1.0 / SCGF_GRID_STEP)) + 1
        return np.linspace(0.0, self.log_x_size, points)

    @cached_property
    def _user_rate_grid(self) -> np.ndarray:
        grid = np.empty((self.m, self._xgrid.size))
        for i, rf in enumerate(self.rate_functions):
            grid[i] = [rf(x) for x in self._xgrid]
        return grid


def _flat_segments(dist: GuessworkDistribution) -> list[tuple[int, int, Dyadic]]:
    """Per-rank pmf of an unconditional rank law as (start, end, prob) runs."""
    intervals = []
    for law in dist.laws:
        weight = Dyadic.from_int(law.y_sequences)
        for block in law.blocks:
            if block.joint_level.is_zero():
                continue
            intervals.append(
                (block.start, block.start + block.count - 1, weight * block.joint_level)
            )
    events: dict[int, list[Dyadic]] = {}
    removals: dict[int, list[Dyadic]] = {}
    for start, end, q in intervals:
        events.setdefault(start, []).append(q)
        removals.setdefault(end + 1, []).append(q)
    boundaries = sorted(set(events) | set(removals) | {1, dist.total_sequences + 1})
    segments = []
    active = DYADIC_ZERO
    for b, b_next in zip(boundaries, boundaries[1:]):
        for q in events.get(b, ()):
            active = active + q
        for q in removals.get(b, ()):
            active = active - q
        segments.append((b, b_next - 1, active))
    return segments


def _per_rank_probs(segments: list[tuple[int, int, Dyadic]], total: int) -> list[Dyadic]:
    probs = [DYADIC_ZERO] * total
    for start, end, q in segments:
        for r in range(start, end + 1):
            probs[r - 1] = q
    return probs


def kmin_distribution(
    ensemble: UserEnsemble,
    n: int,
    max_type_tuples: int = DEFAULT_MAX_TYPE_TUPLES,
    max_ranks: int = DEFAULT_MAX_RANKS,
) -> GuessworkDistribution:
    """Exact law of the k-th smallest of the m independent guess ranks."""
    if ensemble.m == 1:
        # degenerate k-min: the single-user law itself, bit for bit
        return guesswork_distribution(ensemble.users[0], n, max_type_tuples)
    if ensemble.m > MAX_KMIN_USERS:
        raise EnsembleError(f"k-min enumeration supports m <= {MAX_KMIN_USERS}, got {ensemble.m}")
    total = ensemble.x_size**n
    if total > max_ranks:
        raise EnsembleError(f"rank span {total} exceeds max_ranks {max_ranks}")

    user_segments = [
        _flat_segments(guesswork_distribution(u, n, max_type_tuples))
        for u in ensemble.users
    ]
    per_user = [_per_rank_probs(segs, total) for segs in user_segments]
    totals = []
    for segs in user_segments:
        acc = DYADIC_ZERO
        for start, end, q in segs:
            acc = acc + Dyadic.from_int(end - start + 1) * q
        totals.append(acc)

    m, k = ensemble.m, ensemble.k
    done = [DYADIC_ZERO] * m      # F_i(t) = P(G_i <= t)
    pending = list(totals)        # T_i(t) = P(G_i > t)
    survival_prev = _poisson_binomial_below(done, pending, k)
    pmf: list[Dyadic] = []
    for t in range(1, total + 1):
        for i in range(m):
            p = per_user[i][t - 1]
            if not p.is_zero():
                done[i] = done[i] + p
                pending[i] = pending[i] - p
        survival = _poisson_binomial_below(done, pending, k)
        pmf.append(survival_prev - survival)
        survival_prev = survival

    blocks = []
    start = 1
    run_level = pmf[0]
    run_count = 1
    for level in pmf[1:]:
        if level == run_level:
            run_count += 1
        else:
            blocks.append(TypeBlock(start, run_count, run_level))
            start += run_count
            run_level = level
            run_count = 1
    blocks.append(TypeBlock(start, run_count, run_level))
    law = YTypeLaw(y_counts=(), y_sequences=1, py_product=DYADIC_ONE, blocks=tuple(blocks))
    return GuessworkDistribution(
        n=n, x_size=ensemble.x_size, y_symbols=(), laws=(law,), monotone=False
    )


def _poisson_binomial_below(done: list[Dyadic], pending: list[Dyadic], k: int) -> Dyadic:
    """P(fewer than k users have finished), users independent."""
    coef = [DYADIC_ONE] + [DYADIC_ZERO] * (k - 1)
    for f, t in zip(done, pending):
        nxt = [DYADIC_ZERO] * k
        for j in range(k):
            term = coef[j] * t
            if j > 0:
                term = term + coef[j - 1] * f
            nxt[j] = term
        coef = nxt
    out = DYADIC_ZERO
    for c in coef:
        out = out + c
    return out


def kmin_moment_exact(
    ensemble: UserEnsemble,
    n: int,
    alpha: float,
    max_type_tuples: int = DEFAULT_MAX_TYPE_TUPLES,
    max_ranks: int = DEFAULT_MAX_RANKS,
    dist: GuessworkDistribution | None = None,
) -> float:
    """E G_{k,m}^alpha over the exact k-min law."""
    if dist is None:
        dist = kmin_distribution(ensemble, n, max_type_tuples, max_ranks)
    return dist.moment(alpha)


def _clamped_terms(ensemble: UserEnsemble, x: float) -> tuple[list[float], list[float], list[float]]:
    rates = [rf(x) for rf in ensemble.rate_functions]
    shannon = ensemble.shannon_values
    delta = [r if x <= h else 0.0 for r, h in zip(rates, shannon)]
    gam = [r if x >= h else 0.0 for r, h in zip(rates, shannon)]
    return rates, delta, gam


def rate_parallel(ensemble: UserEnsemble, x: float, mode: str = "permutations") -> float:
    """I_{k,m}(x): worst index assignment of leader plus clamped followers."""
    if x < 0.0:
        raise DomainError(f"rate function domain is x >= 0, got {x}")
    if mode not in ("permutations", "tuples"):
        raise EnsembleError(f"unknown assignment mode {mode!r}")
    rates, delta, gam = _clamped_terms(ensemble, x)
    m, k = ensemble.m, ensemble.k
    if mode == "tuples":
        return max(rates) + (k - 1) * max(delta, default=0.0) + (m - k) * max(gam, default=0.0)
    if m > MAX_PERM_USERS:
        raise EnsembleError(f"permutation mode supports m <= {MAX_PERM_USERS}, got {m}")
    best = -math.inf
    for perm in permutations(range(m)):
        value = rates[perm[0]]
        for l in range(1, k):
            value += delta[perm[l]]
        for l in range(k, m):
            value += gam[perm[l]]
        best = max(best, value)
    return best


def rate_parallel_iid(source: PairSource, k: int, m: int, x: float) -> float:
    """I(k,m,x) = k Lambda*(x) below H(X|Y), (m-k+1) Lambda*(x) above."""
    if not 1 <= k <= m:
        raise EnsembleError(f"k must satisfy 1 <= k <= {m}, got {k}")
    if x < 0.0:
        raise DomainError(f"rate function domain is x >= 0, got {x}")
    rate = RateFunction.from_source(source)(x)
    if x <= conditional_shannon(source):
        return k * rate
    return (m - k + 1) * rate


def _i_grid(ensemble: UserEnsemble, mode: str) -> np.ndarray:
    xs = ensemble._xgrid
    rates = ensemble._user_rate_grid
    shannon = np.array(ensemble.shannon_values)
    m, k = ensemble.m, ensemble.k
    delta = np.where(xs[np.newaxis, :] <= shannon[:, np.newaxis], rates, 0.0)
    gam = np.where(xs[np.newaxis, :] >= shannon[:, np.newaxis], rates, 0.0)
    if mode == "tuples":
        return rates.max(axis=0) + (k - 1) * delta.max(axis=0) + (m - k) * gam.max(axis=0)
    best = np.full(xs.size, -np.inf)
    for perm in permutations(range(m)):
        value = rates[perm[0]].copy()
        for l in range(1, k):
            value = value + delta[perm[l]]
        for l in range(k, m):
            value = value + gam[perm[l]]
        np.maximum(best, value, out=best)
    return best


def scgf_parallel(ensemble: UserEnsemble, alpha: float, mode: str = "permutations") -> float:
    """Lambda_{k,m}(alpha) = sup over x in [0, log|X|] of alpha*x - I_{k,m}(x).

    Dense-grid sup refined by golden-section inside the winning cell;
    +inf values of I are excluded by the arithmetic itself.
    """
    if mode not in ("permutations", "tuples"):
        raise EnsembleError(f"unknown assignment mode {mode!r}")
    if mode == "permutations" and ensemble.m > MAX_PERM_USERS:
        raise EnsembleError(f"permutation mode supports m <= {MAX_PERM_USERS}, got {ensemble.m}")
    xs = ensemble._xgrid
    grid = alpha * xs - _i_grid(ensemble, mode)
    best_idx = int(np.argmax(grid))
    best = float(grid[best_idx])
    lo = xs[max(0, best_idx - 1)]
    hi = xs[min(xs.size - 1, best_idx + 1)]
    _, refined = _golden_max(lambda x: alpha * x - rate_parallel(ensemble, x, mode), lo, hi)
    return max(best, refined)


def scgf_parallel_iid(source: PairSource, k: int, m: int, alpha: float) -> float:
    """k Lambda(alpha/k) for alpha <= 0, (m-k+1) Lambda(alpha/(m-k+1)) for alpha > 0."""
    if not 1 <= k <= m:
        raise EnsembleError(f"k must satisfy 1 <= k <= {m}, got {k}")
    alpha = float(alpha)
    if alpha <= 0.0:
        return k * scgf_limit(source, alpha / k)
    spread = m - k + 1
    return spread * scgf_limit(source, alpha / spread)
