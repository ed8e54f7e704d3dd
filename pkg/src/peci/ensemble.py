"""Parallel ensembles of IGCI base learners (PECI and its weighted variant).

Every task ``t`` draws its own ``k``-subsample from a random stream keyed on
``(seed, t)``, so a task's result does not depend on which worker runs it or
when.  Votes are written at their task index and summed in index order,
which makes the aggregate bit-identical for any worker count.
"""

from __future__ import annotations

import enum
import logging
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import Direction, IgciScore, SamplePairs, igci_deltas, igci_score
from .errors import AllTasksDegenerate, ConstantInput, DegenerateData, InvalidSubsampleSize

__all__ = [
    "WeightingScheme",
    "EnsembleConfig",
    "EnsembleDecision",
    "TaskStream",
    "derive_seed",
    "subset_indices",
    "subsample",
    "vote",
    "votes_from_deltas",
    "ensemble_deltas",
    "run_ensemble",
    "decide",
    "default_k_schedule",
    "prefix_replay",
    "flip_count",
    "TooManyTasksWarning",
]

logger = logging.getLogger(__name__)

BaseLearner = Callable[[SamplePairs], IgciScore]


class TooManyTasksWarning(UserWarning):
    """T reaches the number of distinct subsamples, so extra tasks add no diversity."""


class WeightingScheme(enum.Enum):
    MAJORITY = "majority"
    SIGMOID = "sigmoid"
    TANH = "tanh"


@dataclass(frozen=True)
class EnsembleConfig:
    k: int
    T: int
    weighting: WeightingScheme = WeightingScheme.MAJORITY
    seed: int = 0

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if isinstance(self.weighting, str):
            object.__setattr__(self, "weighting", WeightingScheme(self.weighting))

    def check(self, m: int) -> None:
        if not 3 <= self.k < m:
            raise InvalidSubsampleSize(f"k={self.k} must satisfy 3 <= k < m={m}")
        # The log-gamma estimate only screens; near the boundary compare exactly.
        if _log_comb(m, self.k) <= math.log(self.T) + 1e-6 and math.comb(m, self.k) <= self.T:
            warnings.warn(
                f"T={self.T} >= C({m},{self.k}); additional tasks repeat subsets",
                TooManyTasksWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class EnsembleDecision:
    votes: np.ndarray
    vote_sum: float
    direction: Direction
    undecided_tasks: int
    degenerate_tasks: int = 0
    deltas: np.ndarray | None = field(default=None, repr=False)

    @property
    def T(self) -> int:
        return self.votes.size


def _log_comb(n: int, r: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic 64-bit child seed of ``seed`` along the path ``key``."""
    z = _mix64(seed + _GOLDEN)
    for part in key:
        z = _mix64(z ^ _mix64((part + 1) * _GOLDEN))
    return z


@dataclass(frozen=True)
class TaskStream:
    """Counter-based random stream of task ``task`` in an ensemble seeded with ``seed``.

    ``keys(n)`` is the SplitMix64 sequence started from ``derive_seed(seed, task)``,
    so any element can be produced without generating the ones before it.
    """

    seed: int
    task: int

    def keys(self, n: int) -> np.ndarray:
        return _stream_keys(np.array([derive_seed(self.seed, self.task)], dtype=np.uint64), n)[0]

    def subset(self, m: int, k: int) -> np.ndarray:
        """Sorted indices of a uniformly random ``k``-subset of ``range(m)``."""
        return _smallest_k(self.keys(m)[None, :], k)[0]


def _stream_keys(starts: np.ndarray, n: int) -> np.ndarray:
    steps = (np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_GOLDEN))[None, :]
    return _mix64_array(starts[:, None] + steps)


def _smallest_k(keys: np.ndarray, k: int) -> np.ndarray:
    # Ranking i.i.d. uniform keys gives a uniform permutation; its first k
    # positions are a uniform k-subset.  Sorting the chosen indices makes the
    # subsample independent of argpartition's internal order.
    if k < keys.shape[1]:
        idx = np.argpartition(keys, k - 1, axis=1)[:, :k]
    else:
        idx = np.broadcast_to(np.arange(keys.shape[1]), keys.shape)
    return np.sort(idx, axis=1)


def subset_indices(seed: int, tasks: range, m: int, k: int) -> np.ndarray:
    """Row ``j`` holds the subsample indices of task ``tasks[j]``."""
    starts = np.array([derive_seed(seed, t) for t in tasks], dtype=np.uint64)
    return _smallest_k(_stream_keys(starts, m), k)


def subsample(pairs: SamplePairs, k: int, stream: TaskStream) -> SamplePairs:
    """``k`` pairs drawn uniformly without replacement, pairing preserved."""
    m = len(pairs)
    if not 3 <= k < m:
        raise InvalidSubsampleSize(f"k={k} must satisfy 3 <= k < m={m}")
    return pairs.take(stream.subset(m, k))


def vote(score: IgciScore, weighting: WeightingScheme) -> float:
    """Map a base score to a vote; positive supports ``x -> y``."""
    return float(votes_from_deltas(np.array([score.delta]), weighting)[0])


def votes_from_deltas(deltas: np.ndarray, weighting: WeightingScheme) -> np.ndarray:
    """Vectorized :func:`vote` on ``delta = e_y - e_x``; NaN (degenerate) maps to 0."""
    d = np.asarray(deltas, dtype=np.float64)
    d = np.where(np.isnan(d), 0.0, d)
    weighting = WeightingScheme(weighting)
    if weighting is WeightingScheme.MAJORITY:
        return np.sign(d)
    if weighting is WeightingScheme.TANH:
        return np.tanh(d)
    # (1 - e^-d) / (1 + e^-d), evaluated on |d| so e^-|d| never overflows.
    a = np.exp(-np.abs(d))
    return np.sign(d) * (1.0 - a) / (1.0 + a)


def normalized_igci(pairs: SamplePairs) -> IgciScore:
    """IGCI on ``pairs`` after rescaling both columns to [0, 1].

    This is the default base learner: a subsample of normalized data no longer
    spans [0, 1], and the score difference is not scale invariant.
    """
    return igci_score(pairs.normalized())


# Tasks scored per vectorized block; bounds memory at BLOCK * m keys.
BLOCK = 128


def _task_deltas(x, y, k: int, seed: int, tasks: range, base: BaseLearner | None) -> np.ndarray:
    m = x.size
    out = np.empty(len(tasks))
    for lo in range(0, len(tasks), BLOCK):
        block = tasks[lo : lo + BLOCK]
        idx = subset_indices(seed, block, m, k)
        if base is None:
            out[lo : lo + len(block)] = igci_deltas(x[idx], y[idx])
            continue
        for j, row in enumerate(idx):
            try:
                out[lo + j] = base(SamplePairs(x[row], y[row])).delta
            except (DegenerateData, ConstantInput):
                out[lo + j] = np.nan
    return out


def default_workers() -> int:
    env = os.environ.get("PECI_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def _chunks(T: int, n: int) -> list[range]:
    bounds = np.linspace(0, T, n + 1).round().astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def ensemble_deltas(
    pairs: SamplePairs,
    k: int,
    T: int,
    seed: int,
    workers: int = 1,
    base: BaseLearner = normalized_igci,
    first_task: int = 0,
) -> np.ndarray:
    """Score differences ``e_y - e_x`` of tasks ``first_task .. first_task + T - 1``.

    Degenerate subsamples give NaN.  The array is identical for any ``workers``.
    """
    m = len(pairs)
    if not 3 <= k < m:
        raise InvalidSubsampleSize(f"k={k} must satisfy 3 <= k < m={m}")
    # The default learner goes through the row-batched kernel (same values).
    fn = None if base is normalized_igci else base
    tasks = range(first_task, first_task + T)
    if workers <= 1 or T < 2:
        return _task_deltas(pairs.x, pairs.y, k, seed, tasks, fn)

    from joblib import Parallel, delayed

    n_chunks = min(T, workers * 4)
    parts = [tasks[r.start : r.stop] for r in _chunks(T, n_chunks)]
    results = Parallel(n_jobs=workers, backend="loky")(
        delayed(_task_deltas)(pairs.x, pairs.y, k, seed, part, fn) for part in parts
    )
    return np.concatenate(results)


def decide(deltas: np.ndarray, weighting: WeightingScheme) -> EnsembleDecision:
    """Aggregate per-task score differences into a decision."""
    deltas = np.asarray(deltas, dtype=np.float64)
    votes = votes_from_deltas(deltas, weighting)
    total = 0.0
    for v in votes.tolist():
        total += v
    degenerate = int(np.isnan(deltas).sum())
    undecided = int((votes == 0).sum())
    return EnsembleDecision(
        votes=votes,
        vote_sum=total,
        direction=Direction.from_sign(total),
        undecided_tasks=undecided,
        degenerate_tasks=degenerate,
        deltas=deltas,
    )


def run_ensemble(
    pairs: SamplePairs,
    config: EnsembleConfig,
    workers: int = 1,
    base: BaseLearner = normalized_igci,
) -> EnsembleDecision:
    """Run PECI (majority) or WPECI (sigmoid / tanh weights) on normalized pairs."""
    config.check(len(pairs))
    deltas = ensemble_deltas(pairs, config.k, config.T, config.seed, workers=workers, base=base)
    result = decide(deltas, config.weighting)
    if result.degenerate_tasks == config.T:
        raise AllTasksDegenerate(f"all {config.T} subsamples were degenerate")
    return result


def default_k_schedule(m: int) -> int:
    """Subsample size as a function of the data length."""
    if m < 4:
        raise ValueError(f"m must be >= 4, got {m}")
    if m <= 500:
        return 3 * m // 4
    if m <= 1000:
        return m // 2
    if m <= 2000:
        return m // 4
    if m <= 10000:
        return m // 8
    return m // 10


def _base_direction(pairs: SamplePairs, base: BaseLearner) -> Direction:
    try:
        return base(pairs).decision
    except (DegenerateData, ConstantInput):
        return Direction.UNDECIDED


def prefix_replay(
    pairs: SamplePairs,
    start: int,
    config: EnsembleConfig | None = None,
    workers: int = 1,
    base: BaseLearner = normalized_igci,
    normalize: bool = True,
) -> list[Direction]:
    """Decisions on the growing prefixes ``pairs[:L]``, ``L = start..m``.

    ``config=None`` replays the base learner alone.  Each ensemble prefix uses
    ``k = min(config.k, L - 1)`` and a seed derived from ``(config.seed, L)``.
    Prefixes that cannot be scored (flat columns, degenerate slopes, all tasks
    degenerate) are reported as UNDECIDED.
    """
    m = len(pairs)
    if not 3 <= start <= m:
        raise ValueError(f"start={start} must satisfy 3 <= start <= m={m}")
    out = []
    for L in range(start, m + 1):
        prefix = pairs.prefix(L)
        try:
            if normalize:
                prefix = prefix.normalized()
        except ValueError:
            out.append(Direction.UNDECIDED)
            continue
        if config is None:
            out.append(_base_direction(prefix, base))
            continue
        k = min(config.k, L - 1)
        if k < 3:
            out.append(_base_direction(prefix, base))
            continue
        deltas = ensemble_deltas(prefix, k, config.T, derive_seed(config.seed, L), workers=workers, base=base)
        if np.isnan(deltas).all():
            out.append(Direction.UNDECIDED)
        else:
            out.append(decide(deltas, config.weighting).direction)
    return out


def flip_count(decisions: Sequence[Direction]) -> int:
    """Number of consecutive positions whose decision differs."""
    return sum(a is not b for a, b in zip(decisions[:-1], decisions[1:]))
