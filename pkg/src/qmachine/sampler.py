"""Monte Carlo engine for the elastic-break measurement process.

Randomness contract
-------------------
All sampling goes through :class:`RandomStream`, a thin wrapper around
numpy's counter-based Philox generator keyed by ``(seed, spawn_key)`` via
``SeedSequence``.  ``substream(i)`` appends ``i`` to the spawn key, which
yields statistically independent child streams that are reproducible across
platforms, numpy releases with the same bit generator, and worker counts.

Bulk runs partition trials into fixed-size blocks; block ``j`` draws from
``substream(j)`` only.  Results are therefore bit-identical no matter how
many workers execute the blocks, and aggregation is a plain sum of counts,
which commutes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import Direction, ElasticSpec, Outcome, SphereState, axis_coordinate

BLOCK_SIZE = 1 << 16


class RandomStream:
    """Deterministic pseudo-random source, splittable into substreams.

    Identified by a non-negative integer seed plus a tuple spawn key; the
    same (seed, key) always reproduces the same draw sequence.  A stream is
    not safe to share between concurrent tasks, but distinct substreams are.
    """

    __slots__ = ("seed", "spawn_key", "_gen")

    def __init__(self, seed: int, spawn_key: tuple[int, ...] = ()):
        seed = int(seed)
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = seed
        self.spawn_key = tuple(int(k) for k in spawn_key)
        seq = np.random.SeedSequence(seed, spawn_key=self.spawn_key)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def substream(self, index: int) -> "RandomStream":
        """Independent child stream number ``index``."""
        return RandomStream(self.seed, self.spawn_key + (int(index),))

    def random(self, size=None):
        """Uniform doubles on [0, 1)."""
        return self._gen.random(size)

    def uniform(self, low: float, high: float, size=None):
        """Uniform doubles on [low, high)."""
        return self._gen.uniform(low, high, size)

    def coin(self) -> bool:
        """Single fair coin flip."""
        return bool(self._gen.random() < 0.5)


@dataclass(frozen=True)
class TrialRecord:
    """One measurement trial: where the band snapped and what happened."""

    index: int
    break_point: float
    outcome: Outcome
    post_state: SphereState


@dataclass(frozen=True)
class FrequencyTable:
    """Aggregated outcome counts of a trial batch."""

    n_o1: int
    n_o2: int

    def __post_init__(self):
        if self.n_o1 < 0 or self.n_o2 < 0:
            raise ValueError("counts must be non-negative")
        if self.total < 1:
            raise ValueError("table must hold at least one trial")

    @property
    def total(self) -> int:
        return self.n_o1 + self.n_o2

    @property
    def counts(self) -> dict[Outcome, int]:
        return {Outcome.O1: self.n_o1, Outcome.O2: self.n_o2}

    def frequency(self, outcome: Outcome) -> float:
        return (self.n_o1 if outcome is Outcome.O1 else self.n_o2) / self.total

    def __add__(self, other: "FrequencyTable") -> "FrequencyTable":
        return FrequencyTable(self.n_o1 + other.n_o1, self.n_o2 + other.n_o2)


def sample_break_point(elastic: ElasticSpec, rng: RandomStream) -> float:
    """Draw the snap point, uniform on the breakable segment.

    For epsilon = 0 the segment is the single point d and no randomness is
    consumed.
    """
    if elastic.epsilon == 0.0:
        return elastic.d
    return float(rng.uniform(elastic.break_lower, elastic.break_upper))


def outcome_at_axis(t: float, break_point: float, rng: RandomStream) -> Outcome:
    """Deterministic outcome rule: the particle at coordinate ``t`` goes up
    exactly when the band snaps strictly below it.

    The zero-probability coincidence ``break_point == t`` resolves by a fair
    coin so that runs remain reproducible.
    """
    if break_point < t:
        return Outcome.O1
    if break_point > t:
        return Outcome.O2
    return Outcome.O1 if rng.coin() else Outcome.O2


def hidden_outcome(
    v: Direction, u: Direction, break_point: float, rng: RandomStream
) -> tuple[Outcome, SphereState]:
    """Outcome and post-measurement state once the snap point is fixed.

    Given the break point the process is fully deterministic (up to the
    measure-zero tie): a snap below the particle drags it to u, a snap above
    drags it to -u.
    """
    if not -1.0 <= break_point <= 1.0:
        raise ValueError(f"break point must be in [-1, 1], got {break_point!r}")
    t = axis_coordinate(v, u)
    outcome = outcome_at_axis(t, break_point, rng)
    post = SphereState(u) if outcome is Outcome.O1 else SphereState(-u)
    return outcome, post


def measure(
    v: Direction, u: Direction, elastic: ElasticSpec, rng: RandomStream
) -> tuple[Outcome, SphereState, float]:
    """One full measurement: draw a snap point, resolve the outcome.

    A fresh elastic is used every call; nothing carries over between
    measurements.  Returns ``(outcome, post_state, break_point)``.
    """
    break_point = sample_break_point(elastic, rng)
    outcome, post = hidden_outcome(v, u, break_point, rng)
    return outcome, post, break_point


def _block_lengths(n: int, block_size: int) -> list[int]:
    full, rem = divmod(n, block_size)
    return [block_size] * full + ([rem] if rem else [])


def _sample_block(
    root: RandomStream, block_index: int, m: int, t: float, elastic: ElasticSpec
):
    """Vectorized draws for one block: snap points, outcome flags, tie coins.

    Draw order within the block stream is fixed (snap points, then coins for
    however many exact ties occurred), so the result depends only on
    (seed, spawn_key, block_index, m).
    """
    rs = root.substream(block_index)
    if elastic.epsilon == 0.0:
        lam = np.full(m, elastic.d)
    else:
        lam = rs.uniform(elastic.break_lower, elastic.break_upper, m)
    is_o1 = lam < t
    ties = np.flatnonzero(lam == t)
    if ties.size:
        is_o1 = is_o1.copy()
        is_o1[ties] = rs.random(ties.size) < 0.5
    return lam, is_o1


def run_trials(
    v: Direction,
    u: Direction,
    elastic: ElasticSpec,
    n: int,
    seed,
    workers: int = 1,
    block_size: int = BLOCK_SIZE,
) -> FrequencyTable:
    """Aggregate ``n`` measurements of state v along axis u.

    ``seed`` may be an integer or a :class:`RandomStream`.  The outcome
    counts are identical for any ``workers`` value.
    """
    if n < 1:
        raise ValueError(f"need at least one trial, got {n}")
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")
    root = seed if isinstance(seed, RandomStream) else RandomStream(seed)
    t = axis_coordinate(v, u)

    def count_block(args) -> int:
        j, m = args
        _, is_o1 = _sample_block(root, j, m, t, elastic)
        return int(np.count_nonzero(is_o1))

    blocks = list(enumerate(_block_lengths(n, block_size)))
    if workers == 1:
        n1 = sum(map(count_block, blocks))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            n1 = sum(pool.map(count_block, blocks))
    return FrequencyTable(n1, n - n1)


def run_recorded(
    v: Direction,
    u: Direction,
    elastic: ElasticSpec,
    n: int,
    seed,
    block_size: int = BLOCK_SIZE,
) -> list[TrialRecord]:
    """Like :func:`run_trials` but keeping every trial.

    Uses the same block/substream scheme, so counts agree with
    :func:`run_trials` for the same seed.  Memory grows with ``n``; prefer
    :func:`run_trials` for large batches.
    """
    if n < 1:
        raise ValueError(f"need at least one trial, got {n}")
    root = seed if isinstance(seed, RandomStream) else RandomStream(seed)
    t = axis_coordinate(v, u)
    post_up, post_down = SphereState(u), SphereState(-u)
    records: list[TrialRecord] = []
    for j, m in enumerate(_block_lengths(n, block_size)):
        lam, is_o1 = _sample_block(root, j, m, t, elastic)
        base = j * block_size
        for k in range(m):
            if is_o1[k]:
                records.append(TrialRecord(base + k, float(lam[k]), Outcome.O1, post_up))
            else:
                records.append(TrialRecord(base + k, float(lam[k]), Outcome.O2, post_down))
    return records
