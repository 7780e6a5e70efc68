"""Stochastic gradient directions with per-agent seeded streams.

Three modes: a single sampled gradient, a mini-batch average, or the
mini-batch average premultiplied by a fixed positive-definite scaling.
Every agent draws from its own stream, derived from (master seed, agent id)
through numpy's SeedSequence spawn keys, so results do not depend on the
order in which agents are evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import AgentObjective, Problem

WITH_REPLACEMENT = "with-replacement"
WITHOUT_REPLACEMENT = "without-replacement"

# Indices are pre-drawn in blocks to amortize generator overhead; the block
# size is a fixed constant, so the draw sequence is a pure function of the
# seed.
_BLOCK = 1024


@dataclass(frozen=True)
class OracleConfig:
    mode: str = "single"  # single | minibatch | scaled
    batch: int = 1
    sampling: str = WITH_REPLACEMENT
    seed: int = 0
    scaling: np.ndarray | None = None  # SPD matrix or positive diagonal (scaled mode)


def validate_config(cfg: OracleConfig, problem: Problem) -> None:
    """Reject impossible configurations before any sampling happens."""
    if cfg.mode not in ("single", "minibatch", "scaled"):
        raise ValueError(f"unknown oracle mode {cfg.mode!r}")
    if cfg.sampling not in (WITH_REPLACEMENT, WITHOUT_REPLACEMENT):
        raise ValueError(f"unknown sampling scheme {cfg.sampling!r}")
    batch = 1 if cfg.mode == "single" else cfg.batch
    if batch < 1:
        raise ValueError(f"batch size must be >= 1, got {cfg.batch}")
    if cfg.sampling == WITHOUT_REPLACEMENT:
        smallest = min(agent.m for agent in problem.agents)
        if batch > smallest:
            raise ValueError(f"batch {batch} exceeds smallest local sample "
                             f"count {smallest} for without-replacement sampling")
    if cfg.mode == "scaled":
        if cfg.scaling is None:
            raise ValueError("scaled mode needs a scaling matrix or diagonal")
        _check_spd(np.asarray(cfg.scaling, dtype=float), problem.d_w)


def _check_spd(h: np.ndarray, d_w: int) -> None:
    if h.ndim == 1:
        if h.shape != (d_w,):
            raise ValueError(f"diagonal scaling must have length {d_w}, "
                             f"got {h.shape}")
        if not np.all(h > 0):
            raise ValueError("diagonal scaling must be strictly positive")
        return
    if h.shape != (d_w, d_w):
        raise ValueError(f"scaling matrix must be {d_w}x{d_w}, got {h.shape}")
    if not np.allclose(h, h.T):
        raise ValueError("scaling matrix must be symmetric")
    try:
        np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        raise ValueError("scaling matrix must be positive definite") from None


def _apply_scaling(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    return h * g if h.ndim == 1 else h @ g


class SampleStream:
    """Seeded index source for one agent's local dataset.

    With replacement: uniform i.i.d. indices. Without replacement: a fresh
    permutation per epoch, so every index appears exactly once every
    m / batch consecutive draws when batch divides m.
    """

    def __init__(self, seed: int, agent_id: int, m: int,
                 sampling: str = WITH_REPLACEMENT):
        if m < 1:
            raise ValueError("stream needs at least one sample")
        self.rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(agent_id,)))
        self.m = m
        self.sampling = sampling
        self._queue = np.empty(0, dtype=np.int64)
        self._pos = 0

    def _refill(self) -> None:
        if self.sampling == WITHOUT_REPLACEMENT:
            self._queue = self.rng.permutation(self.m)
        else:
            self._queue = self.rng.integers(0, self.m, size=max(_BLOCK, 1))
        self._pos = 0

    def take1(self) -> int:
        if self._pos >= len(self._queue):
            self._refill()
        j = self._queue[self._pos]
        self._pos += 1
        return int(j)

    def take(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.int64)
        filled = 0
        while filled < count:
            if self._pos >= len(self._queue):
                self._refill()
            chunk = min(count - filled, len(self._queue) - self._pos)
            out[filled:filled + chunk] = \
                self._queue[self._pos:self._pos + chunk]
            self._pos += chunk
            filled += chunk
        return out


def make_streams(cfg: OracleConfig, problem: Problem) -> list[SampleStream]:
    return [SampleStream(cfg.seed, i, agent.m, cfg.sampling)
            for i, agent in enumerate(problem.agents)]


def sample_direction(cfg: OracleConfig, agent: AgentObjective,
                     stream: SampleStream, w: np.ndarray) -> np.ndarray:
    """One stochastic direction draw for an agent at parameters w."""
    if cfg.mode == "single":
        return agent.sample_gradient(w, stream.take1())
    idx = stream.take(cfg.batch)
    g = agent.batch_gradient(w, idx)
    if cfg.mode == "scaled":
        g = _apply_scaling(np.asarray(cfg.scaling, dtype=float), g)
    return g


def empirical_bias(cfg: OracleConfig, agent: AgentObjective, w: np.ndarray,
                   trials: int, stream: SampleStream | None = None) -> np.ndarray:
    """Mean of `trials` direction draws minus the full gradient.

    The norm shrinks like sample-std / sqrt(trials) for unbiased modes;
    scaled mode with a non-identity scaling has a genuine offset.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if stream is None:
        stream = SampleStream(cfg.seed, 0, agent.m, cfg.sampling)
    acc = np.zeros(agent.d_w)
    for _ in range(trials):
        acc += sample_direction(cfg, agent, stream, w)
    return acc / trials - agent.full_gradient(w)
