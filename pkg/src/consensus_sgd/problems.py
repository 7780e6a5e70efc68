"""Differentiable per-agent objectives.

Each agent i holds an empirical risk f_i(w) = (1/m_i) * sum_j loss(w, sample_j)
over its local samples and exposes the full value, the full gradient, and
per-sample gradients (the deterministic building blocks of the stochastic
oracle). Three families are provided: quadratic (convex fixture with a
closed-form minimizer), scalar double-well (non-convex fixture with critical
points at -1, 0, +1 when unshifted), and a single-hidden-layer sigmoid
classifier trained under per-class cross-entropy.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

# Sigmoid outputs are clamped to this range inside the log terms only, so
# the risk stays finite for any finite parameter vector.
LOG_CLAMP = 1e-12

CHECKPOINT_MAGIC = b"CSGDW001"


def sigmoid(a):
    """Numerically stable logistic function, never overflows."""
    a = np.asarray(a, dtype=float)
    e = np.exp(-np.abs(a))
    return np.where(a >= 0, 1.0, e) / (1.0 + e)


class AgentObjective:
    """Base class: an empirical risk over m local samples in R^d_w."""

    d_w: int
    m: int

    def full_value(self, w: np.ndarray) -> float:
        raise NotImplementedError

    def full_gradient(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample_gradient(self, w: np.ndarray, j: int) -> np.ndarray:
        """Gradient of the loss at sample j (unbiased estimate of the full
        gradient when j is drawn uniformly)."""
        raise NotImplementedError

    def batch_gradient(self, w: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Average of sample gradients over idx; subclasses may vectorize."""
        acc = self.sample_gradient(w, int(idx[0]))
        for j in idx[1:]:
            acc = acc + self.sample_gradient(w, int(j))
        return acc / len(idx)


@dataclass(frozen=True)
class Problem:
    """A network objective: one AgentObjective per agent, shared dimension."""

    agents: tuple[AgentObjective, ...]

    def __post_init__(self):
        if not self.agents:
            raise ValueError("a problem needs at least one agent")
        dims = {a.d_w for a in self.agents}
        if len(dims) != 1:
            raise ValueError(f"agents disagree on parameter dimension: {dims}")

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def d_w(self) -> int:
        return self.agents[0].d_w


class QuadraticAgent(AgentObjective):
    """loss(w, c_j) = 0.5 * ||w - c_j||^2 over sample centers c_j."""

    def __init__(self, centers: np.ndarray):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        self._centers = centers
        self._mean = centers.mean(axis=0)
        self.m = centers.shape[0]
        self.d_w = centers.shape[1]

    def full_value(self, w):
        return float(0.5 * ((w - self._centers) ** 2).sum(axis=1).mean())

    def full_gradient(self, w):
        return w - self._mean

    def sample_gradient(self, w, j):
        return w - self._centers[j]

    def batch_gradient(self, w, idx):
        return w - self._centers[idx].mean(axis=0)


class DoubleWellAgent(AgentObjective):
    """Scalar loss 0.25*(w^2 - 1)^2 + shift * w."""

    d_w = 1
    m = 1

    def __init__(self, shift: float = 0.0):
        self._shift = float(shift)

    def full_value(self, w):
        x = float(w[0])
        return 0.25 * (x * x - 1.0) ** 2 + self._shift * x

    def full_gradient(self, w):
        x = float(w[0])
        return np.array([x * (x * x - 1.0) + self._shift])

    def sample_gradient(self, w, j):
        return self.full_gradient(w)


def quadratic_problem(centers) -> Problem:
    """One agent per center, each with a single sample at that center.

    The aggregate objective is minimized at the mean of the centers.
    """
    centers = [np.asarray(c, dtype=float) for c in centers]
    if not centers:
        raise ValueError("need at least one center")
    dims = {c.shape for c in centers}
    if len(dims) != 1:
        raise ValueError(f"centers have mismatched dimensions: {dims}")
    return Problem(tuple(QuadraticAgent(c[None, :]) for c in centers))


def quadratic_fixture(n: int, d_w: int, samples_per_agent: int = 5,
                      spread: float = 0.5, sample_spread: float = 0.5,
                      seed: int = 0) -> Problem:
    """Random multi-sample quadratic network for stochastic-oracle studies.

    Agent i gets samples_per_agent centers scattered around a random base
    point; single-sample draws are then genuinely noisy while the aggregate
    minimizer stays the closed-form mean of all sample centers.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(7,)))
    agents = []
    for _ in range(n):
        base = rng.uniform(-spread, spread, size=d_w)
        samples = base + rng.uniform(-sample_spread, sample_spread,
                                     size=(samples_per_agent, d_w))
        agents.append(QuadraticAgent(samples))
    return Problem(tuple(agents))


def minimizer(problem: Problem) -> np.ndarray:
    """Closed-form aggregate minimizer for quadratic problems."""
    means = []
    for agent in problem.agents:
        if not isinstance(agent, QuadraticAgent):
            raise ValueError("closed-form minimizer only exists for quadratics")
        means.append(agent._mean)
    return np.mean(means, axis=0)


def double_well_problem(n: int, shifts=None) -> Problem:
    if shifts is None:
        shifts = [0.0] * n
    if len(shifts) != n:
        raise ValueError(f"need {n} shifts, got {len(shifts)}")
    return Problem(tuple(DoubleWellAgent(s) for s in shifts))


# ---------------------------------------------------------------------------
# Single-hidden-layer sigmoid classifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmoidNetSpec:
    """Layer widths excluding bias units; parameters are the two weight
    matrices W1 (d_hidden x (d_in+1)) and W2 (d_out x (d_hidden+1)),
    flattened row-major in that order, bias column first."""

    d_in: int = 400
    d_hidden: int = 50
    d_out: int = 10

    @property
    def d_w(self) -> int:
        return self.d_hidden * (self.d_in + 1) + self.d_out * (self.d_hidden + 1)

    def unpack(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if w.shape != (self.d_w,):
            raise ValueError(f"expected parameter vector of length {self.d_w}, "
                             f"got shape {w.shape}")
        split = self.d_hidden * (self.d_in + 1)
        w1 = w[:split].reshape(self.d_hidden, self.d_in + 1)
        w2 = w[split:].reshape(self.d_out, self.d_hidden + 1)
        return w1, w2

    def pack(self, w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
        return np.concatenate([w1.ravel(), w2.ravel()])


def _forward_batch(spec: SigmoidNetSpec, w: np.ndarray, x: np.ndarray):
    """Hidden activations and outputs for a (batch, d_in) input block."""
    w1, w2 = spec.unpack(w)
    hidden = sigmoid(x @ w1[:, 1:].T + w1[:, 0])
    out = sigmoid(hidden @ w2[:, 1:].T + w2[:, 0])
    return hidden, out


def nn_forward(spec: SigmoidNetSpec, w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Class scores in (0,1)^d_out for a single input; a bias unit fixed at 1
    is prepended internally to both the input and the hidden layer."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.d_in,):
        raise ValueError(f"expected input of length {spec.d_in}, got {x.shape}")
    _, out = _forward_batch(spec, w, x[None, :])
    return out[0]


def nn_predict(spec: SigmoidNetSpec, w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Predicted class per row of x; ties resolve to the smallest index."""
    _, out = _forward_batch(spec, w, np.atleast_2d(x))
    return np.argmax(out, axis=1)


def _risk_from_outputs(out: np.ndarray, targets: np.ndarray) -> float:
    y = np.clip(out, LOG_CLAMP, 1.0 - LOG_CLAMP)
    per_sample = -(targets * np.log(y) + (1.0 - targets) * np.log1p(-y)).sum(axis=1)
    return float(per_sample.mean())


def _check_one_hot(targets: np.ndarray, d_out: int) -> None:
    if targets.ndim != 2 or targets.shape[1] != d_out:
        raise ValueError(f"targets must be (batch, {d_out}), got {targets.shape}")
    ok = np.all((targets == 0.0) | (targets == 1.0)) and \
        np.all(targets.sum(axis=1) == 1.0)
    if not ok:
        raise ValueError("targets must be one-hot rows")


def nn_risk_and_gradient(spec: SigmoidNetSpec, w: np.ndarray,
                         x: np.ndarray, targets: np.ndarray):
    """Per-sample-averaged cross-entropy risk and its exact gradient.

    x is (batch, d_in), targets is (batch, d_out) one-hot. The risk averages
    -sum_k [t_k ln y_k + (1-t_k) ln(1-y_k)] over the batch; the gradient is
    the analytic backpropagation gradient of that average.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if x.shape[0] != targets.shape[0]:
        raise ValueError(f"batch size mismatch: {x.shape[0]} inputs vs "
                         f"{targets.shape[0]} targets")
    _check_one_hot(targets, spec.d_out)

    hidden, out = _forward_batch(spec, w, x)
    risk = _risk_from_outputs(out, targets)

    batch = x.shape[0]
    w1, w2 = spec.unpack(w)
    d2 = (out - targets) / batch  # (batch, d_out)
    g2 = np.empty_like(w2)
    g2[:, 0] = d2.sum(axis=0)
    g2[:, 1:] = d2.T @ hidden
    d1 = (d2 @ w2[:, 1:]) * hidden * (1.0 - hidden)  # (batch, d_hidden)
    g1 = np.empty_like(w1)
    g1[:, 0] = d1.sum(axis=0)
    g1[:, 1:] = d1.T @ x
    return risk, spec.pack(g1, g2)


class SigmoidNetAgent(AgentObjective):
    """Empirical cross-entropy risk of the sigmoid classifier on local data."""

    def __init__(self, spec: SigmoidNetSpec, x: np.ndarray, targets: np.ndarray):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        if x.shape[0] == 0:
            raise ValueError("agent needs at least one sample")
        if x.shape[1] != spec.d_in:
            raise ValueError(f"inputs have width {x.shape[1]}, "
                             f"spec expects {spec.d_in}")
        if x.shape[0] != targets.shape[0]:
            raise ValueError("inputs and targets disagree on sample count")
        _check_one_hot(targets, spec.d_out)
        self.spec = spec
        self._x = x
        self._targets = targets
        self.m = x.shape[0]
        self.d_w = spec.d_w

    def full_value(self, w):
        _, out = _forward_batch(self.spec, w, self._x)
        return _risk_from_outputs(out, self._targets)

    def full_gradient(self, w):
        _, g = nn_risk_and_gradient(self.spec, w, self._x, self._targets)
        return g

    def sample_gradient(self, w, j):
        _, g = nn_risk_and_gradient(self.spec, w, self._x[j:j + 1],
                                    self._targets[j:j + 1])
        return g

    def batch_gradient(self, w, idx):
        _, g = nn_risk_and_gradient(self.spec, w, self._x[idx],
                                    self._targets[idx])
        return g


# ---------------------------------------------------------------------------
# Stacked (network-wide) evaluation
# ---------------------------------------------------------------------------

def _blocks(problem: Problem, w_stacked: np.ndarray) -> np.ndarray:
    w_stacked = np.asarray(w_stacked, dtype=float)
    expected = problem.n * problem.d_w
    if w_stacked.shape != (expected,):
        raise ValueError(f"stacked vector must have length {expected} "
                         f"(n={problem.n} agents x d_w={problem.d_w}), "
                         f"got shape {w_stacked.shape}")
    return w_stacked.reshape(problem.n, problem.d_w)


def aggregate_value(problem: Problem, w_stacked: np.ndarray) -> float:
    """Sum of per-agent risks, each at its own parameter block."""
    blocks = _blocks(problem, w_stacked)
    return float(sum(agent.full_value(blocks[i])
                     for i, agent in enumerate(problem.agents)))


def aggregate_gradient(problem: Problem, w_stacked: np.ndarray) -> np.ndarray:
    """Blockwise concatenation of the per-agent gradients."""
    blocks = _blocks(problem, w_stacked)
    out = np.empty_like(blocks)
    for i, agent in enumerate(problem.agents):
        out[i] = agent.full_gradient(blocks[i])
    return out.ravel()


# ---------------------------------------------------------------------------
# Checkpoints: 8-byte magic, int64-LE length, float64-LE payload
# ---------------------------------------------------------------------------

def write_checkpoint(path, w: np.ndarray) -> None:
    w = np.asarray(w, dtype=float).ravel()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<q", w.size))
        fh.write(w.astype("<f8").tobytes())


def read_checkpoint(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r} in {path}")
        (count,) = struct.unpack("<q", fh.read(8))
        payload = fh.read()
    if len(payload) != 8 * count:
        raise ValueError(f"truncated checkpoint {path}: header promises "
                         f"{count} values, payload holds {len(payload) // 8}")
    return np.frombuffer(payload, dtype="<f8").astype(float)
