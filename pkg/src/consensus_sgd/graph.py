"""Undirected communication topologies and their Laplacian spectra.

Builds unweighted graphs (ring, complete, path, explicit edge lists),
computes the Laplacian L = diag(A 1) - A with exact integer entries, and
caches the two spectral quantities the mixing analysis needs: the second
smallest eigenvalue (algebraic connectivity) and the largest singular
value. The consensus weight matrix is W = I - beta * L.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .validation import FAIL, OK, Check, ValidationResult

# Relative threshold (vs sigma_max) below which an eigenvalue counts as zero.
ZERO_EIG_RTOL = 1e-9


@dataclass(frozen=True)
class Graph:
    """Immutable unweighted undirected graph with cached spectral data."""

    n: int
    adjacency: np.ndarray  # (n, n) int64, symmetric, zero diagonal
    laplacian: np.ndarray  # (n, n) int64, rows sum to zero
    lambda2: float  # second smallest Laplacian eigenvalue (inf for n == 1)
    sigma_max: float  # largest Laplacian singular value

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1))

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])

    def edge_list(self) -> list[tuple[int, int]]:
        """All edges (i, j) with i < j."""
        ii, jj = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(ii.tolist(), jj.tolist()))


def _finalize(n: int, adjacency: np.ndarray) -> Graph:
    degrees = adjacency.sum(axis=1)
    laplacian = np.diag(degrees) - adjacency
    if n == 1:
        # Single node: trivially connected, no spectral constraint on mixing.
        lam2, smax = math.inf, 0.0
    else:
        evals = np.linalg.eigvalsh(laplacian.astype(float))
        lam2 = float(evals[1])
        smax = float(evals[-1])  # symmetric PSD: largest singular value
    adjacency.setflags(write=False)
    laplacian.setflags(write=False)
    return Graph(n=n, adjacency=adjacency, laplacian=laplacian,
                 lambda2=lam2, sigma_max=smax)


def from_edges(n: int, edges) -> Graph:
    """Graph on n nodes from an edge list; duplicates are idempotent."""
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    adjacency = np.zeros((n, n), dtype=np.int64)
    for i, j in edges:
        if i == j:
            raise ValueError(f"self-loop ({i}, {i}) not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
        adjacency[i, j] = 1
        adjacency[j, i] = 1
    return _finalize(n, adjacency)


def ring(n: int) -> Graph:
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)] if n > 1 else [])


def complete(n: int) -> Graph:
    return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n: int) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def build_graph(spec: str) -> Graph:
    """Parse a topology spec string.

    Accepted forms: ``ring:10``, ``complete:5``, ``path:4``,
    ``edges:n=4;0-1,1-2,2-3``.
    """
    kind, _, rest = spec.strip().partition(":")
    kind = kind.strip().lower()
    if kind in ("ring", "complete", "path"):
        try:
            n = int(rest)
        except ValueError:
            raise ValueError(f"bad node count in topology spec {spec!r}") from None
        return {"ring": ring, "complete": complete, "path": path}[kind](n)
    if kind == "edges":
        head, _, pairs = rest.partition(";")
        key, _, val = head.partition("=")
        if key.strip() != "n":
            raise ValueError(f"edge-list spec must start with n=<count>: {spec!r}")
        n = int(val)
        edges = []
        for token in pairs.split(","):
            token = token.strip()
            if not token:
                continue
            a, _, b = token.partition("-")
            edges.append((int(a), int(b)))
        return from_edges(n, edges)
    raise ValueError(f"unknown topology kind {kind!r} in {spec!r}")


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability of every node from node 0."""
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in g.neighbors(i):
            if not seen[j]:
                seen[j] = True
                queue.append(j)
    return bool(seen.all())


def validate_mixing(g: Graph, b: float) -> ValidationResult:
    """Check the consensus-weight bound b * sigma_max(L) < 1.

    Raises on a disconnected graph, where the mixing requirement is
    undefined. Returns a report carrying b, sigma_max and the bound.
    """
    if not is_connected(g):
        raise ValueError("mixing validation requires a connected graph")
    if b <= 0:
        raise ValueError(f"consensus weight must be positive, got b={b}")
    bound = math.inf if g.sigma_max == 0 else 1.0 / g.sigma_max
    passed = b * g.sigma_max < 1.0
    check = Check(
        name="b * sigma_max < 1",
        passed=passed,
        detail=f"b={b}, sigma_max={g.sigma_max:.12g}, "
               f"b*sigma_max={b * g.sigma_max:.12g}, bound b < {bound:.12g}",
    )
    return ValidationResult(status=OK if passed else FAIL, checks=(check,))


def enforce_mixing(g: Graph, b: float, mode: str = "compat") -> ValidationResult:
    """Apply validate_mixing with policy: strict raises, compat warns."""
    result = validate_mixing(g, b)
    if not result.ok:
        msg = f"mixing bound violated: {result.checks[0].detail}"
        if mode == "strict":
            raise ValueError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return result


def mixing_matrix(g: Graph, beta: float) -> np.ndarray:
    """W = I - beta * L; symmetric with unit row and column sums."""
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    return np.eye(g.n) - beta * g.laplacian.astype(float)
