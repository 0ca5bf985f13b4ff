"""Independent reference computations used by the tests.

Nothing here calls into frameforge.  Ranks come from numpy's own
``matrix_rank`` default cutoff or from exact rational elimination, and the
complement property is checked over every subset without pruning.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def exact_rank(rows) -> int:
    """Rank over Q by fraction-exact Gaussian elimination."""
    M = [[Fraction(x) for x in r] for r in rows]
    if not M:
        return 0
    rank, cols = 0, len(M[0])
    for c in range(cols):
        pivot = next((r for r in range(rank, len(M)) if M[r][c] != 0), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        for r in range(len(M)):
            if r != rank and M[r][c] != 0:
                q = M[r][c] / M[rank][c]
                M[r] = [a - q * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def subset_ranks(A: np.ndarray) -> np.ndarray:
    """Rank of every row subset, indexed by bitmask (bit i = row i)."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    masks = np.arange(2**m)
    keep = ((masks[:, None] >> np.arange(m)) & 1).astype(float)
    stacks = keep[:, :, None] * A[None, :, :]
    ranks = np.zeros(2**m, dtype=int)
    nz = keep.sum(axis=1) > 0
    ranks[nz] = np.linalg.matrix_rank(stacks[nz])
    return ranks


def brute_cp(A: np.ndarray) -> tuple[bool, list[int]]:
    """Complement property by checking every subset; returns failing masks."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    ranks = subset_ranks(A)
    full = (1 << m) - 1
    bad = [s for s in range(2**m) if ranks[s] < n and ranks[full ^ s] < n]
    return not bad, bad


def brute_spark(A: np.ndarray) -> int:
    """Smallest dependent subset size, m + 1 when all rows are independent."""
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    for k in range(1, m + 1):
        for S in itertools.combinations(range(m), k):
            if np.linalg.matrix_rank(A[list(S)]) < k:
                return k
    return m + 1


def _null(A: np.ndarray, n: int) -> np.ndarray:
    if A.shape[0] == 0:
        return np.eye(n)
    _, s, Vt = np.linalg.svd(A)
    r = int(np.sum(s > s.max() * max(A.shape) * np.finfo(float).eps)) if s.size else 0
    return Vt[r:].T


def sampled_nr(A: np.ndarray, rng: np.random.Generator, pairs: int = 1000, threshold: float = 1e-6) -> bool:
    """Norm retrieval by sampling: for every partition draw ``pairs`` random
    (u, v) from the two null spaces and look for a non-orthogonal pair."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    for mask in range(2 ** (m - 1)):
        I = [i for i in range(m) if mask >> i & 1]
        Ic = [i for i in range(m) if not mask >> i & 1]
        NI, NIc = _null(A[I], n), _null(A[Ic], n)
        if NI.shape[1] == 0 or NIc.shape[1] == 0:
            continue
        U = NI @ rng.standard_normal((NI.shape[1], pairs))
        V = NIc @ rng.standard_normal((NIc.shape[1], pairs))
        U /= np.linalg.norm(U, axis=0)
        V /= np.linalg.norm(V, axis=0)
        if np.max(np.abs(np.sum(U * V, axis=0))) > threshold:
            return False
    return True


def random_frame(rng: np.random.Generator, n_max: int, m_max: int, n_min: int = 1, m_min: int = 1) -> np.ndarray:
    """Frames from a mix of generic and structured distributions.

    Structured draws (integer entries, repeated rows, low-rank blocks,
    scaled orthonormal bases) exercise the failing side of every decision.
    """
    n = int(rng.integers(n_min, n_max + 1))
    m = int(rng.integers(m_min, m_max + 1))
    kind = int(rng.integers(0, 5))
    if kind == 0:
        A = rng.standard_normal((m, n))
    elif kind == 1:
        A = rng.integers(-1, 2, (m, n)).astype(float)
    elif kind == 2:
        base = rng.standard_normal((max(1, m // 2), n))
        A = base[rng.integers(0, base.shape[0], m)] * rng.choice([-2.0, -1.0, 0.5, 3.0], (m, 1))
    elif kind == 3:
        r = int(rng.integers(1, n + 1))
        A = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    else:
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        A = Q[rng.integers(0, n, m)] * rng.uniform(0.5, 2.0, (m, 1))
    return A


def well_conditioned(rng: np.random.Generator, n: int, cond: float = 10.0) -> np.ndarray:
    Q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    Q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q1 @ np.diag(rng.uniform(1.0, cond, n)) @ Q2
