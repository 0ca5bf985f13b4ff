"""Dense numerical kernel: ranks, null spaces, projectors and extremal eigenpairs.

All routines are pure functions of their inputs.  Ranks use a relative
singular-value cutoff ``rank_rel * sigma_max * max(rows, cols)`` so that every
span test is invariant under rescaling of the input.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .errors import NonFiniteEntry, NotSymmetric

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_matrix",
    "numerical_rank",
    "nullspace_basis",
    "range_basis",
    "orth_projector",
    "min_eig_sym",
    "singular_values",
    "full_rank_mask",
    "iter_combinations",
    "line_angle",
]


@dataclass(frozen=True)
class Tolerance:
    """Relative rank cutoff and absolute certificate cutoff."""

    rank_rel: float = 1e-10
    cert_abs: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel", "cert_abs"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


DEFAULT_TOL = Tolerance()


def as_matrix(A, cols: int | None = None) -> np.ndarray:
    """Coerce to a 2-d float array and reject NaN/Inf."""
    M = np.asarray(A, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1) if cols is None or M.size else M.reshape(0, cols)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFiniteEntry("matrix contains NaN or Inf")
    return M


def _cutoff(smax: float, shape: tuple[int, int], tol: Tolerance) -> float:
    if smax == 0.0:
        smax = 1.0
    return tol.rank_rel * smax * max(shape)


def singular_values(A) -> np.ndarray:
    """Nonincreasing singular values, ``min(rows, cols)`` of them."""
    M = as_matrix(A)
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def numerical_rank(A, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of singular values above the relative cutoff.

    The zero matrix has rank 0 (sigma_max is taken as 1 for the cutoff).
    An empty matrix also has rank 0.
    """
    M = as_matrix(A)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.count_nonzero(s > _cutoff(s[0], M.shape, tol)))


def nullspace_basis(A, tol: Tolerance = DEFAULT_TOL, cols: int | None = None) -> np.ndarray:
    """Orthonormal basis of the right null space, as the columns of a matrix.

    ``cols`` fixes the ambient dimension when ``A`` has no rows, in which
    case the identity is returned.
    """
    M = as_matrix(A, cols)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n)
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    r = int(np.count_nonzero(s > _cutoff(s[0] if s.size else 0.0, M.shape, tol)))
    return Vt[r:].T.copy()


def range_basis(V, tol: Tolerance = DEFAULT_TOL, dim: int | None = None) -> np.ndarray:
    """Orthonormal basis (as rows) of the span of the rows of ``V``."""
    M = as_matrix(V, dim)
    if M.shape[0] == 0:
        return np.zeros((0, M.shape[1]))
    _, s, Vt = np.linalg.svd(M, full_matrices=False)
    r = int(np.count_nonzero(s > _cutoff(s[0], M.shape, tol)))
    return Vt[:r].copy()


def orth_projector(V, tol: Tolerance = DEFAULT_TOL, dim: int | None = None) -> np.ndarray:
    """Symmetric idempotent matrix projecting onto ``span(V)``."""
    B = range_basis(V, tol, dim)
    P = B.T @ B
    return 0.5 * (P + P.T)


def min_eig_sym(S, tol: Tolerance = DEFAULT_TOL) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector of a symmetric matrix."""
    M = as_matrix(S)
    if M.shape[0] != M.shape[1]:
        raise NotSymmetric(f"matrix of shape {M.shape} is not square")
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if np.abs(M - M.T).max(initial=0.0) > tol.cert_abs * scale:
        raise NotSymmetric("matrix is not symmetric within cert_abs")
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return float(w[0]), V[:, 0].copy()


def full_rank_mask(stack: np.ndarray, tol: Tolerance = DEFAULT_TOL, margin: float = 1e3) -> np.ndarray:
    """Batched test ``numerical_rank(stack[b]) == min(rows, cols)``.

    A Gram-determinant lower bound on sigma_min certifies the clear cases;
    the rest fall back to an SVD with exactly the ``numerical_rank`` cutoff,
    so the result agrees with ``numerical_rank`` matrix by matrix.
    """
    B, r, c = stack.shape
    if B == 0:
        return np.zeros(0, dtype=bool)
    p = min(r, c)
    if p == 0:
        return np.ones(B, dtype=bool)
    G = stack @ stack.transpose(0, 2, 1) if r <= c else stack.transpose(0, 2, 1) @ stack
    d = np.einsum("bii->bi", G)
    trace = d.sum(axis=1)
    det = np.linalg.det(G)
    # sigma_min^2 >= det(G) / e_{p-1}(diag G)  (Cauchy-Binet + Hadamard)
    with np.errstate(divide="ignore", invalid="ignore"):
        if p == 1:
            esym = np.ones(B)
        else:
            esym = np.prod(d, axis=1) * np.sum(1.0 / d, axis=1)
        lower = det / esym
    need = (margin * tol.rank_rel * max(r, c)) ** 2 * trace
    ok = np.isfinite(lower) & (d.min(axis=1) > 0) & (lower > need)
    undecided = np.flatnonzero(~ok)
    if undecided.size:
        s = np.linalg.svd(stack[undecided], compute_uv=False)
        smax = np.where(s[:, 0] == 0.0, 1.0, s[:, 0])
        ok[undecided] = s[:, -1] > tol.rank_rel * smax * max(r, c)
    return ok


def iter_combinations(m: int, k: int, chunk: int = 32768) -> Iterator[np.ndarray]:
    """Lexicographic k-subsets of range(m), yielded as int arrays of shape (<=chunk, k)."""
    if k == 0:
        yield np.zeros((1, 0), dtype=np.intp)
        return
    it = itertools.combinations(range(m), k)
    total = comb(m, k)
    done = 0
    while done < total:
        size = min(chunk, total - done)
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, size)), dtype=np.intp, count=size * k)
        done += size
        yield flat.reshape(size, k)


def stack_rows(A: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Gather ``A[subset]`` for each row of ``subsets`` into a (B, k, n) stack."""
    return A[subsets]


def is_orthonormal(B: np.ndarray, atol: float) -> bool:
    if B.shape[0] == 0:
        return True
    return bool(np.abs(B @ B.T - np.eye(B.shape[0])).max() <= atol)


def unit(v: Sequence[float] | np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / nrm


def canonical_sign(v: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Flip ``v`` so its first entry above ``atol`` in magnitude is positive."""
    for entry in v:
        if abs(entry) > atol:
            return v if entry > 0 else -v
    return v


def line_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle in [0, pi/2] between the lines spanned by u and v (stable near 0)."""
    u = unit(u)
    v = unit(v)
    c = abs(float(u @ v))
    s = float(np.linalg.norm(v - (u @ v) * u))
    return float(np.arctan2(s, c))
