"""Builders for the explicit frame families, each checked before it is returned.

Measure-zero avoidance (lift coordinates, full-spark nodes, finitely full
spark draws) is done by draw, verify, redraw: at most ``MAX_DRAWS`` draws and
then :class:`ConstructionFailed`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Callable, Sequence

import numpy as np

from .analyzer import (
    DEFAULT_CONFIG,
    SearchConfig,
    Verdict,
    complement_property,
    lift_capacity,
    lifting_number,
    phase_retrieval,
    riesz_bound,
    rows_full_spark,
    spark,
)
from .errors import (
    ConstructionFailed,
    DimensionMismatch,
    FormatError,
    LevelNotPR,
    LiftNotPossible,
    SubsetBudgetExceeded,
)
from .linalg import DEFAULT_TOL, Tolerance, numerical_rank
from .model import Frame, SequenceFamily, SequenceVector, format_seq_header, truncate

MAX_DRAWS = 16

__all__ = [
    "MAX_DRAWS",
    "full_spark_frame",
    "an_vector",
    "an_family",
    "an_sequence",
    "AN_LEVELS",
    "pairs_family",
    "pairs_sequence",
    "pair_index",
    "canonical_sequence",
    "phi_sequence",
    "LiftResult",
    "lift",
    "shift_lift",
    "TranslateResult",
    "translate_family",
    "nonzero_coordinate_translate",
    "ThreeRieszResult",
    "three_riesz_blocks",
    "NestedUnionResult",
    "nested_union",
    "TrapResult",
    "hyperplane_trap",
    "FFSResult",
    "finitely_full_spark",
    "RieszPairTrial",
    "riesz_pair_search",
    "sequence_from_header",
]


def _rng(seed, *salt) -> np.random.Generator:
    return np.random.default_rng([int(seed), *[int(s) for s in salt]])


# --------------------------------------------------------------------------
# full spark frames


def _circle_vandermonde(n: int, theta: np.ndarray) -> np.ndarray:
    """Rows are the real and imaginary parts of z^k at z = exp(i theta).

    Odd n uses 1, cos k t, sin k t for k = 1..n//2; even n uses the
    half-integer frequencies k + 1/2.  Either way every n rows with distinct
    angles in [0, 2 pi) are independent, so the rows are full spark.
    """
    d = n // 2
    cols = [np.ones_like(theta)] if n % 2 else []
    freqs = np.arange(1, d + 1) if n % 2 else np.arange(d) + 0.5
    for k in freqs:
        cols += [np.cos(k * theta), np.sin(k * theta)]
    V = np.array(cols).T
    return V / np.linalg.norm(V, axis=1)[:, None]


def full_spark_frame(n: int, m: int, seed: int = 0, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> Frame:
    """m unit vectors in R^n, every min(m, n) of them independent.

    Nodes are jittered equispaced angles on the circle, one per slot of
    width 2 pi / m, so they stay well separated; the rows form a real
    Vandermonde-type matrix on the unit circle.
    """
    if n < 1 or m < 1:
        raise ValueError("full_spark_frame needs n >= 1 and m >= 1")
    for attempt in range(MAX_DRAWS):
        rng = _rng(seed, n, m, attempt)
        theta = 2.0 * np.pi * (np.arange(m) + rng.uniform(0.1, 0.9, m)) / m
        f = Frame(_circle_vandermonde(n, theta))
        if spark(f, tol, cfg).full_spark:
            return f
    raise ConstructionFailed(f"no full-spark frame of {m} vectors in R^{n} after {MAX_DRAWS} draws")


# --------------------------------------------------------------------------
# the A_n family


def an_vector(n: int, t: float) -> np.ndarray:
    """The point of A_n at parameter t (n >= 2)."""
    if n < 2:
        raise ValueError("A_n is defined for n >= 2")
    c = n - n * sum(t ** (i - 1) / i for i in range(2, n))
    first = sum(t ** (2 * i) for i in range(1, n - 1)) + c * c
    return np.array([first] + [t**i for i in range(1, n - 1)] + [c], dtype=float)


def _phi(n: int) -> np.ndarray:
    return 1.0 / np.arange(1, n + 1)


def _perp_first_coordinate(x: np.ndarray, phi: np.ndarray) -> float:
    """First coordinate of (I - P_x) phi."""
    return float(phi[0] - (phi @ x) * x[0] / (x @ x))


def _default_parameters(count: int) -> list[float]:
    ts = [0.0]
    k = 1
    while len(ts) < count:
        ts += [float(k), float(-k)]
        k += 1
    return ts[:count]


def an_family(n: int, seed: int = 0, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> Frame:
    """2n - 1 full-spark points of A_n, labelled by their parameter t.

    Every x in A_n has x_1 = ||x||^2 - x_1^2, so (I - P_x) phi_n has first
    coordinate 0 with phi_n = (1, 1/2, ..., 1/n).  Parameters start at
    t = 0, 1, -1, 2, -2, ... and are redrawn as random rationals when that
    set is not numerically full spark.  For n = 2 the set A_2 is the single
    point (4, 2) and no full-spark triple exists.
    """
    if n < 2:
        raise ValueError("an_family needs n >= 2")
    if n == 2:
        raise ConstructionFailed("A_2 is the single point (4, 2), so it has no 3 distinct points, let alone a full-spark triple")
    phi = _phi(n)
    count = 2 * n - 1
    for attempt in range(MAX_DRAWS):
        if attempt == 0:
            ts = _default_parameters(count)
        else:
            rng = _rng(seed, n, attempt)
            ts = sorted(rng.integers(-4 * n, 4 * n + 1, count) / rng.integers(1, 5, count))
        X = np.array([an_vector(n, t) for t in ts])
        for x in X:
            if abs(x[0] - (x @ x - x[0] ** 2)) > 1e-9 * (x @ x) or abs(_perp_first_coordinate(x, phi)) > 1e-9:
                raise ConstructionFailed(f"A_{n} point {x} violates its defining identity")
        # spark is invariant under row scaling; test the unit rows
        if spark(Frame(X / np.linalg.norm(X, axis=1)[:, None]), tol, cfg).full_spark:
            return Frame(X, labels=tuple(f"t={t:g}" for t in ts))
    raise ConstructionFailed(f"A_{n} produced no full-spark set of {count} points after {MAX_DRAWS} draws")


AN_LEVELS = (1,) + tuple(range(3, 64))
"""Levels pooled by :func:`an_sequence`; level 2 is skipped because A_2 is a point."""


@lru_cache(maxsize=None)
def _an_level(n: int) -> np.ndarray:
    if n == 1:
        return np.ones((1, 1))
    X = an_family(n).vectors
    return X / np.linalg.norm(X, axis=1)[:, None]


def _pooled_index(sizes: Callable[[int], int], levels: Sequence[int], k: int) -> tuple[int, int]:
    for n in levels:
        s = sizes(n)
        if k <= s:
            return n, k - 1
        k -= s
    raise IndexError("index beyond the last level")


def an_sequence(max_level: int | None = None) -> SequenceFamily:
    """Unit A_n vectors pooled over levels 1, 3, 4, 5, ... (level n lives in R^n)."""
    levels = AN_LEVELS if max_level is None else tuple(n for n in AN_LEVELS if n <= max_level)

    def gen(k: int) -> SequenceVector:
        n, i = _pooled_index(lambda n: 2 * n - 1, levels, k)
        return SequenceVector(_an_level(n)[i])

    params = {} if max_level is None else {"levels": max_level}
    return SequenceFamily(
        gen,
        "unit A_n points pooled over levels 1, 3, 4, ...",
        kind="an",
        params=params,
        size=sum(2 * n - 1 for n in levels) if max_level is not None else None,
        prefix_count=lambda N: sum(2 * n - 1 for n in levels if n <= N),
    )


# --------------------------------------------------------------------------
# pairs, canonical basis and phi


def pairs_family(N: int) -> Frame:
    """All e_i + e_j with i < j <= N in lexicographic order; labels are 'i,j' (1-based)."""
    if N < 2:
        raise ValueError("pairs_family needs N >= 2")
    rows, labels = [], []
    for i, j in itertools.combinations(range(N), 2):
        v = np.zeros(N)
        v[[i, j]] = 1.0
        rows.append(v)
        labels.append(f"{i + 1},{j + 1}")
    return Frame(np.array(rows), tuple(labels))


def pair_index(k: int) -> tuple[int, int]:
    """The k-th pair (1-based) in the order of :func:`pairs_sequence`."""
    j = 2
    while comb(j, 2) < k:
        j += 1
    return k - comb(j - 1, 2), j


def pairs_sequence() -> SequenceFamily:
    """e_i + e_j ordered by j, then i, so the first C(N, 2) members have support <= N."""

    def gen(k: int) -> SequenceVector:
        i, j = pair_index(k)
        v = np.zeros(j)
        v[[i - 1, j - 1]] = 1.0
        return SequenceVector(v)

    return SequenceFamily(gen, "pairs e_i + e_j, i < j", kind="pairs", prefix_count=lambda N: comb(N, 2))


def canonical_sequence() -> SequenceFamily:
    def gen(k: int) -> SequenceVector:
        v = np.zeros(k)
        v[-1] = 1.0
        return SequenceVector(v)

    return SequenceFamily(gen, "canonical basis e_k", kind="canonical", prefix_count=lambda N: N)


def phi_sequence() -> SequenceFamily:
    """The single vector phi = (1, 1/2, 1/3, ...), with an explicit tail."""
    return SequenceFamily(
        lambda k: SequenceVector(np.zeros(0), tail=lambda j: 1.0 / j),
        "phi = (1/j)",
        kind="phi",
        size=1,
        prefix_count=lambda N: 0,
    )


# --------------------------------------------------------------------------
# lifting


@dataclass(frozen=True, eq=False)
class LiftResult:
    lifted: Frame
    appended_coords: np.ndarray
    attempts: int
    convention: str = "append"


def lift(f: Frame, k: int, seed: int = 0, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> LiftResult:
    """k successive 1-lifts, each appending one Gaussian coordinate.

    Refuses when k exceeds the lifting number or when some partition has no
    spanning side with n + k vectors (no k-lift can have the complement
    property then).  Every draw is checked with :func:`complement_property`
    in the new dimension.  The first n coordinates are copied bit for bit.
    """
    if k < 1:
        raise ValueError("lift needs k >= 1")
    L = lifting_number(f, tol, cfg)
    if k > L:
        raise LiftNotPossible(f"k={k} exceeds the lifting number {L}")
    cap = lift_capacity(f, tol, cfg)
    if k > cap:
        raise LiftNotPossible(f"k={k} exceeds the lift capacity {cap}: some partition has no spanning side with {f.dim + k} vectors")
    rng = _rng(seed, f.m, f.dim, k)
    current = f.vectors
    appended = []
    attempts = 0
    for step in range(k):
        for _ in range(MAX_DRAWS):
            attempts += 1
            v = rng.standard_normal(f.m)
            cand = Frame(np.hstack([current, v[:, None]]), f.labels)
            if complement_property(cand, tol, cfg).verdict is Verdict.HOLDS:
                current = cand.vectors
                appended.append(v)
                break
        else:
            raise ConstructionFailed(f"lift step {step + 1}: no coordinate passed after {MAX_DRAWS} draws")
    lifted = Frame(current, f.labels)
    if not np.array_equal(lifted.vectors[:, : f.dim], f.vectors):
        raise ConstructionFailed("lift changed the original coordinates")
    return LiftResult(lifted, np.array(appended).T, attempts)


def shift_lift(X: Frame, Y: Frame, seed: int = 0, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> LiftResult:
    """Lift X u Y by one coordinate placed first.

    X must do phase retrieval and Y must be a dependent spanning set.  X is
    shifted right, x -> (0, x); each y_i becomes (v_i, y_i) with v drawn so
    that every v_i is nonzero and <alpha, v> != 0 for a dependence alpha of
    Y.  The result is checked with :func:`complement_property`.
    """
    if X.dim != Y.dim:
        raise DimensionMismatch("X and Y must live in the same space")
    n = X.dim
    if phase_retrieval(X, tol, cfg).verdict is not Verdict.HOLDS:
        raise LiftNotPossible("X does not do phase retrieval")
    if numerical_rank(Y.vectors, tol) < n or Y.m <= n:
        raise LiftNotPossible("Y must span and be linearly dependent")
    rng = _rng(seed, X.m, Y.m, n)
    for attempt in range(1, MAX_DRAWS + 1):
        v = rng.standard_normal(Y.m)
        if np.abs(v).min() <= tol.cert_abs:
            continue
        rows = np.vstack([np.hstack([np.zeros((X.m, 1)), X.vectors]), np.hstack([v[:, None], Y.vectors])])
        cand = Frame(rows)
        if complement_property(cand, tol, cfg).verdict is Verdict.HOLDS:
            return LiftResult(cand, v[:, None], attempt, convention="prepend")
    raise ConstructionFailed(f"shift lift: no coordinate vector passed after {MAX_DRAWS} draws")


# --------------------------------------------------------------------------
# translation


@dataclass(frozen=True, eq=False)
class TranslateResult:
    """A translated family with the bookkeeping the translation produced."""

    family: Frame | SequenceFamily
    v: np.ndarray | SequenceVector
    dropped: tuple[int, ...] = ()
    notes: tuple[str, ...] = ()
    pr_before: Verdict | None = None
    pr_after: Verdict | None = None


def _bessel_weights(norms: np.ndarray) -> np.ndarray:
    return 1.0 / (norms * 2.0 ** np.arange(1, norms.size + 1))


def _translate_sequence(s: SequenceFamily, v: SequenceVector, bessel: bool, kind: str) -> SequenceFamily:
    def gen(k: int) -> SequenceVector:
        x = s.member(k)
        if bessel:
            if x.tail is not None:
                raise ValueError("Bessel rescaling needs finitely supported members")
            nrm = float(np.linalg.norm(x.coords))
            x = SequenceVector(x.coords / (nrm * 2.0**k)) if nrm > 0 else x
        length = max(x.coords.size, v.coords.size)
        coords = x.restrict(length) + v.restrict(length)
        if x.tail is None and v.tail is None:
            return SequenceVector(coords)
        return SequenceVector(coords, tail=lambda j: x.coordinate(j) + v.coordinate(j))

    return SequenceFamily(gen, f"{s.description}, translated", kind=kind, size=s.size, prefix_count=None)


def translate_family(
    obj: Frame | SequenceFamily,
    v,
    bessel: bool = False,
    tol: Tolerance = DEFAULT_TOL,
    cfg: SearchConfig = DEFAULT_CONFIG,
) -> TranslateResult:
    """The family {x_i + v}, optionally after rescaling x_i to x_i / (||x_i|| 2^i).

    For a frame the zero vectors are dropped before Bessel rescaling (noted
    in the result) and phase retrieval is decided before and after.  For a
    sequence the result is lazy; zero members are left in place because
    their weight is undefined, and checking is left to the truncation module.
    """
    if isinstance(obj, SequenceFamily):
        vv = v if isinstance(v, SequenceVector) else SequenceVector(np.asarray(v, dtype=float))
        return TranslateResult(_translate_sequence(obj, vv, bessel, "translated"), vv)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != obj.dim:
        raise DimensionMismatch(f"translation vector has length {v.size}, frame lives in R^{obj.dim}")
    X = obj.vectors
    dropped: tuple[int, ...] = ()
    notes: list[str] = []
    if bessel:
        norms = np.linalg.norm(X, axis=1)
        weights = _bessel_weights(np.where(norms > 0, norms, 1.0))
        dropped = tuple(int(i) for i in np.flatnonzero(norms == 0))
        if dropped:
            notes.append("zero vectors dropped before Bessel rescaling: " + " ".join(map(str, dropped)))
        keep = norms > 0
        X = (X * weights[:, None])[keep]
        labels = None if obj.labels is None else tuple(l for l, k in zip(obj.labels, keep) if k)
    else:
        labels = obj.labels
    out = Frame(X + v, labels)
    before = phase_retrieval(obj, tol, cfg).verdict
    after = phase_retrieval(out, tol, cfg).verdict
    return TranslateResult(out, v, dropped, tuple(notes), before, after)


def _avoiding_value(j: int, forbidden: np.ndarray, seed: int, margin: float) -> float:
    """A value in (0, 2^-j) at distance > margin from every forbidden value."""
    for attempt in range(MAX_DRAWS):
        a = _rng(seed, j, attempt).uniform(0.05, 0.95) / 2.0**j
        if forbidden.size == 0 or np.abs(forbidden - a).min() > margin:
            return float(a)
    raise ConstructionFailed(f"coordinate {j}: no admissible translation value")


def nonzero_coordinate_translate(
    obj: Frame | SequenceFamily,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
    cfg: SearchConfig = DEFAULT_CONFIG,
) -> TranslateResult:
    """Translate by v with 0 < v(j) < 2^-j and v(j) != -x_i(j), making every coordinate nonzero.

    For a frame all constraints are known and checked.  For a sequence v(j)
    is a seeded draw per coordinate (pure in j); the avoidance condition
    can only be checked on truncations.
    """
    if isinstance(obj, SequenceFamily):
        vv = SequenceVector(np.zeros(0), tail=lambda j: float(_rng(seed, j, 0).uniform(0.05, 0.95) / 2.0**j))
        fam = _translate_sequence(obj, vv, False, "nonzero-translate")
        return TranslateResult(fam, vv, notes=("coordinate avoidance is only checkable at truncation",))
    X = obj.vectors
    v = np.array([_avoiding_value(j, -X[:, j - 1], seed, tol.cert_abs) for j in range(1, obj.dim + 1)])
    out = Frame(X + v, obj.labels)
    if np.abs(out.vectors).min() <= tol.cert_abs:
        raise ConstructionFailed("a translated coordinate is numerically zero")
    before = phase_retrieval(obj, tol, cfg).verdict
    after = phase_retrieval(out, tol, cfg).verdict
    return TranslateResult(out, v, pr_before=before, pr_after=after)


# --------------------------------------------------------------------------
# three Riesz sequences


@dataclass(frozen=True, eq=False)
class ThreeRieszResult:
    families: tuple[SequenceFamily, SequenceFamily, SequenceFamily]
    levels: list[dict[str, str]]
    level_frames: tuple[Frame, ...] = field(default=())


def _riesz_level(n: int, seed: int, tol: Tolerance, cfg: SearchConfig) -> tuple[np.ndarray, dict[str, str]]:
    """Vectors u_{nij} as an array of shape (3, 2 * 3^n, 3^(n+1))."""
    D = 3 ** (n + 1)
    lo = 3**n
    count = D - lo
    target = 0.9 / 2 ** (n + 1)
    check_spark = comb(3 * count, D) <= cfg.subset_budget
    for attempt in range(MAX_DRAWS):
        rng = _rng(seed, n, attempt)
        U = np.zeros((3, count, D))
        for j in range(3):
            G = rng.standard_normal((count, D))
            G *= np.sqrt(target / np.sum(G**2))
            U[j] = G
            U[j, np.arange(count), lo + np.arange(count)] += 1.0
        pooled = U.reshape(3 * count, D)
        if not check_spark or rows_full_spark(pooled, tol):
            break
    else:
        raise ConstructionFailed(f"three Riesz blocks: level {n} not full spark after {MAX_DRAWS} draws")
    sums = [float(np.sum((U[j] - np.eye(D)[lo:]) ** 2)) for j in range(3)]
    if max(sums) > 1.0 / 2 ** (n + 1):
        raise ConstructionFailed(f"level {n}: perturbation sum {max(sums)} exceeds 2^-{n + 1}")
    info = {
        "level": str(n),
        "dim": str(D),
        "vectors": str(3 * count),
        "perturbation_sums": " ".join(repr(s) for s in sums),
        "full_spark": "verified" if check_spark else "not-checked (budget)",
    }
    try:
        info["complement_property"] = complement_property(Frame(pooled), tol, cfg).verdict.value
    except SubsetBudgetExceeded:
        info["complement_property"] = "not-checked (budget)"
    return U, info


def three_riesz_blocks(levels: int, seed: int = 0, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> ThreeRieszResult:
    """Three sequences, each a Riesz sequence, whose union does phase retrieval level by level.

    Level n lives in H_n = span{e_1, ..., e_{3^(n+1)}} and holds, for each
    j = 1, 2, 3, perturbations u_{nij} of e_i for i = 3^n + 1 .. 3^(n+1)
    with sum_i ||u_{nij} - e_i||^2 = 0.9 / 2^(n+1).  Full spark and the
    complement property of the pooled level are checked when the subset
    budget allows; the status is reported per level.
    """
    if levels < 1:
        raise ValueError("three_riesz_blocks needs levels >= 1")
    blocks, infos = [], []
    for n in range(1, levels + 1):
        U, info = _riesz_level(n, seed, tol, cfg)
        blocks.append(U)
        infos.append(info)
    sizes = [U.shape[1] for U in blocks]

    def family(j: int) -> SequenceFamily:
        def gen(k: int) -> SequenceVector:
            for U in blocks:
                if k <= U.shape[1]:
                    return SequenceVector(U[j, k - 1])
                k -= U.shape[1]
            raise IndexError("index beyond the last level")

        return SequenceFamily(
            gen,
            f"Riesz sequence j={j + 1} of the three-block construction",
            kind="three-riesz",
            params={"levels": levels, "j": j + 1, "seed": seed},
            size=sum(sizes),
            prefix_count=lambda N: sum(s for s, U in zip(sizes, blocks) if U.shape[2] <= N),
        )

    frames = tuple(Frame(U.reshape(-1, U.shape[2])) for U in blocks)
    return ThreeRieszResult((family(0), family(1), family(2)), infos, frames)


# --------------------------------------------------------------------------
# nested unions


@dataclass(frozen=True, eq=False)
class NestedUnionResult:
    family: SequenceFamily
    checks: list[dict[str, str]]


def nested_union(
    per_level: Sequence[Frame],
    verify_levels: int | None = None,
    tol: Tolerance = DEFAULT_TOL,
    cfg: SearchConfig = DEFAULT_CONFIG,
) -> NestedUnionResult:
    """Union of frames doing phase retrieval in nested coordinate spaces.

    Each frame must do phase retrieval in its own dimension (else
    :class:`LevelNotPR`) and dimensions must not decrease.  Truncating to
    dimension n_k with levels 1..k is checked with the complement property
    for the first ``verify_levels`` k (all levels by default).
    """
    if not per_level:
        raise ValueError("nested_union needs at least one level")
    dims = [f.dim for f in per_level]
    if any(a > b for a, b in zip(dims, dims[1:])):
        raise DimensionMismatch(f"level dimensions must be nondecreasing, got {dims}")
    for k, f in enumerate(per_level):
        if phase_retrieval(f, tol, cfg).verdict is not Verdict.HOLDS:
            raise LevelNotPR(f"level {k + 1} ({f.m} vectors in R^{f.dim}) does not do phase retrieval")
    sizes = [f.m for f in per_level]
    frames = list(per_level)

    def gen(k: int) -> SequenceVector:
        for f in frames:
            if k <= f.m:
                return SequenceVector(f.vectors[k - 1])
            k -= f.m
        raise IndexError("index beyond the last level")

    fam = SequenceFamily(
        gen,
        "nested union of phase retrieval frames",
        kind="nested-union",
        params={"dims": "/".join(map(str, dims))},
        size=sum(sizes),
        prefix_count=lambda N: sum(s for s, d in zip(sizes, dims) if d <= N),
    )
    checks = []
    upto = len(frames) if verify_levels is None else min(verify_levels, len(frames))
    for k in range(1, upto + 1):
        N, K = dims[k - 1], sum(sizes[:k])
        verdict = complement_property(truncate(fam, N, K), tol, cfg).verdict
        checks.append({"level": str(k), "N": str(N), "K": str(K), "complement_property": verdict.value})
        if verdict is not Verdict.HOLDS:
            raise ConstructionFailed(f"nested union fails the complement property at truncation {N}")
    return NestedUnionResult(fam, checks)


# --------------------------------------------------------------------------
# hyperplane trap


def _default_w(j: int) -> float:
    return 2.0 ** (-(j - 1))


@dataclass(frozen=True, eq=False)
class TrapResult:
    X: SequenceFamily
    Y: SequenceFamily
    level_frames: tuple[Frame, ...]
    w: Callable[[int], float]
    correction_index: tuple[int, ...]
    max_inner: float


def hyperplane_trap(
    levels: int,
    w: Callable[[int], float] | Sequence[float] | None = None,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
    cfg: SearchConfig = DEFAULT_CONFIG,
) -> TrapResult:
    """X pools full-spark frames of 2n - 1 vectors in E_n; Y pushes them into w^perp.

    y_{ni} = x_{ni} - (<x_{ni}, w> / w(j)) e_j with j the first index > n
    where w is nonzero.  ``w`` defaults to (1, 1/2, 1/4, ...); a finite
    sequence must be long enough to provide j for every level.
    """
    if levels < 1:
        raise ValueError("hyperplane_trap needs levels >= 1")
    if w is None:
        wf = _default_w
    elif callable(w):
        wf = w
    else:
        arr = np.asarray(w, dtype=float)

        def wf(j: int, arr=arr) -> float:
            return float(arr[j - 1]) if j <= arr.size else 0.0

    frames, ys, js = [], [], []
    worst = 0.0
    for n in range(1, levels + 1):
        j = n + 1
        while wf(j) == 0.0:
            j += 1
            if j > n + 10_000:
                raise ConstructionFailed(f"w has no nonzero coordinate after index {n}")
        f = full_spark_frame(n, 2 * n - 1, seed + n, tol, cfg)
        wv = np.array([wf(i) for i in range(1, j + 1)])
        if np.any(wv[:n] == 0.0):
            raise ConstructionFailed("w must be nonzero on every named coordinate")
        Xp = np.hstack([f.vectors, np.zeros((f.m, j - n))])
        Y = Xp.copy()
        Y[:, j - 1] -= (Xp @ wv) / wf(j)
        wnorm = float(np.linalg.norm(wv))
        rel = np.abs(Y @ wv) / (np.linalg.norm(Y, axis=1) * wnorm)
        worst = max(worst, float(rel.max()))
        if rel.max() > 1e-10:
            raise ConstructionFailed(f"level {n}: correction left |<y, w>| = {rel.max()} relative")
        frames.append(f)
        ys.append(Y)
        js.append(j)

    def pooled(kind_rows, part):
        sizes = [2 * n - 1 for n in range(1, levels + 1)]

        def gen(k: int) -> SequenceVector:
            n, i = _pooled_index(lambda n: 2 * n - 1, range(1, levels + 1), k)
            return SequenceVector(kind_rows[n - 1][i])

        supports = [r.shape[1] for r in kind_rows]
        return SequenceFamily(
            gen,
            f"hyperplane trap, part {part}",
            kind="trap",
            params={"levels": levels, "part": part, "seed": seed},
            size=sum(sizes),
            prefix_count=lambda N: sum(s for s, b in zip(sizes, supports) if b <= N),
        )

    X = pooled([f.vectors for f in frames], "X")
    Yf = pooled(ys, "Y")
    return TrapResult(X, Yf, tuple(frames), wf, tuple(js), worst)


# --------------------------------------------------------------------------
# finitely full spark


@dataclass(frozen=True, eq=False)
class FFSResult:
    frame: Frame
    window: tuple[int, ...]
    k_max: int
    projections_checked: int


def _projections_full_spark(X: np.ndarray, window: Sequence[int], k_max: int, tol: Tolerance) -> int:
    """Check every coordinate projection P_I, I inside the window, |I| <= k_max; return how many."""
    checked = 0
    for size in range(1, k_max + 1):
        for I in itertools.combinations(window, size):
            if not rows_full_spark(np.ascontiguousarray(X[:, [i - 1 for i in I]]), tol):
                return -1
            checked += 1
    return checked


def finitely_full_spark(
    M: int,
    k_max: int = 2,
    seed: int = 0,
    window: Sequence[int] | None = None,
    near_basis: bool = False,
    tol: Tolerance = DEFAULT_TOL,
) -> FFSResult:
    """Greedy x_1..x_M whose coordinate projections onto the window are full spark.

    The window is a set of 1-based coordinates (default 1..max(M, k_max))
    and fixes the support of the vectors.  With ``near_basis`` vector i is
    e_i plus a perturbation with ||x_i - e_i||^2 = 0.5 / 2^i, so the family
    stays a Riesz sequence.
    """
    if M < 1 or k_max < 1:
        raise ValueError("finitely_full_spark needs M >= 1 and k_max >= 1")
    window = tuple(range(1, max(M, k_max) + 1)) if window is None else tuple(sorted(int(i) for i in window))
    D = max(window)
    if near_basis and M > D:
        raise ValueError("near_basis needs M <= the support bound")
    cols = [i - 1 for i in window]
    rows: list[np.ndarray] = []
    checked = 0
    for i in range(1, M + 1):
        for attempt in range(MAX_DRAWS):
            rng = _rng(seed, i, attempt)
            x = np.zeros(D)
            g = rng.standard_normal(len(cols))
            if near_basis:
                x[cols] = g * np.sqrt(0.5 / 2**i) / np.linalg.norm(g)
                x[i - 1] += 1.0
            else:
                x[cols] = g
            cand = np.array(rows + [x])
            checked = _projections_full_spark(cand, window, k_max, tol)
            if checked >= 0:
                rows.append(x)
                break
        else:
            raise ConstructionFailed(f"finitely full spark: vector {i} failed {MAX_DRAWS} draws")
    return FFSResult(Frame(np.array(rows)), window, k_max, checked)


# --------------------------------------------------------------------------
# two Riesz bases


@dataclass(frozen=True, eq=False)
class RieszPairTrial:
    first: Frame
    second: Frame
    sums: tuple[float, float]
    certified: bool
    union_pr: Verdict


def riesz_pair_search(
    N: int,
    s: float = 0.5,
    trials: int = 10,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
    cfg: SearchConfig = DEFAULT_CONFIG,
) -> list[RieszPairTrial]:
    """Seeded draws of two perturbed bases of R^N and the phase retrieval verdict of their union.

    Each basis is e_i + d_i with sum ||d_i||^2 = s, so both are certified
    Riesz bases.  This is a harness for exploring whether two Riesz bases of
    l2 can together do phase retrieval; a finite verdict answers nothing
    about the infinite-dimensional question.
    """
    if N < 1 or trials < 1 or not 0.0 < s < 1.0:
        raise ValueError("riesz_pair_search needs N >= 1, trials >= 1 and 0 < s < 1")
    out = []
    for t in range(trials):
        rng = _rng(seed, N, t)
        pair = []
        for _ in range(2):
            D = rng.standard_normal((N, N))
            pair.append(Frame(np.eye(N) + D * np.sqrt(s) / np.linalg.norm(D)))
        checks = [riesz_bound(f, tol=tol, check_pr=False) for f in pair]
        union = Frame(np.vstack([f.vectors for f in pair]))
        out.append(
            RieszPairTrial(
                pair[0],
                pair[1],
                (checks[0].perturbation_sum, checks[1].perturbation_sum),
                all(c.verdict is Verdict.CERTIFIED_RIESZ for c in checks),
                phase_retrieval(union, tol, cfg).verdict,
            )
        )
    return out


# --------------------------------------------------------------------------
# reconstruction from a sequence header


def _int(params: dict[str, str], key: str, default: int | None = None) -> int:
    if key not in params:
        if default is None:
            raise FormatError(f"sequence header needs parameter {key!r}")
        return default
    try:
        return int(params[key])
    except ValueError:
        raise FormatError(f"parameter {key!r} must be an integer, got {params[key]!r}") from None


def sequence_from_header(kind: str, params: dict[str, str]) -> SequenceFamily:
    """Rebuild a named family from ``seq kind=<kind> params=<...>``."""
    if kind == "canonical":
        return canonical_sequence()
    if kind == "phi":
        return phi_sequence()
    if kind == "pairs":
        return pairs_sequence()
    if kind == "an":
        return an_sequence(_int(params, "levels") if "levels" in params else None)
    if kind == "trap":
        part = params.get("part", "X")
        if part not in ("X", "Y"):
            raise FormatError("trap part must be X or Y")
        res = hyperplane_trap(_int(params, "levels"), seed=_int(params, "seed", 0))
        return res.X if part == "X" else res.Y
    if kind == "three-riesz":
        j = _int(params, "j", 1)
        if j not in (1, 2, 3):
            raise FormatError("three-riesz j must be 1, 2 or 3")
        return three_riesz_blocks(_int(params, "levels"), _int(params, "seed", 0)).families[j - 1]
    if kind == "nested-union":
        try:
            dims = [int(d) for d in params.get("dims", "").split("/") if d]
        except ValueError:
            raise FormatError("nested-union dims must look like 1/2/3") from None
        if not dims:
            raise FormatError("nested-union needs dims")
        seed = _int(params, "seed", 0)
        frames = [full_spark_frame(d, 2 * d - 1, seed + k) for k, d in enumerate(dims)]
        fam = nested_union(frames, verify_levels=0).family
        return SequenceFamily(fam.generator, fam.description, kind="nested-union", params={"dims": params["dims"], "seed": seed}, size=fam.size, prefix_count=fam.prefix_count)
    if kind == "ffs":
        res = finitely_full_spark(_int(params, "M"), _int(params, "k_max", 2), _int(params, "seed", 0))
        rows = res.frame.vectors
        return SequenceFamily(
            lambda k: SequenceVector(rows[k - 1]),
            "finitely full spark prefix",
            kind="ffs",
            params=params,
            size=rows.shape[0],
            prefix_count=lambda N: rows.shape[0] if N >= rows.shape[1] else 0,
        )
    raise FormatError(f"unknown sequence kind {kind!r}")


def header_for(s: SequenceFamily) -> str:
    return format_seq_header(s.kind, s.params)
