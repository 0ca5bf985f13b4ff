"""Exact decision procedures over index partitions of a finite frame.

Every partition (I, I^c) is visited with index 0 fixed in I.  The search is a
depth-first walk that assigns indices 1..m-1 in order (I before I^c) and
abandons a branch as soon as the monotone "good side" test succeeds for one
of the two partial sides, since adding vectors never undoes it.  Every node
visited counts against ``SearchConfig.subset_budget``.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from functools import lru_cache
from math import ceil, comb
from typing import Callable, Iterator

import numpy as np

from ..errors import DegenerateWitness, DimensionMismatch, NotSpanning, SubsetBudgetExceeded
from ..linalg import (
    DEFAULT_TOL,
    Tolerance,
    canonical_sign,
    full_rank_mask,
    iter_combinations,
    nullspace_basis,
    numerical_rank,
)
from ..model import CertificateKind, Frame, PairCertificate, PartitionWitness


class Verdict(str, enum.Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    HOLDS_PROBABLE = "HOLDS-probable"
    CERTIFIED_RIESZ = "CERTIFIED-RIESZ"
    NOT_CERTIFIED = "NOT-CERTIFIED"
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    restarts: int = 32
    max_iters: int = 200
    sample_count: int = 64
    subset_budget: int = 2**25

    def __post_init__(self):
        for name in ("restarts", "max_iters", "sample_count", "subset_budget"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


DEFAULT_CONFIG = SearchConfig()


@dataclass(frozen=True)
class SparkResult:
    spark: int
    witness_subset: tuple[int, ...] | None
    full_spark: bool


@dataclass(frozen=True)
class Decision:
    """A verdict plus whatever witness backs it."""

    verdict: Verdict
    partition: PartitionWitness | None = None
    certificate: PairCertificate | None = None
    info: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict in (Verdict.HOLDS, Verdict.HOLDS_PROBABLE, Verdict.ACCEPT, Verdict.CERTIFIED_RIESZ)


# --------------------------------------------------------------------------
# spark


def _first_dependent(A: np.ndarray, k: int, tol: Tolerance) -> tuple[int, ...] | None:
    """Lexicographically first k-subset of rows that is not full rank."""
    for chunk in iter_combinations(A.shape[0], k):
        ok = full_rank_mask(A[chunk], tol)
        bad = np.flatnonzero(~ok)
        if bad.size:
            return tuple(int(i) for i in chunk[bad[0]])
    return None


@lru_cache(maxsize=512)
def _all_square_subsets_full_rank(data: bytes, shape: tuple[int, int], rank_rel: float, cert_abs: float) -> bool:
    A = np.frombuffer(data, dtype=float).reshape(shape)
    return _first_dependent(A, shape[1], Tolerance(rank_rel, cert_abs)) is None


def rows_full_spark(A: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True when every min(m, n) rows of ``A`` are linearly independent."""
    A = np.ascontiguousarray(A, dtype=float)
    m, n = A.shape
    if m <= n:
        return numerical_rank(A, tol) == m
    return _all_square_subsets_full_rank(A.tobytes(), A.shape, tol.rank_rel, tol.cert_abs)


def spark(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> SparkResult:
    """Size of the smallest dependent subfamily (m + 1 if there is none).

    The witness is the lexicographically smallest minimal dependent subset.
    All min(m, n)-subsets are screened first; only when one of them is
    dependent are the smaller sizes searched.
    """
    A = f.vectors
    m, n = A.shape
    if m > n and comb(m, n + 1) > cfg.subset_budget:
        raise SubsetBudgetExceeded(comb(m, n + 1), cfg.subset_budget, "spark (n+1)-subsets")
    k0 = min(m, n)
    if rows_full_spark(A, tol):
        if m > n:
            return SparkResult(n + 1, tuple(range(n + 1)), True)
        return SparkResult(m + 1, None, True)
    for k in range(1, k0 + 1):
        dep = _first_dependent(A, k, tol)
        if dep is not None:
            return SparkResult(k, dep, False)
    raise AssertionError("a dependent min(m, n)-subset was detected but not found again")


# --------------------------------------------------------------------------
# partition search


class _Budget:
    def __init__(self, budget: int, what: str):
        self.budget = budget
        self.what = what
        self.used = 0

    def tick(self):
        self.used += 1
        if self.used > self.budget:
            raise SubsetBudgetExceeded(self.used, self.budget, self.what)


def _side_test(A: np.ndarray, tol: Tolerance, min_size: int) -> Callable[[list[int]], bool]:
    """Monotone side test: spans R^n and has at least ``min_size`` vectors."""
    n = A.shape[1]

    def ok(S: list[int]) -> bool:
        return len(S) >= min_size and numerical_rank(A[S], tol) == n

    return ok


def _walk(m: int, side_ok: Callable[[list[int]], bool], budget: _Budget) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Yield, in canonical order, every partition where neither side is good."""
    I: list[int] = [0]
    Ic: list[int] = []

    def rec(pos: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        budget.tick()
        if pos == m:
            yield tuple(I), tuple(Ic)
            return
        I.append(pos)
        if not side_ok(I):
            yield from rec(pos + 1)
        I.pop()
        Ic.append(pos)
        if not side_ok(Ic):
            yield from rec(pos + 1)
        Ic.pop()

    budget.tick()
    if side_ok(I):
        return
    yield from rec(1)


def _witness(A: np.ndarray, I: tuple[int, ...], Ic: tuple[int, ...], tol: Tolerance) -> PartitionWitness:
    return PartitionWitness(I, Ic, numerical_rank(A[list(I)], tol), numerical_rank(A[list(Ic)], tol) if Ic else 0)


def _full_spark_block(A: np.ndarray, tol: Tolerance, cfg: SearchConfig) -> tuple[int, ...] | None:
    """A full-spark block of 2n-1 vectors, which forces the complement property.

    Tries the last 2n-1 vectors, then the first 2n-1.  Any partition of such a
    block leaves n of its vectors on one side, and n vectors of a full-spark
    block span.
    """
    m, n = A.shape
    size = 2 * n - 1
    if m < size or comb(size, n) > cfg.subset_budget:
        return None
    for block in (tuple(range(m - size, m)), tuple(range(size))):
        if rows_full_spark(A[list(block)], tol):
            return block
    return None


def failing_partitions(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG, min_extra: int = 0) -> Iterator[PartitionWitness]:
    """Partitions in which no side spans R^n with at least ``n + min_extra`` vectors.

    ``min_extra = 0`` gives complement-property failures, ``1`` overcomplete
    complement-property failures, ``k`` obstructions to a k-lift.
    """
    A = f.vectors
    m, n = A.shape
    budget = _Budget(cfg.subset_budget, "partition search")
    for I, Ic in _walk(m, _side_test(A, tol, n + min_extra), budget):
        yield _witness(A, I, Ic, tol)


def _quick_cp(f: Frame, tol: Tolerance, cfg: SearchConfig) -> tuple[str, object] | None:
    A = f.vectors
    m, n = A.shape
    if numerical_rank(A, tol) < n:
        return "fails", _witness(A, tuple(range(m)), (), tol)
    block = _full_spark_block(A, tol, cfg)
    if block is not None:
        return "holds", block
    return None


def complement_property(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> Decision:
    """HOLDS iff every partition has a side spanning R^n."""
    quick = _quick_cp(f, tol, cfg)
    if quick is not None:
        kind, data = quick
        if kind == "fails":
            return Decision(Verdict.FAILS, partition=data)
        return Decision(Verdict.HOLDS, info={"full_spark_block": data})
    for w in failing_partitions(f, tol, cfg):
        return Decision(Verdict.FAILS, partition=w)
    return Decision(Verdict.HOLDS)


def validate_partition(f: Frame, w: PartitionWitness, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Independent re-check of a complement-property failure witness.

    Ranks are recomputed at twice the working rank tolerance; both sides must
    stay below full rank and the two index sets must partition the frame.
    """
    if sorted(w.subset + w.complement) != list(range(f.m)):
        return False
    loose = Tolerance(min(2 * tol.rank_rel, 0.5), tol.cert_abs)
    n = f.dim
    for side in (w.subset, w.complement):
        if side and numerical_rank(f.vectors[list(side)], loose) >= n:
            return False
    return True


# --------------------------------------------------------------------------
# phase retrieval


def _null(A: np.ndarray, S: tuple[int, ...], tol: Tolerance) -> np.ndarray:
    return nullspace_basis(A[list(S)], tol, cols=A.shape[1])


def _pr_pair(A: np.ndarray, w: PartitionWitness, tol: Tolerance) -> tuple[np.ndarray, np.ndarray]:
    """Unit u, v with u orthogonal to span_I and v orthogonal to span_{I^c}, chosen as far from parallel as possible."""
    NI = _null(A, w.subset, tol)
    NIc = _null(A, w.complement, tol)
    if NIc.shape[1] >= 2:
        u = NI[:, 0]
        v = NIc @ nullspace_basis((u @ NIc)[None, :], tol)[:, 0]
    elif NI.shape[1] >= 2:
        v = NIc[:, 0]
        u = NI @ nullspace_basis((v @ NI)[None, :], tol)[:, 0]
    else:
        u, v = NI[:, 0], NIc[:, 0]
    u = canonical_sign(u / np.linalg.norm(u))
    v = canonical_sign(v / np.linalg.norm(v))
    return u, v


def certify_counterexample(f: Frame, c: PairCertificate, tol: Tolerance = DEFAULT_TOL) -> Decision:
    """ACCEPT iff x != +-y and |<x, x_i>| = |<y, x_i>| for every i, both within cert_abs."""
    if c.x.shape != (f.dim,):
        raise DimensionMismatch(f"certificate lives in R^{c.x.size}, frame in R^{f.dim}")
    sep = float(min(np.linalg.norm(c.x - c.y), np.linalg.norm(c.x + c.y)))
    gap = float(np.max(np.abs(np.abs(f.vectors @ c.x) - np.abs(f.vectors @ c.y))))
    ok = sep > tol.cert_abs and gap <= tol.cert_abs
    return Decision(Verdict.ACCEPT if ok else Verdict.REJECT, certificate=c, info={"separation": sep, "max_gap": gap})


def phase_retrieval(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> Decision:
    """Real phase retrieval, decided through the complement property.

    On failure the certificate is x = (u+v)/2, y = (u-v)/2 built from null
    vectors of the two sides of a failing partition; it is checked with
    :func:`certify_counterexample` before being returned.
    """
    A = f.vectors
    quick = _quick_cp(f, tol, cfg)
    if quick is not None and quick[0] == "holds":
        return Decision(Verdict.HOLDS, info={"full_spark_block": quick[1]})
    candidates = [quick[1]] if quick is not None else []
    tried = 0

    def partitions():
        yield from candidates
        yield from failing_partitions(f, tol, cfg)

    for w in partitions():
        tried += 1
        u, v = _pr_pair(A, w, tol)
        x, y = (u + v) / 2, (u - v) / 2
        if min(np.linalg.norm(x), np.linalg.norm(y)) <= tol.cert_abs:
            # u = +-v annihilates every vector, so u and 2u are indistinguishable
            x, y = u, 2 * u
        # Rescaling x and y together keeps the ratio gap / separation; shrink
        # them when rounding or negligible vectors push the gap past cert_abs.
        scale = 1.0
        for _ in range(8):
            cert = PairCertificate(scale * x, scale * y, CertificateKind.PR_COUNTEREXAMPLE)
            check = certify_counterexample(f, cert, tol)
            if check.verdict is Verdict.ACCEPT:
                return Decision(Verdict.FAILS, partition=w, certificate=cert, info={"u": u, "v": v, "scale": scale})
            gap, sep = check.info["max_gap"], check.info["separation"]
            if gap <= tol.cert_abs or sep <= tol.cert_abs:
                break
            scale *= min(0.5, tol.cert_abs / (4 * gap))
    if tried:
        raise DegenerateWitness(
            f"none of {tried} failing partitions gave a certificate within cert_abs; "
            "the frame mixes scales that the relative rank cutoff treats as negligible"
        )
    return Decision(Verdict.HOLDS)


# --------------------------------------------------------------------------
# norm retrieval


def _cross_norm(NI: np.ndarray, NIc: np.ndarray) -> float:
    if NI.shape[1] == 0 or NIc.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(NI.T @ NIc, 2))


def certify_norm_counterexample(f: Frame, c: PairCertificate, tol: Tolerance = DEFAULT_TOL) -> Decision:
    """ACCEPT iff x, y have equal frame measurements (within cert_abs) but different norms."""
    if c.x.shape != (f.dim,):
        raise DimensionMismatch(f"certificate lives in R^{c.x.size}, frame in R^{f.dim}")
    gap = float(np.max(np.abs(np.abs(f.vectors @ c.x) - np.abs(f.vectors @ c.y))))
    norm_gap = float(abs(np.linalg.norm(c.x) - np.linalg.norm(c.y)))
    ok = gap <= tol.cert_abs and norm_gap > tol.cert_abs
    return Decision(Verdict.ACCEPT if ok else Verdict.REJECT, certificate=c, info={"max_gap": gap, "norm_gap": norm_gap})


def norm_retrieval(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> Decision:
    """Exact norm-retrieval decision.

    HOLDS iff for every partition the null spaces of the two sides are
    orthogonal, i.e. the cross-Gram block N_I^T N_Ic vanishes.  Sub-partitions
    have smaller null spaces, so a branch is closed as soon as its partial
    cross-Gram block is below cert_abs in spectral norm.
    """
    A = f.vectors
    m, n = A.shape
    quick = _quick_cp(f, tol, cfg)
    if quick is not None and quick[0] == "holds":
        return Decision(Verdict.HOLDS, info={"full_spark_block": quick[1]})
    budget = _Budget(cfg.subset_budget, "norm-retrieval partition search")
    I: list[int] = [0]
    Ic: list[int] = []

    def rec(pos: int, NI: np.ndarray, NIc: np.ndarray):
        budget.tick()
        if _cross_norm(NI, NIc) <= tol.cert_abs:
            return None
        if pos == m:
            return tuple(I), tuple(Ic), NI, NIc
        I.append(pos)
        found = rec(pos + 1, _null(A, tuple(I), tol), NIc)
        I.pop()
        if found:
            return found
        Ic.append(pos)
        found = rec(pos + 1, NI, _null(A, tuple(Ic), tol))
        Ic.pop()
        return found

    found = rec(1, _null(A, (0,), tol), np.eye(n))
    if found is None:
        return Decision(Verdict.HOLDS)
    Is, Ics, NI, NIc = found
    U, s, Vt = np.linalg.svd(NI.T @ NIc)
    u = canonical_sign(NI @ U[:, 0])
    v = canonical_sign(NIc @ Vt[0])
    cert = PairCertificate((u + v) / 2, (u - v) / 2, CertificateKind.NR_COUNTEREXAMPLE)
    w = _witness(A, Is, Ics, tol)
    return Decision(Verdict.FAILS, partition=w, certificate=cert, info={"u": u, "v": v, "inner": float(u @ v)})


# --------------------------------------------------------------------------
# overcomplete complement property and lifting


def overcomplete_cp(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> Decision:
    """HOLDS iff every partition has a side that spans and is linearly dependent."""
    for w in failing_partitions(f, tol, cfg, min_extra=1):
        return Decision(Verdict.FAILS, partition=w)
    return Decision(Verdict.HOLDS)


def lifting_number(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> int:
    """min{|S| - n : S spans R^n and |S| >= |S^c|}.

    Sizes are tried upward from max(n, ceil(m/2)); the first size holding a
    spanning subset gives the answer.
    """
    A = f.vectors
    m, n = A.shape
    if numerical_rank(A, tol) < n:
        raise NotSpanning("the frame does not span R^n; the lifting number is undefined")
    used = 0
    for k in range(max(n, ceil(m / 2)), m + 1):
        used += comb(m, k)
        if used > cfg.subset_budget:
            raise SubsetBudgetExceeded(used, cfg.subset_budget, "lifting-number subsets")
        for chunk in iter_combinations(m, k):
            if full_rank_mask(A[chunk], tol).any():
                return k - n
    raise AssertionError("the whole frame spans, so some majority subset must")


def lift_capacity(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> int:
    """Largest k such that every partition has a spanning side with >= n + k vectors.

    This is exactly the number of coordinates a generic lift can append while
    keeping the complement property; -1 when the complement property fails.
    """
    n = f.dim
    k = -1
    while k + 1 <= f.m - n:
        if next(failing_partitions(f, tol, cfg, min_extra=k + 1), None) is not None:
            break
        k += 1
    return k


# --------------------------------------------------------------------------
# whole-frame analysis


def _partition_fields(source: str, w: PartitionWitness) -> dict[str, str]:
    return {"source": source, **w.as_fields()}


def analyze(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG, timed: bool = False):
    """Run all six frame verdicts and collect their witnesses into a report.

    Wall-clock timings are only recorded with ``timed``, so the default
    report is a pure function of (frame, tolerances, config).
    """
    from ..model import AnalysisReport

    verdicts: dict[str, str] = {}
    witnesses: list[dict[str, str]] = []
    timings: dict[str, float] = {}

    def run(key, fn):
        start = time.perf_counter()
        out = fn(f, tol, cfg)
        if timed:
            timings[key] = time.perf_counter() - start
        return out

    sp = run("spark", spark)
    verdicts["spark"] = str(sp.spark)
    if sp.witness_subset is not None:
        witnesses.append({"source": "spark", "kind": "dependent-subset", "subset": " ".join(map(str, sp.witness_subset))})

    cp = run("complement_property", complement_property)
    verdicts["complement_property"] = cp.verdict.value
    if cp.partition is not None:
        witnesses.append(_partition_fields("complement_property", cp.partition))

    pr = run("phase_retrieval", phase_retrieval)
    verdicts["phase_retrieval"] = pr.verdict.value
    if pr.certificate is not None:
        witnesses.append({"source": "phase_retrieval", **pr.certificate.as_fields(), "subset": " ".join(map(str, pr.partition.subset))})

    nr = run("norm_retrieval", norm_retrieval)
    verdicts["norm_retrieval"] = nr.verdict.value
    if nr.certificate is not None:
        witnesses.append({"source": "norm_retrieval", **nr.certificate.as_fields(), "subset": " ".join(map(str, nr.partition.subset))})

    ocp = run("overcomplete_cp", overcomplete_cp)
    verdicts["overcomplete_cp"] = ocp.verdict.value
    if ocp.partition is not None:
        witnesses.append(_partition_fields("overcomplete_cp", ocp.partition))

    try:
        verdicts["lifting_number"] = str(run("lifting_number", lifting_number))
    except NotSpanning:
        verdicts["lifting_number"] = "undefined"

    config = {"n": str(f.dim), "m": str(f.m), "subset_budget": str(cfg.subset_budget)}
    if f.zero_indices:
        config["zero_vectors"] = " ".join(map(str, f.zero_indices))
    return AnalysisReport(verdicts=verdicts, witnesses=witnesses, tolerances=tol, seed=cfg.seed, timings=timings, config=config)
