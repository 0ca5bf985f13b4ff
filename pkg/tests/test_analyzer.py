from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from frameforge.analyzer import (
    Decision,
    SearchConfig,
    Verdict,
    analyze,
    certify_counterexample,
    certify_norm_counterexample,
    complement_property,
    failing_partitions,
    lift_capacity,
    lifting_number,
    norm_retrieval,
    overcomplete_cp,
    phase_retrieval,
    rows_full_spark,
    spark,
    validate_partition,
)
from frameforge.constructors import full_spark_frame, pairs_family
from frameforge.errors import DegenerateWitness, DimensionMismatch, NotSpanning, SubsetBudgetExceeded
from frameforge.model import VERDICT_KEYS, CertificateKind, Frame, PairCertificate, PartitionWitness

E2 = Frame.from_vectors([(1, 0), (0, 1)])
FS3 = Frame.from_vectors([(1, 0), (0, 1), (1, 1)])

int_frames = st.tuples(st.integers(1, 4), st.integers(1, 9)).flatmap(
    lambda s: arrays(float, (s[1], s[0]), elements=st.integers(-2, 2).map(float))
)
seeds = st.integers(0, 2**32 - 1)


def gaussian(seed: int, m: int, n: int) -> Frame:
    return Frame(np.random.default_rng(seed).standard_normal((m, n)))


# spark


def test_spark_examples():
    r = spark(FS3)
    assert (r.spark, r.full_spark, r.witness_subset) == (3, True, (0, 1, 2))
    r = spark(E2)
    assert (r.spark, r.full_spark, r.witness_subset) == (3, True, None)
    r = spark(Frame.from_vectors([(1, 0), (2, 0)]))
    assert (r.spark, r.full_spark, r.witness_subset) == (2, False, (0, 1))


@given(int_frames)
def test_spark_matches_brute_force(A):
    r = spark(Frame(A))
    assert r.spark == oracles.brute_spark(A)
    if r.witness_subset is not None:
        S = list(r.witness_subset)
        assert oracles.exact_rank(A[S].astype(int).tolist()) < len(S)
        for T in itertools.combinations(S, len(S) - 1):
            assert oracles.exact_rank(A[list(T)].astype(int).tolist()) == len(T)


def test_spark_budget():
    with pytest.raises(SubsetBudgetExceeded) as exc:
        spark(gaussian(0, 20, 6), cfg=SearchConfig(subset_budget=100))
    assert exc.value.needed > exc.value.budget == 100


def test_rows_full_spark():
    assert rows_full_spark(FS3.vectors)
    assert not rows_full_spark(np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]]))
    assert rows_full_spark(np.array([[1.0, 0.0, 0.0]]))


# complement property and phase retrieval


def test_complement_property_examples():
    assert complement_property(FS3).verdict is Verdict.HOLDS
    d = complement_property(E2)
    assert d.verdict is Verdict.FAILS
    assert (d.partition.subset, d.partition.complement) == ((0,), (1,))
    assert (d.partition.rank_I, d.partition.rank_Ic) == (1, 1)


def test_pairs_four_documented_partition():
    f = pairs_family(4)
    d = complement_property(f)
    assert d.verdict is Verdict.FAILS and validate_partition(f, d.partition)
    # pairs avoiding coordinate 1 against pairs through it (lex order)
    I = tuple(k for k, label in enumerate(f.labels) if not label.startswith("1,"))
    Ic = tuple(k for k in range(f.m) if k not in I)
    assert I == (3, 4, 5)
    assert oracles.exact_rank(f.vectors[list(I)]) == 3 and oracles.exact_rank(f.vectors[list(Ic)]) == 3
    assert validate_partition(f, PartitionWitness(I, Ic, 3, 3))


def test_phase_retrieval_examples():
    assert phase_retrieval(FS3).verdict is Verdict.HOLDS
    d = phase_retrieval(E2)
    assert d.verdict is Verdict.FAILS
    assert d.certificate.x.tolist() == [0.5, 0.5]
    assert d.certificate.y.tolist() == [-0.5, 0.5]
    for n in range(2, 6):
        assert phase_retrieval(Frame(np.eye(n))).verdict is Verdict.FAILS


def test_certify_examples():
    cert = PairCertificate([0.5, 0.5], [-0.5, 0.5], CertificateKind.PR_COUNTEREXAMPLE)
    assert certify_counterexample(E2, cert).verdict is Verdict.ACCEPT
    same = PairCertificate([0.5, 0.5], [0.5, 0.5], CertificateKind.PR_COUNTEREXAMPLE)
    assert certify_counterexample(E2, same).verdict is Verdict.REJECT
    neg = PairCertificate([0.5, 0.5], [-0.5, -0.5], CertificateKind.PR_COUNTEREXAMPLE)
    assert certify_counterexample(E2, neg).verdict is Verdict.REJECT
    p5 = pairs_family(5)
    deleted = p5.without(p5.labels.index("1,2"))
    pair = PairCertificate([1, 1, 0, 0, 0], [1, -1, 0, 0, 0], CertificateKind.PR_COUNTEREXAMPLE)
    d = certify_counterexample(deleted, pair)
    assert d.verdict is Verdict.ACCEPT and d.info["max_gap"] == 0.0
    assert certify_counterexample(p5, pair).verdict is Verdict.REJECT
    with pytest.raises(DimensionMismatch):
        certify_counterexample(FS3, PairCertificate([1, 0, 0], [0, 1, 0], CertificateKind.PR_COUNTEREXAMPLE))


@settings(max_examples=120)
@given(int_frames)
def test_pr_equals_brute_force_cp(A):
    f = Frame(A)
    holds, bad = oracles.brute_cp(A)
    d = phase_retrieval(f)
    assert d.holds == holds == complement_property(f).holds
    if not holds:
        assert certify_counterexample(f, d.certificate).verdict is Verdict.ACCEPT
        mask = sum(1 << i for i in d.partition.subset)
        assert mask in bad


@given(int_frames)
def test_failing_partitions_are_exactly_the_oracle_ones(A):
    f = Frame(A)
    _, bad = oracles.brute_cp(A)
    m = f.m
    expected = {s for s in bad if s & 1}
    found = set()
    for w in failing_partitions(f):
        assert validate_partition(f, w)
        found.add(sum(1 << i for i in w.subset))
    # the walk prunes extensions of a failing side, so it reports a subset of them
    assert found <= expected
    assert bool(found) == bool(expected)
    assert all(s < 2**m for s in found)


@given(int_frames, seeds)
def test_scaling_invariance(A, seed):
    f = Frame(A)
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.1, 10.0, f.m) * rng.choice([-1.0, 1.0], f.m)
    g = f.scaled(a)
    for fn in (phase_retrieval, complement_property, norm_retrieval, overcomplete_cp):
        assert fn(f).verdict is fn(g).verdict
    assert spark(f).spark == spark(g).spark


@given(int_frames, seeds)
def test_invertible_map_invariance_of_pr(A, seed):
    f = Frame(A)
    T = oracles.well_conditioned(np.random.default_rng(seed), f.dim)
    assert phase_retrieval(f).verdict is phase_retrieval(f.map(T)).verdict


@given(int_frames)
def test_pr_implies_nr(A):
    f = Frame(A)
    if phase_retrieval(f).holds:
        assert norm_retrieval(f).holds


@given(st.integers(2, 5), st.data())
def test_fewer_than_2n_minus_1_vectors_never_hold(n, data):
    m = data.draw(st.integers(1, 2 * n - 2))
    seed = data.draw(seeds)
    assert not phase_retrieval(gaussian(seed, m, n)).holds


@given(st.integers(1, 5), seeds)
def test_generic_2n_minus_1_vectors_hold(n, seed):
    f = gaussian(seed, 2 * n - 1, n)
    assert spark(f).full_spark
    assert phase_retrieval(f).verdict is Verdict.HOLDS


def test_zero_vectors_and_degenerate_witness():
    f = Frame.from_vectors([(0.0,), (0.0,)])
    d = phase_retrieval(f)
    assert d.verdict is Verdict.FAILS
    assert certify_counterexample(f, d.certificate).verdict is Verdict.ACCEPT
    with pytest.raises(DegenerateWitness):
        # a vector below the relative rank cutoff next to huge ones cannot be certified absolutely
        phase_retrieval(Frame.from_vectors([(0.5, 1.7e11), (2.7e-15, 2.9e11), (1.1e11, 0.0)]))


def test_large_scale_certificates_are_rescaled():
    f = Frame.from_vectors([(-937436296820.8651, -886326413280.4893), (757596515038.3035, 895724414667.8792)])
    d = phase_retrieval(f)
    assert d.info["scale"] < 1.0
    assert certify_counterexample(f, d.certificate).verdict is Verdict.ACCEPT


def test_partition_budget():
    # zero vectors at both ends defeat the full-spark shortcut, so the walk runs
    A = np.vstack([np.zeros((3, 4)), gaussian(1, 7, 4).vectors, np.zeros((3, 4))])
    f = Frame(A)
    assert phase_retrieval(f).verdict is Verdict.HOLDS
    for fn in (phase_retrieval, norm_retrieval):
        with pytest.raises(SubsetBudgetExceeded):
            fn(f, cfg=SearchConfig(subset_budget=50))


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(restarts=0)
    with pytest.raises(ValueError):
        SearchConfig(seed=-1)


def test_validate_partition_rejects_bad_witnesses():
    assert not validate_partition(FS3, PartitionWitness((0,), (1, 2), 1, 2))
    assert not validate_partition(E2, PartitionWitness((0,), (0, 1), 1, 1))


# norm retrieval


def test_norm_retrieval_examples():
    assert norm_retrieval(Frame(np.eye(3))).verdict is Verdict.HOLDS
    f = Frame.from_vectors([(1, 0), (1 / np.sqrt(2), 1 / np.sqrt(2))])
    d = norm_retrieval(f)
    assert d.verdict is Verdict.FAILS
    assert abs(abs(d.info["inner"]) - 1 / np.sqrt(2)) < 1e-12
    assert certify_norm_counterexample(f, d.certificate).verdict is Verdict.ACCEPT
    for seed in range(100):
        g = gaussian(seed, 5, 3)
        assert norm_retrieval(g).verdict is Verdict.HOLDS


@settings(max_examples=100)
@given(int_frames, seeds)
def test_norm_retrieval_matches_sampler(A, seed):
    f = Frame(A)
    d = norm_retrieval(f)
    assert d.holds == oracles.sampled_nr(A, np.random.default_rng(seed), pairs=200)
    if not d.holds:
        assert certify_norm_counterexample(f, d.certificate).verdict is Verdict.ACCEPT


def test_norm_retrieval_is_not_invariant_under_invertible_maps():
    # an orthonormal basis does norm retrieval, a skewed basis does not
    assert norm_retrieval(E2).holds
    T = np.array([[1.0, 0.5], [0.0, 1.0]])
    assert norm_retrieval(E2.map(T)).verdict is Verdict.FAILS


# overcomplete CP and lifting


def brute_lifting_number(A: np.ndarray) -> int:
    m, n = A.shape
    best = None
    for k in range(1, m + 1):
        for S in itertools.combinations(range(m), k):
            if 2 * k >= m and np.linalg.matrix_rank(A[list(S)]) == n:
                best = k - n if best is None else min(best, k - n)
    return best


def brute_capacity(A: np.ndarray) -> int:
    m, n = A.shape
    ranks = oracles.subset_ranks(A)
    full = (1 << m) - 1

    def spans(s, extra):
        return ranks[s] == n and bin(s).count("1") >= n + extra

    k = -1
    while k + 1 <= m - n and all(spans(s, k + 1) or spans(full ^ s, k + 1) for s in range(2**m)):
        k += 1
    return k


def test_overcomplete_cp_examples():
    d = overcomplete_cp(FS3)
    assert d.verdict is Verdict.FAILS
    assert overcomplete_cp(full_spark_frame(2, 5)).verdict is Verdict.HOLDS
    assert overcomplete_cp(E2).verdict is Verdict.FAILS


def test_lifting_number_examples():
    assert lifting_number(full_spark_frame(2, 5)) == 1
    assert lifting_number(full_spark_frame(2, 7)) == 2
    assert lifting_number(FS3) == 0
    with pytest.raises(NotSpanning):
        lifting_number(Frame.from_vectors([(1, 0), (2, 0)]))


def test_lifting_number_differs_from_capacity():
    # spanning majority {e1, e2, e1+e2} gives L = 1, yet {e1, e1, e1} | {e2, e1+e2} has no dependent spanning side
    f = Frame.from_vectors([(1, 0), (1, 0), (1, 0), (0, 1), (1, 1)])
    assert lifting_number(f) == 1
    assert overcomplete_cp(f).verdict is Verdict.FAILS
    assert lift_capacity(f) == 0


@given(int_frames)
def test_lifting_number_and_capacity_match_brute_force(A):
    f = Frame(A)
    if np.linalg.matrix_rank(A) < f.dim:
        with pytest.raises(NotSpanning):
            lifting_number(f)
    else:
        assert lifting_number(f) == brute_lifting_number(A)
    cap = lift_capacity(f)
    assert cap == brute_capacity(A)
    assert (cap >= 0) == complement_property(f).holds
    assert (cap >= 1) == overcomplete_cp(f).holds


# whole-frame reports


def test_analyze_keys_and_witnesses():
    r = analyze(E2)
    assert tuple(r.verdicts) == VERDICT_KEYS
    assert r.failing_without_witness() == []
    assert r.timings == {}
    assert set(analyze(E2, timed=True).timings) == set(VERDICT_KEYS)
    r = analyze(Frame.from_vectors([(1, 0), (0, 0)]))
    assert r.verdicts["lifting_number"] == "undefined"
    assert r.config["zero_vectors"] == "1"


def test_decision_holds_property():
    assert Decision(Verdict.HOLDS).holds
    assert not Decision(Verdict.FAILS).holds
