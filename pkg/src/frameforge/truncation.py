"""Finite-level checks of statements about l2 families.

A family is truncated to its first N coordinates and first K members and the
resulting frame is analysed.  Verdicts are reported per level and never
extrapolated; when a finite verdict disagrees with the claim the caller tags
the family with, the level carries a divergence note instead of an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .analyzer import (
    DEFAULT_CONFIG,
    Decision,
    SearchConfig,
    Verdict,
    certify_counterexample,
    complement_property,
    norm_retrieval,
    phase_retrieval,
)
from .errors import IndexOutOfRange
from .linalg import DEFAULT_TOL, Tolerance
from .model import AnalysisReport, CertificateKind, Frame, PairCertificate, SequenceFamily, format_seq_header, truncate

__all__ = ["CLAIMS", "DEFAULT_SCHEDULE", "LevelReport", "verify_levels", "levels_report", "deletion_test"]

CLAIMS = ("pr-holds", "pr-fails")
DEFAULT_SCHEDULE = (4, 6, 8, 12, 16)


@dataclass(frozen=True)
class LevelReport:
    level: int
    vector_count: int
    verdicts: dict[str, str]
    witnesses: list[dict[str, str]] = field(default_factory=list)
    divergence_note: str | None = None
    zero_vectors: tuple[int, ...] = ()

    def as_fields(self) -> dict[str, str]:
        out = {"N": str(self.level), "K": str(self.vector_count)}
        out.update(self.verdicts)
        for k, w in enumerate(self.witnesses):
            for key, value in w.items():
                out[f"witness{k}_{key}"] = value
        if self.zero_vectors:
            out["zero_vectors"] = " ".join(map(str, self.zero_vectors))
        if self.divergence_note:
            out["divergence"] = self.divergence_note
        return out


def _normalize_levels(s: SequenceFamily, levels: Iterable[int | tuple[int, int]]) -> list[tuple[int, int]]:
    out = []
    for item in levels:
        if isinstance(item, tuple):
            N, K = item
        else:
            if s.prefix_count is None:
                raise ValueError(f"{s.kind} family has no prefix count; give levels as (N, K) pairs")
            N, K = item, s.prefix_count(item)
        out.append((int(N), int(K)))
    if not out:
        raise ValueError("verify_levels needs at least one level")
    if any(a[0] >= b[0] for a, b in zip(out, out[1:])):
        raise ValueError("levels must be strictly increasing")
    return out


def verify_levels(
    s: SequenceFamily,
    levels: Sequence[int | tuple[int, int]] = DEFAULT_SCHEDULE,
    expected: str = "pr-holds",
    tol: Tolerance = DEFAULT_TOL,
    cfg: SearchConfig = DEFAULT_CONFIG,
) -> list[LevelReport]:
    """Complement property, phase retrieval and norm retrieval of truncate(s, N, K) per level.

    A bare N means K = ``s.prefix_count(N)``: every member supported in the
    first N coordinates.  A level with K = 0 is reported as empty.
    """
    if expected not in CLAIMS:
        raise ValueError(f"claim tag must be one of {CLAIMS}")
    reports = []
    for N, K in _normalize_levels(s, levels):
        if K < 1:
            reports.append(LevelReport(N, 0, {"complement_property": "EMPTY"}, divergence_note="no members are supported in this level"))
            continue
        f = truncate(s, N, K)
        cp = complement_property(f, tol, cfg)
        pr = phase_retrieval(f, tol, cfg)
        nr = norm_retrieval(f, tol, cfg)
        verdicts = {
            "complement_property": cp.verdict.value,
            "phase_retrieval": pr.verdict.value,
            "norm_retrieval": nr.verdict.value,
        }
        witnesses = []
        if cp.partition is not None:
            witnesses.append({"source": "complement_property", **cp.partition.as_fields()})
        if pr.certificate is not None:
            witnesses.append({"source": "phase_retrieval", **pr.certificate.as_fields()})
        if nr.certificate is not None:
            witnesses.append({"source": "norm_retrieval", **nr.certificate.as_fields()})
        holds = pr.verdict is Verdict.HOLDS
        note = None
        if holds != (expected == "pr-holds"):
            claim = "holds" if expected == "pr-holds" else "fails"
            found = "holds" if holds else "fails"
            note = f"finite truncation {found} phase retrieval; l2 claim: phase retrieval {claim}"
        reports.append(LevelReport(N, K, verdicts, witnesses, note, f.zero_indices))
    return reports


def levels_report(
    s: SequenceFamily,
    reports: Sequence[LevelReport],
    expected: str,
    tol: Tolerance = DEFAULT_TOL,
    seed: int = 0,
) -> AnalysisReport:
    config = {"sequence": format_seq_header(s.kind, s.params), "claim": expected}
    return AnalysisReport(levels=[r.as_fields() for r in reports], tolerances=tol, seed=seed, config=config)


def _pair_support(v: np.ndarray) -> tuple[int, int] | None:
    ones = np.flatnonzero(v == 1.0)
    if ones.size == 2 and np.count_nonzero(v) == 2:
        return int(ones[0]), int(ones[1])
    return None


def deletion_test(
    f: Frame,
    index: int,
    tol: Tolerance = DEFAULT_TOL,
    cfg: SearchConfig = DEFAULT_CONFIG,
) -> Decision:
    """Phase retrieval of the frame with vector ``index`` (0-based) removed.

    When every vector is some e_k + e_l, the analytic certificate
    x = e_k + e_l, y = e_k - e_l for the deleted pair is also checked and
    reported under ``info["pair_certificate"]`` with its exact gap.
    """
    if not 0 <= index < f.m:
        raise IndexOutOfRange(f"index {index} outside 0..{f.m - 1}")
    if f.m == 1:
        raise IndexOutOfRange("cannot delete the only vector of a frame")
    g = f.without(index)
    d = phase_retrieval(g, tol, cfg)
    info = dict(d.info)
    info["deleted"] = index
    supports = [_pair_support(v) for v in f.vectors]
    if all(s is not None for s in supports):
        k, l = supports[index]
        x = np.zeros(f.dim)
        y = np.zeros(f.dim)
        x[[k, l]] = 1.0
        y[k], y[l] = 1.0, -1.0
        cert = PairCertificate(x, y, CertificateKind.PR_COUNTEREXAMPLE)
        check = certify_counterexample(g, cert, tol)
        info["pair_certificate"] = cert
        info["pair_verdict"] = check.verdict
        info["pair_gap"] = check.info["max_gap"]
    return Decision(d.verdict, d.partition, d.certificate, info)
