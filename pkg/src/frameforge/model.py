"""Domain objects and their text formats.

FRAME v1::

    # comment lines start with '#'
    frame n=2 m=3
    1 0
    0 1
    1 1

Sequence header::

    seq kind=pairs params=
    seq kind=trap params=levels:4,part:Y,seed:0

Reports are flat ``key = value`` documents split into ``[VERDICTS]``,
``[WITNESSES]``, ``[LEVELS]``, ``[CONFIG]`` and ``[TIMINGS]`` sections; see
:func:`serialize_report`.  Vector indices are 0-based everywhere.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import FormatError, GeneratorError
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, is_orthonormal

__all__ = [
    "Frame",
    "ProjectionFamily",
    "SequenceVector",
    "SequenceFamily",
    "PartitionWitness",
    "PairCertificate",
    "CertificateKind",
    "AnalysisReport",
    "parse_frame",
    "serialize_frame",
    "truncate",
    "parse_seq_header",
    "format_seq_header",
    "serialize_report",
    "parse_report",
    "VERDICT_KEYS",
]

VERDICT_KEYS = (
    "spark",
    "complement_property",
    "phase_retrieval",
    "norm_retrieval",
    "overcomplete_cp",
    "lifting_number",
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Frame:
    """Ordered list of ``m >= 1`` real vectors in R^dim, stored as an (m, dim) array."""

    vectors: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        V = np.asarray(self.vectors, dtype=float)
        if V.ndim != 2 or V.shape[0] < 1 or V.shape[1] < 1:
            raise ValueError(f"a frame needs m >= 1 vectors of length >= 1, got shape {V.shape}")
        V = as_matrix(V)
        object.__setattr__(self, "vectors", _frozen(V))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != V.shape[0]:
                raise ValueError("one label per vector required")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_vectors(cls, vectors: Iterable[Sequence[float]], labels=None) -> "Frame":
        return cls(np.array([np.asarray(v, dtype=float) for v in vectors]), labels)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    def __len__(self):
        return self.m

    def __getitem__(self, i):
        return self.vectors[i]

    def __iter__(self):
        return iter(self.vectors)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.vectors.shape == other.vectors.shape and bool(np.array_equal(self.vectors, other.vectors)) and self.labels == other.labels

    def __repr__(self):
        return f"Frame(dim={self.dim}, m={self.m})"

    @property
    def zero_indices(self) -> tuple[int, ...]:
        """Indices of exactly-zero vectors (kept, never dropped)."""
        return tuple(int(i) for i in np.flatnonzero(~self.vectors.any(axis=1)))

    def subset(self, indices: Iterable[int]) -> "Frame":
        idx = list(indices)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return Frame(self.vectors[idx], labels)

    def without(self, index: int) -> "Frame":
        return self.subset(i for i in range(self.m) if i != index)

    def map(self, T: np.ndarray) -> "Frame":
        """The frame {T x_i}."""
        return Frame(self.vectors @ np.asarray(T, dtype=float).T, self.labels)

    def scaled(self, a: Sequence[float]) -> "Frame":
        """The frame {a_i x_i}."""
        return Frame(self.vectors * np.asarray(a, dtype=float)[:, None], self.labels)


@dataclass(frozen=True, eq=False)
class ProjectionFamily:
    """Orthogonal projections given by orthonormal bases (rows) of their ranges.

    Ranges of size 0 are only accepted with ``allow_empty=True``; they arise
    from complementing full-rank projections and are listed in
    :attr:`zero_ranges`.
    """

    dim: int
    ranges: tuple[np.ndarray, ...]
    allow_empty: bool = False
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        bases = []
        for k, B in enumerate(self.ranges):
            B = np.asarray(B, dtype=float)
            if B.size == 0:
                B = np.zeros((0, self.dim))
            elif B.ndim == 1:
                B = B.reshape(1, -1)
            B = as_matrix(B)
            if B.shape[1] != self.dim:
                raise ValueError(f"range {k} lives in R^{B.shape[1]}, expected R^{self.dim}")
            if B.shape[0] == 0 and not self.allow_empty:
                raise ValueError(f"range {k} is empty")
            if B.shape[0] > self.dim:
                raise ValueError(f"range {k} has {B.shape[0]} > dim basis vectors")
            if not is_orthonormal(B, self.tol.cert_abs):
                raise ValueError(f"range {k} basis is not orthonormal within cert_abs")
            bases.append(_frozen(B))
        if not bases:
            raise ValueError("a projection family needs at least one projection")
        object.__setattr__(self, "ranges", tuple(bases))

    @classmethod
    def from_frame(cls, frame: Frame) -> "ProjectionFamily":
        """Rank-one projections onto the (nonzero) frame vectors."""
        norms = np.linalg.norm(frame.vectors, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("rank-one projections need nonzero vectors")
        return cls(frame.dim, tuple((v / n).reshape(1, -1) for v, n in zip(frame.vectors, norms)))

    def __len__(self):
        return len(self.ranges)

    @property
    def zero_ranges(self) -> tuple[int, ...]:
        return tuple(k for k, B in enumerate(self.ranges) if B.shape[0] == 0)

    def matrices(self) -> list[np.ndarray]:
        return [B.T @ B for B in self.ranges]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Stack of P_i x as rows, shape (len, dim)."""
        return np.array([B.T @ (B @ x) for B in self.ranges])


@dataclass(frozen=True, eq=False)
class SequenceVector:
    """An l2 vector: explicit leading coordinates plus an optional tail formula.

    Without a tail every coordinate past ``len(coords)`` is zero and the
    support bound is ``len(coords)``.  ``tail(j)`` gives coordinate ``j``
    (1-based) for ``j > len(coords)``; such vectors have no finite bound.
    """

    coords: np.ndarray
    tail: Callable[[int], float] | None = None

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coordinate")
        object.__setattr__(self, "coords", _frozen(c))

    @property
    def support_bound(self) -> int | None:
        return None if self.tail is not None else self.coords.size

    def restrict(self, N: int) -> np.ndarray:
        """Coordinates 1..N, zero-padded or computed from the tail."""
        out = np.zeros(N)
        k = min(N, self.coords.size)
        out[:k] = self.coords[:k]
        if self.tail is not None:
            for j in range(self.coords.size + 1, N + 1):
                out[j - 1] = self.tail(j)
        return out

    def coordinate(self, j: int) -> float:
        if j <= self.coords.size:
            return float(self.coords[j - 1])
        return 0.0 if self.tail is None else float(self.tail(j))


@dataclass(frozen=True)
class SequenceFamily:
    """Lazy, 1-indexed family of l2 vectors.

    ``generator(k)`` must be a pure function of ``k``.  ``prefix_count(N)``,
    when given, is the number of leading members whose support lies inside
    the first N coordinates; the truncation module uses it to pick K.
    """

    generator: Callable[[int], SequenceVector]
    description: str
    kind: str = "custom"
    params: Mapping[str, str] = field(default_factory=dict)
    size: int | None = None
    prefix_count: Callable[[int], int] | None = None

    def member(self, k: int) -> SequenceVector:
        if k < 1 or (self.size is not None and k > self.size):
            raise GeneratorError(f"{self.kind}: index {k} outside 1..{self.size if self.size is not None else 'inf'}")
        try:
            v = self.generator(k)
        except GeneratorError:
            raise
        except Exception as exc:  # noqa: BLE001 - any generator failure is reported uniformly
            raise GeneratorError(f"{self.kind}: generator failed at index {k}: {exc}") from exc
        if not isinstance(v, SequenceVector):
            v = SequenceVector(np.asarray(v, dtype=float))
        return v

    def header(self) -> str:
        return format_seq_header(self.kind, self.params)

    def members(self, K: int) -> list[SequenceVector]:
        return [self.member(k) for k in range(1, K + 1)]


def truncate(s: SequenceFamily, N: int, K: int) -> Frame:
    """First K members restricted to coordinates 1..N.

    Members that become zero are kept; see :attr:`Frame.zero_indices`.
    Labels carry the 1-based member index.
    """
    if N < 1 or K < 1:
        raise ValueError("truncation needs N >= 1 and K >= 1")
    rows = [s.member(k).restrict(N) for k in range(1, K + 1)]
    return Frame(np.array(rows), labels=tuple(str(k) for k in range(1, K + 1)))


class CertificateKind(str, enum.Enum):
    PR_COUNTEREXAMPLE = "PR-counterexample"
    NR_COUNTEREXAMPLE = "NR-counterexample"
    ORTHOGONAL_WITNESS = "orthogonal-witness"


@dataclass(frozen=True)
class PartitionWitness:
    """A partition (I, I^c) of the frame indices with the rank of each side."""

    subset: tuple[int, ...]
    complement: tuple[int, ...]
    rank_I: int
    rank_Ic: int

    def as_fields(self) -> dict[str, str]:
        return {
            "kind": "partition",
            "subset": " ".join(map(str, self.subset)),
            "complement": " ".join(map(str, self.complement)),
            "rank_I": str(self.rank_I),
            "rank_Ic": str(self.rank_Ic),
        }


@dataclass(frozen=True, eq=False)
class PairCertificate:
    x: np.ndarray
    y: np.ndarray
    kind: CertificateKind

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(np.asarray(self.x, dtype=float).reshape(-1)))
        object.__setattr__(self, "y", _frozen(np.asarray(self.y, dtype=float).reshape(-1)))
        object.__setattr__(self, "kind", CertificateKind(self.kind))
        if self.x.shape != self.y.shape:
            raise ValueError("certificate vectors differ in length")

    def __eq__(self, other):
        if not isinstance(other, PairCertificate):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    def as_fields(self) -> dict[str, str]:
        return {"kind": self.kind.value, "x": _fmt_vec(self.x), "y": _fmt_vec(self.y)}


# --------------------------------------------------------------------------
# FRAME v1


_HEADER = re.compile(r"^frame\s+n=(\d+)\s+m=(\d+)\s*$")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_vec(v) -> str:
    return " ".join(_fmt(t) for t in np.asarray(v, dtype=float).reshape(-1))


def parse_frame(text: str) -> Frame:
    """Parse FRAME v1 text."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise FormatError("empty frame text")
    m_hdr = _HEADER.match(lines[0])
    if not m_hdr:
        raise FormatError(f"bad header line: {lines[0]!r}")
    n, m = int(m_hdr.group(1)), int(m_hdr.group(2))
    if n < 1 or m < 1:
        raise FormatError("frame needs n >= 1 and m >= 1")
    body = lines[1:]
    if len(body) != m:
        raise FormatError(f"header announces m={m} vectors, found {len(body)}")
    rows = []
    for k, ln in enumerate(body):
        tokens = ln.split()
        if len(tokens) != n:
            raise FormatError(f"vector {k} has {len(tokens)} entries, expected n={n}")
        try:
            row = [float(t) for t in tokens]
        except ValueError as exc:
            raise FormatError(f"vector {k}: {exc}") from None
        if not all(np.isfinite(row)):
            raise FormatError(f"vector {k} has a non-finite entry")
        rows.append(row)
    return Frame(np.array(rows))


def serialize_frame(f: Frame, comments: Sequence[str] = ()) -> str:
    """FRAME v1 text; entries use 17 significant digits so parsing is exact."""
    out = [f"# {c}" for c in comments]
    out.append(f"frame n={f.dim} m={f.m}")
    out.extend(_fmt_vec(v) for v in f.vectors)
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# sequence headers

_SEQ = re.compile(r"^seq\s+kind=(\S+)\s+params=(\S*)\s*$")


def format_seq_header(kind: str, params: Mapping[str, object]) -> str:
    body = ",".join(f"{k}:{v}" for k, v in params.items())
    return f"seq kind={kind} params={body}"


def parse_seq_header(text: str) -> tuple[str, dict[str, str]]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if len(lines) != 1:
        raise FormatError("a sequence header is exactly one line")
    m = _SEQ.match(lines[0])
    if not m:
        raise FormatError(f"bad sequence header: {lines[0]!r}")
    params: dict[str, str] = {}
    if m.group(2):
        for item in m.group(2).split(","):
            key, sep, value = item.partition(":")
            if not sep or not key:
                raise FormatError(f"bad sequence parameter {item!r}")
            params[key] = value
    return m.group(1), params


# --------------------------------------------------------------------------
# reports

REPORT_MAGIC = "frameforge-report v1"
_SECTIONS = ("VERDICTS", "WITNESSES", "LEVELS", "CONFIG", "TIMINGS")


@dataclass(frozen=True)
class AnalysisReport:
    """Verdicts with their witnesses plus the configuration that produced them.

    Every value is kept as text so that the serialized form round-trips.
    Timings are only serialized when present; leave them empty for
    byte-reproducible output.
    """

    verdicts: dict[str, str] = field(default_factory=dict)
    witnesses: list[dict[str, str]] = field(default_factory=list)
    tolerances: Tolerance = DEFAULT_TOL
    seed: int = 0
    timings: dict[str, float] = field(default_factory=dict)
    levels: list[dict[str, str]] = field(default_factory=list)
    config: dict[str, str] = field(default_factory=dict)

    def failing_without_witness(self) -> list[str]:
        sources = {w.get("source") for w in self.witnesses}
        return [k for k, v in self.verdicts.items() if v == "FAILS" and k not in sources]


def _clean(value: object) -> str:
    return str(value).replace("\n", " ").strip()


def serialize_report(r: AnalysisReport) -> str:
    out = [REPORT_MAGIC]
    if r.verdicts:
        out.append("[VERDICTS]")
        out.extend(f"{k} = {_clean(v)}" for k, v in r.verdicts.items())
    if r.witnesses:
        out.append("[WITNESSES]")
        for i, w in enumerate(r.witnesses):
            out.extend(f"w{i}.{k} = {_clean(v)}" for k, v in w.items())
    if r.levels:
        out.append("[LEVELS]")
        for i, lv in enumerate(r.levels):
            out.extend(f"l{i}.{k} = {_clean(v)}" for k, v in lv.items())
    out.append("[CONFIG]")
    out.append(f"tol_rank = {r.tolerances.rank_rel!r}")
    out.append(f"tol_cert = {r.tolerances.cert_abs!r}")
    out.append(f"seed = {r.seed}")
    out.extend(f"{k} = {_clean(v)}" for k, v in r.config.items())
    if r.timings:
        out.append("[TIMINGS]")
        out.extend(f"{k} = {v!r}" for k, v in r.timings.items())
    return "\n".join(out) + "\n"


def _grouped(items: list[tuple[str, str]], prefix: str) -> list[dict[str, str]]:
    groups: dict[int, dict[str, str]] = {}
    for key, value in items:
        head, dot, name = key.partition(".")
        if not dot or not head.startswith(prefix) or not head[len(prefix):].isdigit():
            raise FormatError(f"bad indexed key {key!r}")
        groups.setdefault(int(head[len(prefix):]), {})[name] = value
    if sorted(groups) != list(range(len(groups))):
        raise FormatError(f"non-contiguous {prefix} indices")
    return [groups[i] for i in range(len(groups))]


def parse_report(text: str) -> AnalysisReport:
    lines = text.splitlines()
    if not lines or lines[0].strip() != REPORT_MAGIC:
        raise FormatError("missing report header")
    sections: dict[str, list[tuple[str, str]]] = {}
    current = None
    for ln in lines[1:]:
        if not ln.strip():
            continue
        if ln.startswith("[") and ln.endswith("]"):
            current = ln[1:-1]
            if current not in _SECTIONS or current in sections:
                raise FormatError(f"unexpected section {ln!r}")
            sections[current] = []
            continue
        if current is None:
            raise FormatError("entry outside any section")
        key, sep, value = ln.partition(" = ")
        if not sep:
            raise FormatError(f"bad report line {ln!r}")
        sections[current].append((key, value))
    config = dict(sections.get("CONFIG", []))
    try:
        tol = Tolerance(float(config.pop("tol_rank")), float(config.pop("tol_cert")))
        seed = int(config.pop("seed"))
        timings = {k: float(v) for k, v in sections.get("TIMINGS", [])}
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad CONFIG/TIMINGS section: {exc}") from None
    return AnalysisReport(
        verdicts=dict(sections.get("VERDICTS", [])),
        witnesses=_grouped(sections.get("WITNESSES", []), "w"),
        tolerances=tol,
        seed=seed,
        timings=timings,
        levels=_grouped(sections.get("LEVELS", []), "l"),
        config=config,
    )
