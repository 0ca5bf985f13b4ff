"""Command-line entry point.

Exit codes: 0 when a verdict was computed (FAILS included), 1 for usage
errors, 2 for budget, construction and other analysis errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

import numpy as np

from . import constructors as C
from .analyzer import SearchConfig, analyze, certify_counterexample, complement_property, spark
from .errors import FrameForgeError
from .linalg import Tolerance
from .model import (
    AnalysisReport,
    CertificateKind,
    Frame,
    PairCertificate,
    parse_frame,
    parse_seq_header,
    serialize_frame,
    serialize_report,
    truncate,
)
from .truncation import CLAIMS, DEFAULT_SCHEDULE, deletion_test, levels_report, verify_levels

CONSTRUCT_KINDS = ("full-spark", "an", "pairs", "three-riesz", "nested-union", "trap", "ffs")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# rendering


def render_report(r: AnalysisReport, fmt: str = "text") -> str:
    """``report`` is the exact serialized form; ``text`` is for reading."""
    if fmt == "report":
        return serialize_report(r)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    out = ["frameforge analysis"]
    if r.verdicts:
        width = max(len(k) for k in r.verdicts)
        out.append("")
        out.extend(f"  {k.ljust(width)}  {v}" for k, v in r.verdicts.items())
    if r.witnesses:
        out.append("")
        out.append("witnesses:")
        for w in r.witnesses:
            head = w.get("source", "witness")
            out.append(f"  {head}: " + ", ".join(f"{k}=[{v}]" for k, v in w.items() if k != "source"))
    if r.levels:
        out.append("")
        out.append("levels:")
        for lv in r.levels:
            out.append("  " + ", ".join(f"{k}={v}" for k, v in lv.items()))
    out.append("")
    out.append(f"tolerances: rank_rel={r.tolerances.rank_rel!r} cert_abs={r.tolerances.cert_abs!r}")
    out.append(f"seed: {r.seed}")
    for k, v in r.config.items():
        out.append(f"{k}: {v}")
    if r.timings:
        out.append("timings: " + ", ".join(f"{k}={v:.4f}s" for k, v in r.timings.items()))
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# argument handling


def _default_seed() -> int:
    raw = os.environ.get("FRAMEFORGE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"FRAMEFORGE_SEED must be an integer, got {raw!r}") from None


def _common(seed_default: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol-rank", type=float, default=1e-10, help="relative singular-value cutoff")
    p.add_argument("--tol-cert", type=float, default=1e-8, help="absolute certificate cutoff")
    p.add_argument("--seed", type=int, default=seed_default, help="random seed (default: $FRAMEFORGE_SEED or 0)")
    p.add_argument("--budget", type=int, default=2**25, help="subset/partition budget")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("text", "report"), default="report")
    p.add_argument("--timings", action="store_true", help="record wall-clock timings (output is then not reproducible)")
    return p


def build_parser(seed_default: int = 0) -> argparse.ArgumentParser:
    common = _common(seed_default)
    parser = _Parser(prog="frameforge", description="Phase retrieval and related properties of real frames.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    a = sub.add_parser("analyze", parents=[common], help="spark, CP, PR, NR, OCP and lifting number of a frame")
    a.add_argument("frame", help="FRAME v1 file or '-'")

    c = sub.add_parser("construct", parents=[common], help="build a named family")
    c.add_argument("kind", choices=CONSTRUCT_KINDS)
    c.add_argument("--n", type=int, help="dimension (full-spark, an)")
    c.add_argument("--m", type=int, help="vector count (full-spark)")
    c.add_argument("--N", type=int, help="pairs dimension, or truncation level for sequences")
    c.add_argument("--levels", type=int, default=1, help="levels (three-riesz, trap)")
    c.add_argument("--part", choices=("X", "Y"), default="X", help="trap part")
    c.add_argument("--dims", default="1,2,3", help="nested-union level dimensions")
    c.add_argument("--M", type=int, default=5, help="ffs vector count")
    c.add_argument("--k-max", type=int, default=2, help="ffs projection size bound")
    c.add_argument("--window", help="ffs window, e.g. 1,2,3,4")

    lf = sub.add_parser("lift", parents=[common], help="k-lift a frame preserving the complement property")
    lf.add_argument("frame")
    lf.add_argument("--k", type=int, required=True)

    v = sub.add_parser("verify-seq", parents=[common], help="check a sequence family at truncation levels")
    v.add_argument("header", help="'seq kind=... params=...' text, or a file holding it")
    v.add_argument("--levels", default=",".join(map(str, DEFAULT_SCHEDULE)), help="comma list of N or N:K")
    v.add_argument("--claim", choices=CLAIMS, required=True)

    ce = sub.add_parser("certify", parents=[common], help="check a phase retrieval counterexample x, y")
    ce.add_argument("frame")
    ce.add_argument("x", help="whitespace-separated entries")
    ce.add_argument("y", help="whitespace-separated entries")

    d = sub.add_parser("delete-test", parents=[common], help="phase retrieval after deleting one vector")
    d.add_argument("frame")
    d.add_argument("--index", type=int, required=True, help="0-based vector index")
    return parser


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.replace(",", " ").split()])
    except ValueError:
        raise UsageError(f"bad vector {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace("/", ",").split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}") from None


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required for this kind")
    return value


# --------------------------------------------------------------------------
# subcommands


def _verification_lines(f: Frame, tol: Tolerance, cfg: SearchConfig) -> list[str]:
    sp = spark(f, tol, cfg)
    cp = complement_property(f, tol, cfg)
    return [f"verify: spark={sp.spark} full_spark={'yes' if sp.full_spark else 'no'}", f"verify: complement_property={cp.verdict.value}"]


def _cmd_analyze(args, tol, cfg) -> str:
    f = parse_frame(_read(args.frame))
    return render_report(analyze(f, tol, cfg, timed=args.timings), args.format)


def _cmd_construct(args, tol, cfg) -> str:
    kind = args.kind
    comments = [f"construct {kind} seed={args.seed}"]
    if kind == "full-spark":
        f = C.full_spark_frame(_need(args.n, "--n"), _need(args.m, "--m"), args.seed, tol, cfg)
    elif kind == "an":
        f = C.an_family(_need(args.n, "--n"), args.seed, tol, cfg)
        phi = 1.0 / np.arange(1, f.dim + 1)
        worst = max(abs(phi[0] - (phi @ x) * x[0] / (x @ x)) for x in f.vectors)
        comments.append(f"verify: max |first coordinate of (I-P_x) phi| = {worst:.3e}")
    elif kind == "pairs":
        f = C.pairs_family(_need(args.N, "--N"))
    elif kind == "three-riesz":
        res = C.three_riesz_blocks(args.levels, args.seed, tol, cfg)
        for info in res.levels:
            comments.append("verify: " + " ".join(f"{k}={v}" for k, v in info.items()))
        f = Frame(np.vstack([np.hstack([fr.vectors, np.zeros((fr.m, res.level_frames[-1].dim - fr.dim))]) for fr in res.level_frames]))
        comments.append("rows: levels in order, j = 1, 2, 3 within each level")
    elif kind == "nested-union":
        dims = _int_list(args.dims)
        frames = [C.full_spark_frame(d, 2 * d - 1, args.seed + k, tol, cfg) for k, d in enumerate(dims)]
        res = C.nested_union(frames, tol=tol, cfg=cfg)
        for chk in res.checks:
            comments.append("verify: " + " ".join(f"{k}={v}" for k, v in chk.items()))
        N = dims[-1] if args.N is None else args.N
        f = truncate(res.family, N, res.family.prefix_count(N))
        comments.append(f"sequence: seq kind=nested-union params=dims:{'/'.join(map(str, dims))},seed:{args.seed}")
    elif kind == "trap":
        res = C.hyperplane_trap(args.levels, seed=args.seed, tol=tol, cfg=cfg)
        fam = res.X if args.part == "X" else res.Y
        N = args.levels if args.N is None else args.N
        K = fam.prefix_count(N)
        if K < 1:
            raise UsageError(f"no trap {args.part} vectors are supported in the first {N} coordinates")
        f = truncate(fam, N, K)
        comments.append(f"sequence: {fam.header()}")
        comments.append(f"truncation: N={N} K={K}")
        comments.append(f"verify: max |<y, w>| / (|y| |w|) = {res.max_inner:.3e}")
    else:
        window = _int_list(args.window) if args.window else None
        res = C.finitely_full_spark(args.M, args.k_max, args.seed, window, tol=tol)
        f = res.frame
        comments.append(f"verify: window={','.join(map(str, res.window))} k_max={res.k_max} projections_full_spark={res.projections_checked}")
    comments += _verification_lines(f, tol, cfg)
    return serialize_frame(f, comments)


def _cmd_lift(args, tol, cfg) -> str:
    f = parse_frame(_read(args.frame))
    res = C.lift(f, args.k, args.seed, tol, cfg)
    comments = [
        f"lift k={args.k} seed={args.seed} attempts={res.attempts} convention={res.convention}",
        f"verify: first {f.dim} coordinates unchanged",
    ] + _verification_lines(res.lifted, tol, cfg)
    return serialize_frame(res.lifted, comments)


def _levels_arg(text: str) -> list[int | tuple[int, int]]:
    out: list[int | tuple[int, int]] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            if ":" in item:
                N, K = item.split(":")
                out.append((int(N), int(K)))
            else:
                out.append(int(item))
        except ValueError:
            raise UsageError(f"bad level {item!r}") from None
    return out


def _cmd_verify_seq(args, tol, cfg) -> str:
    text = args.header if args.header.lstrip().startswith("seq ") else _read(args.header)
    kind, params = parse_seq_header(text)
    fam = C.sequence_from_header(kind, params)
    try:
        reports = verify_levels(fam, _levels_arg(args.levels), args.claim, tol, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return render_report(levels_report(fam, reports, args.claim, tol, args.seed), args.format)


def _cmd_certify(args, tol, cfg) -> str:
    f = parse_frame(_read(args.frame))
    cert = PairCertificate(_vector(args.x), _vector(args.y), CertificateKind.PR_COUNTEREXAMPLE)
    d = certify_counterexample(f, cert, tol)
    r = AnalysisReport(
        verdicts={"certificate": d.verdict.value},
        witnesses=[{"source": "certificate", **cert.as_fields(), "max_gap": repr(d.info["max_gap"]), "separation": repr(d.info["separation"])}],
        tolerances=tol,
        seed=cfg.seed,
        config={"n": str(f.dim), "m": str(f.m)},
    )
    return render_report(r, args.format)


def _cmd_delete_test(args, tol, cfg) -> str:
    f = parse_frame(_read(args.frame))
    d = deletion_test(f, args.index, tol, cfg)
    witnesses = []
    if d.certificate is not None:
        witnesses.append({"source": "phase_retrieval", **d.certificate.as_fields(), "subset": " ".join(map(str, d.partition.subset))})
    verdicts = {"phase_retrieval": d.verdict.value}
    if "pair_certificate" in d.info:
        verdicts["pair_certificate"] = d.info["pair_verdict"].value
        witnesses.append({"source": "pair_certificate", **d.info["pair_certificate"].as_fields(), "max_gap": repr(d.info["pair_gap"])})
    r = AnalysisReport(
        verdicts=verdicts,
        witnesses=witnesses,
        tolerances=tol,
        seed=cfg.seed,
        config={"n": str(f.dim), "m": str(f.m), "deleted_index": str(args.index)},
    )
    return render_report(r, args.format)


COMMANDS = {
    "analyze": _cmd_analyze,
    "construct": _cmd_construct,
    "lift": _cmd_lift,
    "verify-seq": _cmd_verify_seq,
    "certify": _cmd_certify,
    "delete-test": _cmd_delete_test,
}


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Execute one command; return (exit code, text written to the output)."""
    try:
        args = build_parser(_default_seed()).parse_args(argv)
        try:
            tol = Tolerance(args.tol_rank, args.tol_cert)
            cfg = SearchConfig(seed=args.seed, subset_budget=args.budget)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        text = COMMANDS[args.command](args, tol, cfg)
        if args.out == "-":
            sys.stdout.write(text)
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1, ""
    except FrameForgeError as exc:
        print(f"frameforge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2, ""
    except OSError as exc:
        print(f"frameforge: {exc}", file=sys.stderr)
        return 1, ""
    return 0, text


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
