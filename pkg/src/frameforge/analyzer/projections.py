"""Phase and norm retrieval searches for families of orthogonal projections.

A family {P_i} fails phase retrieval exactly when there are nonzero x, y with
P_i x orthogonal to P_i y for every i.  For fixed x the best y is the bottom
eigenvector of M(x) = sum_i (P_i x)(P_i x)^T, so the search minimizes
lambda_min(M(x)) over unit x.  The problem is symmetric in (x, y), which the
alternating step exploits.  A HOLDS answer from these searches is only
probable; FAILS always comes with a directly verified witness.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, ZeroComplement
from ..linalg import DEFAULT_TOL, Tolerance, canonical_sign, nullspace_basis, numerical_rank, range_basis
from ..model import CertificateKind, Frame, PairCertificate, PartitionWitness, ProjectionFamily
from .partitions import DEFAULT_CONFIG, Decision, SearchConfig, Verdict, _Budget, _walk

__all__ = [
    "complement_projections",
    "projection_pr",
    "projection_nr",
    "certify_orthogonal_witness",
    "certify_projection_nr",
    "parseval_partition_experiment",
]


def complement_projections(p: ProjectionFamily, strict: bool = False) -> ProjectionFamily:
    """Replace every P_i by I - P_i.

    A full-dimensional range has a zero complement.  Such entries raise
    :class:`ZeroComplement` when ``strict`` is set; otherwise they are kept as
    empty ranges and listed in ``zero_ranges`` of the result.
    """
    ranges = []
    for k, B in enumerate(p.ranges):
        C = nullspace_basis(B, p.tol, cols=p.dim).T
        if C.shape[0] == 0 and strict:
            raise ZeroComplement(f"projection {k} is the identity; its complement is zero")
        ranges.append(C)
    return ProjectionFamily(p.dim, tuple(ranges), allow_empty=True, tol=p.tol)


# --------------------------------------------------------------------------
# phase retrieval


class _Family:
    """Dense projection matrices plus the quadratic forms used by the search."""

    def __init__(self, p: ProjectionFamily):
        self.n = p.dim
        self.P = np.array(p.matrices()) if len(p) else np.zeros((0, p.dim, p.dim))

    def images(self, x: np.ndarray) -> np.ndarray:
        return self.P @ x

    def gram(self, x: np.ndarray) -> np.ndarray:
        V = self.images(x)
        return V.T @ V

    def bottom(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        w, V = np.linalg.eigh(self.gram(x))
        return max(float(w[0]), 0.0), V[:, 0]

    def inner(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """<P_i x, P_i y> for every i."""
        return self.images(x) @ y

    def polish(self, x: np.ndarray, y: np.ndarray, iters: int = 40) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Newton on x^T P_i y = 0 with both vectors kept at unit norm."""
        n = self.n
        for _ in range(iters):
            Px, Py = self.images(x), self.images(y)
            r = np.concatenate([Px @ y, [0.5 * (x @ x - 1.0), 0.5 * (y @ y - 1.0)]])
            if np.abs(r).max() < 1e-15:
                break
            J = np.vstack([np.hstack([Py, Px]), np.concatenate([x, np.zeros(n)]), np.concatenate([np.zeros(n), y])])
            d = np.linalg.lstsq(J, -r, rcond=None)[0]
            x = x + d[:n]
            y = y + d[n:]
            x /= np.linalg.norm(x)
            y /= np.linalg.norm(y)
        return x, y


def _descend(F: _Family, x: np.ndarray, max_iters: int, stop: float) -> tuple[float, np.ndarray, np.ndarray]:
    lam, y = F.bottom(x)
    step = 1.0
    for _ in range(max_iters):
        if lam <= stop:
            break
        # alternating step: swap roles and take the bottom eigenvector for y
        lam_alt, x_alt = F.bottom(y)
        if lam_alt < lam:
            x = x_alt
            lam, y = F.bottom(x)
            continue
        # gradient step on lambda_min with y frozen, halving until it decreases
        g = 2.0 * (F.inner(x, y)[:, None] * F.images(y)).sum(axis=0)
        g -= (g @ x) * x
        if np.linalg.norm(g) < 1e-16:
            break
        improved = False
        while step > 1e-12:
            cand = x - step * g
            cand /= np.linalg.norm(cand)
            lam_c, y_c = F.bottom(cand)
            if lam_c < lam:
                x, lam, y = cand, lam_c, y_c
                step *= 2.0
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return lam, x, y


def certify_orthogonal_witness(p: ProjectionFamily, c: PairCertificate, tol: Tolerance = DEFAULT_TOL) -> Decision:
    """ACCEPT iff x, y are nonzero and |<P_i x, P_i y>| <= cert_abs for every i.

    The pair then yields the phase retrieval counterexample x + y, x - y,
    whose images have equal norms under every P_i; that is rechecked too.
    """
    if c.x.shape != (p.dim,):
        raise DimensionMismatch(f"witness lives in R^{c.x.size}, projections in R^{p.dim}")
    F = _Family(p)
    nx, ny = float(np.linalg.norm(c.x)), float(np.linalg.norm(c.y))
    worst = float(np.abs(F.inner(c.x, c.y)).max(initial=0.0))
    u, v = c.x + c.y, c.x - c.y
    gap = float(np.abs(np.linalg.norm(F.images(u), axis=1) - np.linalg.norm(F.images(v), axis=1)).max(initial=0.0))
    ok = min(nx, ny) > tol.cert_abs and worst <= tol.cert_abs and gap <= 10 * tol.cert_abs
    return Decision(Verdict.ACCEPT if ok else Verdict.REJECT, certificate=c, info={"max_inner": worst, "norm_gap": gap})


def projection_pr(p: ProjectionFamily, cfg: SearchConfig = DEFAULT_CONFIG, tol: Tolerance = DEFAULT_TOL) -> Decision:
    """Search for x, y with P_i x orthogonal to P_i y for all i.

    Stage one samples ``cfg.sample_count`` random unit x and tests whether
    {P_i x} spans.  Stage two runs ``cfg.restarts`` descents on
    lambda_min(M(x)), each finished by a Gauss-Newton polish.  Each polished pair
    is verified directly; if none passes, the verdict is HOLDS-probable
    and ``info["min_lambda"]`` reports the smallest value reached.
    """
    F = _Family(p)
    n = F.n
    rng = np.random.default_rng(cfg.seed)

    def consider(x, y, stage):
        x, y = canonical_sign(x / np.linalg.norm(x)), canonical_sign(y / np.linalg.norm(y))
        cert = PairCertificate(x, y, CertificateKind.ORTHOGONAL_WITNESS)
        check = certify_orthogonal_witness(p, cert, tol)
        if check.verdict is Verdict.ACCEPT:
            return Decision(Verdict.FAILS, certificate=cert, info={"stage": stage, "max_inner": check.info["max_inner"]})
        return None

    for _ in range(cfg.sample_count):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        V = F.images(x)
        if numerical_rank(V, tol) < n:
            y = nullspace_basis(V, tol, cols=n)[:, 0]
            found = consider(x, y, "sampling")
            if found:
                return found

    lams = []
    for _ in range(cfg.restarts):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        lam, x, y = _descend(F, x, cfg.max_iters, tol.cert_abs**2)
        x, y = F.polish(x, y)
        lams.append(float(np.sum(F.inner(x, y) ** 2)))
        found = consider(x, y, "descent")
        if found:
            found.info["restarts_used"] = len(lams)
            return found
    return Decision(
        Verdict.HOLDS_PROBABLE,
        info={"min_lambda": min(lams) if lams else float("nan"), "restarts": cfg.restarts, "samples": cfg.sample_count},
    )


# --------------------------------------------------------------------------
# norm retrieval


def _residual(F: _Family, x: np.ndarray, tol: Tolerance) -> np.ndarray:
    """Component of x orthogonal to span{P_i x}."""
    B = range_basis(F.images(x), tol, dim=F.n)
    return x - B.T @ (B @ x)


def certify_projection_nr(p: ProjectionFamily, c: PairCertificate, tol: Tolerance = DEFAULT_TOL) -> Decision:
    """ACCEPT iff ||P_i x|| = ||P_i y|| for all i (within cert_abs) but ||x|| != ||y||."""
    if c.x.shape != (p.dim,):
        raise DimensionMismatch(f"certificate lives in R^{c.x.size}, projections in R^{p.dim}")
    F = _Family(p)
    gap = float(np.abs(np.linalg.norm(F.images(c.x), axis=1) - np.linalg.norm(F.images(c.y), axis=1)).max(initial=0.0))
    norm_gap = float(abs(np.linalg.norm(c.x) - np.linalg.norm(c.y)))
    ok = gap <= tol.cert_abs and norm_gap > tol.cert_abs
    return Decision(Verdict.ACCEPT if ok else Verdict.REJECT, certificate=c, info={"max_gap": gap, "norm_gap": norm_gap})


def projection_nr(p: ProjectionFamily, cfg: SearchConfig = DEFAULT_CONFIG, tol: Tolerance = DEFAULT_TOL) -> Decision:
    """Search for a unit x outside span{P_i x}.

    Since <P_i x, P_i y> = <P_i x, y>, a unit y orthogonal to every P_i x is
    exactly an orthogonal witness for x, and x leaves span{P_i x} iff some
    such y has <x, y> != 0.  Random samples come first; then the descent of
    :func:`projection_pr` is restarted ``cfg.restarts`` times and both members
    of each polished pair are tested.  For x with unit residual direction r
    the pair x + r, x - r has equal projection norms and unequal norms; that
    pair is the returned certificate.
    """
    F = _Family(p)
    n = F.n
    rng = np.random.default_rng(cfg.seed)
    best = 0.0

    def found(x, stage):
        nonlocal best
        x = x / np.linalg.norm(x)
        r = _residual(F, x, tol)
        size = float(np.linalg.norm(r))
        best = max(best, size)
        if size <= tol.cert_abs:
            return None
        r_hat = r / size
        cert = PairCertificate(x + r_hat, x - r_hat, CertificateKind.NR_COUNTEREXAMPLE)
        if certify_projection_nr(p, cert, tol).verdict is Verdict.ACCEPT:
            return Decision(Verdict.FAILS, certificate=cert, info={"stage": stage, "x": x, "residual": size})
        return None

    for _ in range(cfg.sample_count):
        out = found(rng.standard_normal(n), "sampling")
        if out:
            return out

    for _ in range(cfg.restarts):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        _, x, y = _descend(F, x, cfg.max_iters, tol.cert_abs**2)
        x, y = F.polish(x, y)
        for z in (x, y):
            out = found(canonical_sign(z), "descent")
            if out:
                return out
    return Decision(Verdict.HOLDS_PROBABLE, info={"max_residual": best, "restarts": cfg.restarts, "samples": cfg.sample_count})


# --------------------------------------------------------------------------
# experiment on Parseval frames


def parseval_partition_experiment(f: Frame, tol: Tolerance = DEFAULT_TOL, cfg: SearchConfig = DEFAULT_CONFIG) -> Decision:
    """Test whether span_I and span_{I^c} are orthogonal for every partition.

    This records an observation about the given frame and assumes nothing:
    FAILS names the first partition (in canonical order) whose two spans are
    not orthogonal, HOLDS means every partition had orthogonal spans.
    ``info["parseval"]`` says whether the frame operator is the identity.
    """
    A = f.vectors
    m, n = A.shape
    S = A.T @ A
    parseval = bool(np.abs(S - np.eye(n)).max() <= tol.cert_abs)
    budget = _Budget(cfg.subset_budget, "Parseval partition experiment")
    for I, Ic in _walk(m, lambda side: False, budget):
        if not Ic:
            continue
        BI = range_basis(A[list(I)], tol, dim=n)
        BIc = range_basis(A[list(Ic)], tol, dim=n)
        inner = float(np.linalg.norm(BI @ BIc.T, 2)) if BI.size and BIc.size else 0.0
        if inner > tol.cert_abs:
            w = PartitionWitness(I, Ic, BI.shape[0], BIc.shape[0])
            return Decision(Verdict.FAILS, partition=w, info={"parseval": parseval, "cosine": inner})
    return Decision(Verdict.HOLDS, info={"parseval": parseval})
