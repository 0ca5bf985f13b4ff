"""Riesz certification for small perturbations of canonical basis vectors.

If s = sum_i ||x_i - e_{a_i}||^2 < 1 for distinct anchors a_i, the synthesis
operator T differs from an isometry by at most sqrt(s) in operator norm, so
sigma_min(T) >= 1 - sqrt(s) and the family is a Riesz sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import CountMismatch
from ..linalg import DEFAULT_TOL, Tolerance, singular_values
from ..model import Frame
from .partitions import DEFAULT_CONFIG, SearchConfig, Verdict, phase_retrieval

__all__ = ["RieszResult", "riesz_bound"]


@dataclass(frozen=True)
class RieszResult:
    perturbation_sum: float
    bound: float | None
    sv_min: float
    verdict: Verdict
    bound_verified: bool
    pr_verdict: Verdict | None = None

    @property
    def pr_consistent(self) -> bool | None:
        """A certified Riesz family in dimension >= 2 must fail phase retrieval."""
        if self.pr_verdict is None:
            return None
        return self.pr_verdict is Verdict.FAILS


def riesz_bound(
    f: Frame,
    eps: float = 0.0,
    anchors: Sequence[int] | None = None,
    tol: Tolerance = DEFAULT_TOL,
    check_pr: bool = True,
    cfg: SearchConfig = DEFAULT_CONFIG,
) -> RieszResult:
    """Certify {x_i} as a Riesz sequence by comparison with {e_{a_i}}.

    ``anchors`` lists the 0-based coordinate each vector perturbs; by default
    x_i is compared with e_i, which requires as many vectors as coordinates.
    The certificate applies when s <= 1 - eps and s < 1.  The smallest
    singular value of the synthesis matrix is always computed and compared
    with the bound.  With ``check_pr`` a certified family in dimension >= 2
    is also run through :func:`phase_retrieval`, which must report FAILS.
    """
    m, n = f.m, f.dim
    if anchors is None:
        if m != n:
            raise CountMismatch(f"{m} vectors in R^{n}: a basis comparison needs m == n (pass anchors for a sequence)")
        anchors = range(m)
    anchors = [int(a) for a in anchors]
    if len(anchors) != m:
        raise CountMismatch(f"{len(anchors)} anchors for {m} vectors")
    if len(set(anchors)) != m or min(anchors) < 0 or max(anchors) >= n:
        raise CountMismatch("anchors must be distinct coordinates of R^n")
    E = np.zeros((m, n))
    E[np.arange(m), anchors] = 1.0
    s = float(np.sum((f.vectors - E) ** 2))
    sv_min = float(singular_values(f.vectors)[-1]) if m <= n else 0.0
    certified = s < 1.0 and s <= 1.0 - eps
    bound = 1.0 - float(np.sqrt(s)) if certified else None
    verified = bool(certified and sv_min >= bound - 1e-12)
    pr = None
    if certified and check_pr and n >= 2:
        pr = phase_retrieval(f, tol, cfg).verdict
    return RieszResult(
        perturbation_sum=s,
        bound=bound,
        sv_min=sv_min,
        verdict=Verdict.CERTIFIED_RIESZ if certified else Verdict.NOT_CERTIFIED,
        bound_verified=verified,
        pr_verdict=pr,
    )
