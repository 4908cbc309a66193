"""WDVV residuals, their dimension-2 and dimension-3 reductions, and the
equivalence with the Hessian curvature formula.

The defining system, indexed over (i, j, k, l):

    sum_pq Phi^{pq} Phi_jlp Phi_ikq  =  sum_pq Phi_ilp Phi_jkq Phi^{pq}

A convex potential solves it exactly when its Hessian metric is
Riemannian-flat, which is the bridge to the Frobenius catalogue.  This module
is the oracle side of that bridge, so contractions are written as literal
einsums over all index tuples with no symmetry tricks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hessian
from .errors import WrongDimension


@dataclass(frozen=True)
class WdvvReport:
    """Residual summary of one potential at sampled points."""

    name: str
    points: np.ndarray
    max_residual: float
    scalar_residual: float | None
    ricci_residual: np.ndarray | None
    totaro_consistency: float


def _difference_tensor(spec, x) -> np.ndarray:
    jet = spec.jet(x, order=3)
    hinv = np.linalg.inv(jet.hessian())
    t3 = jet.tensor(3)
    lhs = np.einsum("pq,jlp,ikq->ijkl", hinv, t3, t3)
    rhs = np.einsum("ilp,jkq,pq->ijkl", t3, t3, hinv)
    return lhs - rhs


def wdvv_residual(spec, x) -> float:
    """Max over index quadruples of |LHS - RHS|."""
    return float(np.max(np.abs(_difference_tensor(spec, x))))


def wdvv_scalar_residual(spec, x) -> float:
    """Dimension-2 reduction: the full double contraction of the WDVV
    difference with Phi^{jl} Phi^{ik}.

    In dimension two the potential solves the WDVV system iff this single
    number vanishes (the scalar curvature of the Hessian metric, up to a
    factor).
    """
    if spec.dim != 2:
        raise WrongDimension("scalar reduction defined in dimension 2 only")
    jet = spec.jet(x, order=3)
    hinv = np.linalg.inv(jet.hessian())
    diff = _difference_tensor(spec, x)
    return float(np.einsum("jl,ik,ijkl->", hinv, hinv, diff))


def wdvv_ricci_residual(spec, x) -> np.ndarray:
    """Dimension-3 reduction: the (i, k)-indexed contraction of the WDVV
    difference with Phi^{jl}; symmetric, six independent entries."""
    if spec.dim != 3:
        raise WrongDimension("Ricci reduction defined in dimension 3 only")
    jet = spec.jet(x, order=3)
    hinv = np.linalg.inv(jet.hessian())
    diff = _difference_tensor(spec, x)
    return np.einsum("jl,ijkl->ik", hinv, diff)


def totaro_consistency(spec, x) -> float:
    """Brute-force equivalence of the WDVV difference with -4 R_ijkl.

    The WDVV tensor and the curvature tensor are computed by independent
    code paths (this module and :func:`statmirror.hessian.riemann`); their
    defect certifies both implementations at once.
    """
    diff = _difference_tensor(spec, x)
    r = hessian.riemann(spec, x)
    return float(np.max(np.abs(diff + 4.0 * r)))


def legendre_wdvv_check(spec, rng, count: int = 20) -> float:
    """WDVV residual of the Legendre dual at pushed-forward sample points.

    Uses the closed-form dual when the catalogue has one and the numeric
    Legendre oracle otherwise; returns the max residual over the samples.
    """
    dual = hessian.dual_view(spec)
    worst = 0.0
    for _ in range(count):
        x = spec.sample(rng)
        u = hessian.grad_map(spec, x)
        worst = max(worst, wdvv_residual(dual, u))
    return worst


def report(spec, rng, count: int = 20) -> WdvvReport:
    points = np.array([spec.sample(rng) for _ in range(count)])
    max_res = max(wdvv_residual(spec, x) for x in points)
    scalar = (
        max(abs(wdvv_scalar_residual(spec, x)) for x in points)
        if spec.dim == 2
        else None
    )
    ricci = (
        max(
            (wdvv_ricci_residual(spec, x) for x in points),
            key=lambda m: float(np.max(np.abs(m))),
        )
        if spec.dim == 3
        else None
    )
    totaro = max(totaro_consistency(spec, x) for x in points)
    return WdvvReport(
        name=spec.name,
        points=points,
        max_residual=max_res,
        scalar_residual=scalar,
        ricci_residual=ricci,
        totaro_consistency=totaro,
    )
