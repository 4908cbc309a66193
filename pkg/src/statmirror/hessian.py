"""Riemannian geometry of Hessian manifolds.

Metric, gradient chart, numeric Legendre duality (damped Newton), the
curvature tensor of the Hessian metric in affine coordinates, sectional
curvature, and generic pullback/isometry residuals.  Also provides exact
transport of derivative jets to the Legendre-dual side, which backs every
"dual" computation for potentials without a closed-form conjugate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import (
    DegeneratePlane,
    DomainViolation,
    LeftDomain,
    NotConverged,
    NotPositiveDefinite,
)
from .jets import Jet
from .potentials import ChartMap, PotentialSpec

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class MetricData:
    """Symmetric positive-definite metric with its factorization and inverse."""

    dim: int
    g: np.ndarray
    chol: np.ndarray
    inv: np.ndarray

    def norm(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(np.sqrt(v @ self.g @ v))

    def inner(self, v, w) -> float:
        return float(np.asarray(v) @ self.g @ np.asarray(w))


def _metric_from_matrix(h: np.ndarray) -> MetricData:
    h = 0.5 * (h + h.T)
    try:
        chol = np.linalg.cholesky(h)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            "Hessian is not positive definite; check the sign convention"
        ) from exc
    return MetricData(dim=h.shape[0], g=h, chol=chol, inv=np.linalg.inv(h))


def metric(spec: PotentialSpec, x) -> MetricData:
    """Hessian metric g = D^2 Phi at an interior point."""
    return _metric_from_matrix(spec.jet(x, order=2).hessian())


def grad_map(spec: PotentialSpec, x) -> np.ndarray:
    """The gradient chart u = grad Phi(x) into the dual domain."""
    return spec.jet(x, order=1).gradient()


def inverse_grad_map(spec: PotentialSpec, u, seed=None, tol: float = NEWTON_TOL) -> np.ndarray:
    """Solve grad Phi(x) = u by damped Newton with the domain as line-search guard.

    The gradient map of a strongly convex potential is globally invertible on
    its image, but undamped iterates can leave the domain; steps are halved
    until the iterate is interior and the residual decreases.  Raises
    ``LeftDomain`` when no admissible step exists (u outside the dual domain)
    and ``NotConverged`` after the iteration budget.
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(seed if seed is not None else spec.interior_point, dtype=float).copy()
    if not spec.contains(x):
        raise DomainViolation("Newton seed outside the domain")
    # merit function Phi(x) - <u, x>: strictly convex with the solution as its
    # unique minimizer, so the Newton direction is always a descent direction
    jet = spec.jet(x, order=2)
    merit = jet.value - float(u @ x)
    res = jet.gradient() - u
    for _ in range(NEWTON_MAX_ITER):
        if float(np.max(np.abs(res))) < tol:
            return x
        step = np.linalg.solve(jet.hessian(), -res)
        decrement = float(res @ step)  # equals -res^T H^{-1} res < 0
        t = 1.0
        while True:
            cand = x + t * step
            if spec.contains(cand):
                cand_jet = spec.jet(cand, order=2)
                cand_merit = cand_jet.value - float(u @ cand)
                if cand_merit <= merit + 1e-4 * t * decrement or float(
                    np.max(np.abs(cand_jet.gradient() - u))
                ) < tol:
                    break
            t *= 0.5
            if t < 1e-14:
                raise LeftDomain(
                    "line search cannot stay interior; target u is outside the dual domain"
                )
        x, jet, merit = cand, cand_jet, cand_merit
        res = jet.gradient() - u
    raise NotConverged(
        f"Newton inversion did not reach {tol:g} in {NEWTON_MAX_ITER} iterations"
    )


def legendre_value(spec: PotentialSpec, u, seed=None) -> float:
    """Fenchel value <x, u> - Phi(x) at the Newton solution of grad Phi(x) = u."""
    u = np.asarray(u, dtype=float)
    x = inverse_grad_map(spec, u, seed=seed)
    return float(x @ u) - spec.value(x)


def riemann(spec: PotentialSpec, x) -> np.ndarray:
    """Curvature tensor of the Hessian metric in affine coordinates.

    R_ijkl = -1/4 sum_pq Phi^{pq} (Phi_jlp Phi_ikq - Phi_ilp Phi_jkq).
    """
    jet = spec.jet(x, order=3)
    hinv = np.linalg.inv(jet.hessian())
    t = jet.tensor(3)
    return -0.25 * (
        np.einsum("pq,jlp,ikq->ijkl", hinv, t, t)
        - np.einsum("pq,ilp,jkq->ijkl", hinv, t, t)
    )


def sectional(spec: PotentialSpec, x, v, w) -> float:
    """Sectional curvature of the plane spanned by v, w at x."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    md = metric(spec, x)
    gram = md.inner(v, v) * md.inner(w, w) - md.inner(v, w) ** 2
    if gram <= 1e-12 * md.inner(v, v) * md.inner(w, w):
        raise DegeneratePlane("direction vectors are numerically parallel")
    r = riemann(spec, x)
    num = float(np.einsum("ijkl,i,j,k,l->", r, v, w, v, w))
    return num / gram


def pullback_residual(metric_src, metric_dst, chart: ChartMap, x) -> float:
    """Isometry defect ||J^T g_dst(f(x)) J - g_src(x)||_max for a chart f."""
    x = np.asarray(x, dtype=float)
    if not chart.source_contains(x):
        raise DomainViolation("point outside the chart's source domain")
    y = chart(x)
    if not chart.target_contains(y):
        raise DomainViolation("mapped point outside the chart's target domain")
    jac = chart.jacobian(x)
    g_src = np.asarray(metric_src(x), dtype=float)
    g_dst = np.asarray(metric_dst(y), dtype=float)
    return float(np.max(np.abs(jac.T @ g_dst @ jac - g_src)))


# --- exact jet transport to the Legendre dual -------------------------------

def dual_jet(spec: PotentialSpec, u, order: int = 4, x=None, seed=None) -> Jet:
    """Jet of the Fenchel dual Phi* at u, transported from the primal side.

    Uses the inverse-function identities: with H = D^2 Phi(x) at
    x = (grad Phi)^{-1}(u),

        D^2 Phi*          = H^{-1}
        Phi*_{ijk}        = -H^{ia} H^{jb} H^{kc} Phi_{abc}
        Phi*_{ijkl}       = (transport of the third derivative) - H^{ml}
                            H^{ia} H^{jb} H^{kc} Phi_{abcm}

    These identities are exact, so transported jets carry no discretization
    error and serve as the numeric Legendre oracle at derivative level.
    """
    u = np.asarray(u, dtype=float)
    if x is None:
        x = inverse_grad_map(spec, u, seed=seed)
    else:
        x = np.asarray(x, dtype=float)
    jet = spec.jet(x, order=min(order, 4))
    hinv = np.linalg.inv(jet.hessian())
    table = {(): float(x @ u) - jet.value}
    if order >= 1:
        for i in range(spec.dim):
            table[(i,)] = float(x[i])
    if order >= 2:
        for i in range(spec.dim):
            for j in range(i, spec.dim):
                table[(i, j)] = float(hinv[i, j])
    if order >= 3:
        t3 = jet.tensor(3)
        d3 = -np.einsum("ia,jb,kc,abc->ijk", hinv, hinv, hinv, t3)
        _fill(table, d3, 3)
    if order >= 4:
        t4 = jet.tensor(4)
        # the three single-factor transport terms are index permutations of
        # one contraction
        base = np.einsum(
            "ml,ip,pqm,qa,jb,kc,abc->ijkl", hinv, hinv, t3, hinv, hinv, hinv, t3
        )
        d4 = (
            base
            + np.einsum("jikl->ijkl", base)
            + np.einsum("kjil->ijkl", base)
            - np.einsum("ml,ia,jb,kc,abcm->ijkl", hinv, hinv, hinv, hinv, t4)
        )
        _fill(table, d4, 4)
    return Jet(spec.dim, order, u, table)


def _fill(table: dict, tensor: np.ndarray, rank: int) -> None:
    n = tensor.shape[0]
    for idx in itertools.combinations_with_replacement(range(n), rank):
        table[idx] = float(tensor[idx])


class NumericDual:
    """Potential-like view of the Fenchel dual obtained by jet transport.

    Quacks like :class:`PotentialSpec` for every consumer that only needs
    ``dim``, ``name``, ``contains``, ``value``, ``jet`` and sampling; used
    whenever a catalogue entry has no closed-form dual.
    """

    def __init__(self, primal: PotentialSpec):
        self.primal = primal
        self.name = primal.name + "*"
        self.dim = primal.dim
        self.dual = primal
        self.interior_point = grad_map(primal, primal.interior_point)

    def contains(self, u) -> bool:
        try:
            inverse_grad_map(self.primal, u)
            return True
        except (LeftDomain, NotConverged):
            return False

    def value(self, u) -> float:
        return legendre_value(self.primal, u)

    def jet(self, u, order: int = 4) -> Jet:
        return dual_jet(self.primal, u, order=order)

    def sample(self, rng) -> np.ndarray:
        return grad_map(self.primal, self.primal.sample(rng))

    def sample_points(self, rng, count: int) -> np.ndarray:
        return np.array([self.sample(rng) for _ in range(count)])

    def __repr__(self):
        return f"NumericDual({self.primal.name!r})"


def dual_view(spec: PotentialSpec):
    """The closed-form dual if the catalogue has one, else a NumericDual."""
    return spec.dual if spec.dual is not None else NumericDual(spec)


def dual_hessian_fd(spec: PotentialSpec, u, step: float = 2e-3) -> np.ndarray:
    """Independent dual-Hessian oracle: Richardson-extrapolated differences
    of the Newton-computed gradient-inverse map u -> x(u).

    Goes through the sup/Newton route only, never the transport identities,
    so it can certify the dual-Hessian identity for potentials without a
    closed-form conjugate.
    """
    u = np.asarray(u, dtype=float)
    n = spec.dim

    def jac(h):
        cols = []
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            xp = inverse_grad_map(spec, u + e, tol=1e-13)
            xm = inverse_grad_map(spec, u - e, tol=1e-13)
            cols.append((xp - xm) / (2.0 * h))
        return np.array(cols).T

    j = (4.0 * jac(step / 2.0) - jac(step)) / 3.0
    return 0.5 * (j + j.T)
