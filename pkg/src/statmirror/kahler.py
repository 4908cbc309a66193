"""Curvature of the semi-flat Kahler metric on the tube domain over a
Hessian base.

The Kahler potential is the fiber-constant lift of the convex base potential,
so every curvature quantity reduces to real base derivatives: with
z = x + iy and the lift constant in y,

    g_{i jbar}       = Phi_ij / 4
    R_{i jbar k lbar} = ( -Phi_ijkl + Phi^{pq} Phi_ikp Phi_jlq ) / 16

No complex arithmetic appears at runtime.  The metric normalization comes
from omega = (i/2) Phi_ij dz^i wedge dzbar^j; under it the normal-family tube
has scalar curvature exactly -6 and the isotropic-normal family -2(n+1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hessian
from .errors import NotOrthogonal, ZeroVector
from .jets import Jet

#: overall sign of the anti-bisectional (MTW-type) contraction; +1 makes the
#: inverse-Gaussian dual strictly negative on orthogonal pairs, which is the
#: one strict-sign case in the catalogue and therefore pins the calibration.
MTW_SIGN = 1.0


@dataclass(frozen=True)
class KahlerCurvature:
    """Components R_{i jbar k lbar} over base indices, stored real."""

    point: np.ndarray
    components: np.ndarray

    def symmetry_defect(self) -> float:
        r = self.components
        d1 = np.max(np.abs(r - np.einsum("kjil->ijkl", r)))
        d2 = np.max(np.abs(r - np.einsum("ilkj->ijkl", r)))
        d3 = np.max(np.abs(r - np.einsum("jilk->ijkl", r)))
        return float(max(d1, d2, d3))


@dataclass(frozen=True)
class RicciData:
    """Ricci data of the lifted metric at a base point.

    ``form`` is the (1,1)-form matrix -1/4 d^2 log det D^2 Phi, ``mixed``
    the index-lifted tensor Ric_i^j, ``potential`` the Ricci potential
    rho = -log det D^2 Phi, and ``scalar`` the trace of ``mixed``.
    """

    form: np.ndarray
    mixed: np.ndarray
    potential: float
    scalar: float


def _tensors(spec, x, order: int):
    jet: Jet = spec.jet(x, order=order)
    h = jet.hessian()
    hinv = np.linalg.inv(h)
    t3 = jet.tensor(3) if order >= 3 else None
    t4 = jet.tensor(4) if order >= 4 else None
    return jet, h, hinv, t3, t4


def kahler_curvature(spec, x) -> KahlerCurvature:
    """Full curvature tensor of the lifted metric, base components."""
    _, _, hinv, t3, t4 = _tensors(spec, x, order=4)
    r = (-t4 + np.einsum("pq,ikp,jlq->ijkl", hinv, t3, t3)) / 16.0
    return KahlerCurvature(point=np.asarray(x, dtype=float), components=r)


def _logdet_derivatives(hinv, t3, t4):
    """Gradient and Hessian of log det D^2 Phi from jets.

    d_i log det H   = H^{ab} Phi_abi
    d_ij log det H  = H^{ab} Phi_abij - H^{ap} Phi_pqj H^{qb} Phi_abi
    """
    grad = np.einsum("ab,abi->i", hinv, t3)
    hess = np.einsum("ab,abij->ij", hinv, t4) - np.einsum(
        "ap,pqj,qb,abi->ij", hinv, t3, hinv, t3
    )
    return grad, 0.5 * (hess + hess.T)


def ricci(spec, x) -> RicciData:
    jet, h, hinv, t3, t4 = _tensors(spec, x, order=4)
    sign, logabsdet = np.linalg.slogdet(h)
    _, d2 = _logdet_derivatives(hinv, t3, t4)
    form = -0.25 * d2
    mixed = -d2 @ hinv
    return RicciData(
        form=form,
        mixed=mixed,
        potential=float(-logabsdet),
        scalar=float(np.trace(mixed)),
    )


def holo_sectional(spec, x, v) -> float:
    """Holomorphic sectional curvature H(v) = R(v, vbar, v, vbar) / |v|^4."""
    v = np.asarray(v, dtype=float)
    if float(v @ v) == 0.0:
        raise ZeroVector("holomorphic sectional curvature of the zero vector")
    _, h, hinv, t3, t4 = _tensors(spec, x, order=4)
    r = (-t4 + np.einsum("pq,ikp,jlq->ijkl", hinv, t3, t3)) / 16.0
    num = float(np.einsum("ijkl,i,j,k,l->", r, v, v, v, v))
    norm2 = float(v @ (h / 4.0) @ v)
    return num / norm2**2


def orth_bisectional(spec, x, v, w) -> float:
    """Bisectional curvature R(v, vbar, w, wbar)/(|v|^2 |w|^2) for a
    metric-orthogonal pair."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if float(v @ v) == 0.0 or float(w @ w) == 0.0:
        raise ZeroVector("bisectional curvature of a zero vector")
    _, h, hinv, t3, t4 = _tensors(spec, x, order=4)
    g = h / 4.0
    nv = float(np.sqrt(v @ g @ v))
    nw = float(np.sqrt(w @ g @ w))
    if abs(float(v @ g @ w)) >= 1e-10 * nv * nw:
        raise NotOrthogonal("directions are not metric-orthogonal")
    r = (-t4 + np.einsum("pq,ikp,jlq->ijkl", hinv, t3, t3)) / 16.0
    num = float(np.einsum("ijkl,i,j,k,l->", r, v, v, w, w))
    return num / (nv**2 * nw**2)


def mtw(spec, x, xi, eta) -> float:
    """Anti-bisectional (MTW-type) contraction.

    A(xi, eta) = sum (Phi_ijp Phi^{pq} Phi_qkl - Phi_ijkl) xi^i xi^j eta^k eta^l,
    with the overall sign fixed by the calibration constant ``MTW_SIGN``.
    Callers needing the orthogonal quantity pass metric-orthogonal pairs.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if float(xi @ xi) == 0.0 or float(eta @ eta) == 0.0:
        raise ZeroVector("anti-bisectional contraction of a zero vector")
    _, _, hinv, t3, t4 = _tensors(spec, x, order=4)
    cubic = float(
        np.einsum("ijp,pq,qkl,i,j,k,l->", t3, hinv, t3, xi, xi, eta, eta)
    )
    quartic = float(np.einsum("ijkl,i,j,k,l->", t4, xi, xi, eta, eta))
    return MTW_SIGN * (cubic - quartic)


def mirror_w(spec, x, u, v) -> float:
    """Anti-bisectional curvature of the Legendre-dual manifold, expressed in
    primal data and contracted against two covectors.

    Three-term structure: a transported fourth derivative, a transported
    cubic-squared term matching the anti-bisectional contraction, and the
    derivative-of-inverse-metric correction.  Equals ``mtw`` of the dual
    potential at grad Phi(x) with the same component vectors, which the test
    suite checks against both closed-form and transported duals.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if float(u @ u) == 0.0 or float(v @ v) == 0.0:
        raise ZeroVector("mirror contraction of a zero covector")
    _, _, hinv, t3, t4 = _tensors(spec, x, order=4)
    quartic = np.einsum(
        "ia,jb,ck,dl,abcd,i,j,k,l->", hinv, hinv, hinv, hinv, t4, u, u, v, v
    )
    cubic2 = np.einsum(
        "ia,jb,abc,ke,lz,ch,ezh,i,j,k,l->",
        hinv, hinv, t3, hinv, hinv, hinv, t3, u, u, v, v,
    )
    # d/dx^d (Phi^{ia} Phi^{jb} Phi^{ck}) contracted with Phi^{dl} Phi_abc
    p1 = np.einsum(
        "ip,pqd,qa,jb,ck,dl,abc,i,j,k,l->",
        hinv, t3, hinv, hinv, hinv, hinv, t3, u, u, v, v,
    )
    p2 = np.einsum(
        "jp,pqd,qb,ia,ck,dl,abc,i,j,k,l->",
        hinv, t3, hinv, hinv, hinv, hinv, t3, u, u, v, v,
    )
    p3 = np.einsum(
        "cp,pqd,qk,ia,jb,dl,abc,i,j,k,l->",
        hinv, t3, hinv, hinv, hinv, hinv, t3, u, u, v, v,
    )
    return MTW_SIGN * float(quartic + cubic2 - (p1 + p2 + p3))


def _sample_unit(rng, n: int) -> np.ndarray:
    while True:
        v = rng.normal(size=n)
        norm = float(np.linalg.norm(v))
        if norm > 1e-8:
            return v / norm


def sample_direction(rng, n: int) -> np.ndarray:
    """Uniform direction on the Euclidean sphere."""
    return _sample_unit(rng, n)


def sample_orthogonal_pair(rng, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """A pair of directions orthogonal in the metric inner product.

    The second vector is Gram-Schmidt projected against the first; pairs with
    conditioning below 1e-6 are rejected and resampled.
    """
    n = g.shape[0]
    while True:
        v = _sample_unit(rng, n)
        w = _sample_unit(rng, n)
        gv = float(v @ g @ v)
        w_proj = w - (float(v @ g @ w) / gv) * v
        norm = float(np.linalg.norm(w_proj))
        if norm > 1e-6:
            return v, w_proj / norm
