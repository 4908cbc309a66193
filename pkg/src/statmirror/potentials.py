"""The catalogue of convex potentials and their closed-form Legendre duals.

Every entry is a :class:`PotentialSpec`: a named jet-differentiable convex
program together with a domain predicate, a reference interior point, and a
deterministic interior-point sampler.  Where a closed-form dual exists the
two specs are cross-linked; otherwise the numeric Legendre machinery in
:mod:`statmirror.hessian` supplies dual jets.

Catalogue names accepted by :func:`get_spec`: ``normal``, ``isomulnor-N``,
``negtri``, ``invgau``, ``simplex-N``, ``quad-N``, ``coshlog``, ``coslog``,
``cone``, ``logorthant-N``, ``soliton``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets
from .errors import UnknownName
from .jets import Jet, JetProgram


@dataclass
class PotentialSpec:
    """A named convex potential program on a domain, jet-differentiable to
    order 4."""

    name: str
    dim: int
    program: JetProgram
    interior_point: np.ndarray
    sample: Callable[[np.random.Generator], np.ndarray]
    dual: Optional["PotentialSpec"] = None
    charts: tuple = ()

    def contains(self, x) -> bool:
        return self.program.contains(np.asarray(x, dtype=float))

    def value(self, x) -> float:
        return self.program(x)

    def jet(self, x, order: int = jets.MAX_ORDER) -> Jet:
        return jets.jet_eval(self.program, x, order)

    def sample_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return np.array([self.sample(rng) for _ in range(count)])

    def __repr__(self):
        return f"PotentialSpec({self.name!r}, dim={self.dim})"


@dataclass(frozen=True)
class ChartMap:
    """A coordinate change with a jet-differentiable forward map."""

    name: str
    programs: tuple[JetProgram, ...]
    source_contains: Callable[[np.ndarray], bool]
    target_contains: Callable[[np.ndarray], bool]

    @property
    def dim_in(self) -> int:
        return self.programs[0].dim

    @property
    def dim_out(self) -> int:
        return len(self.programs)

    def __call__(self, x) -> np.ndarray:
        return np.array([p(x) for p in self.programs])

    def jacobian(self, x) -> np.ndarray:
        """Rows indexed by output coordinate, columns by input coordinate."""
        return np.array(
            [jets.jet_eval(p, x, order=1).gradient() for p in self.programs]
        )


def _pair(primal: PotentialSpec, dual: PotentialSpec) -> PotentialSpec:
    primal.dual = dual
    dual.dual = primal
    return primal


# --- normal family, natural and expectation sides -------------------------

def _normal_program() -> JetProgram:
    def func(v):
        x1, x2 = v
        return -(x1 * x1) / (4.0 * x2) - 0.5 * jets.log(-x2 / math.pi)

    return JetProgram(dim=2, contains=lambda x: x[1] < 0.0, func=func)


def _normal_dual_program() -> JetProgram:
    def func(v):
        u1, u2 = v
        return -0.5 - 0.5 * jets.log(u2 - u1 * u1)

    return JetProgram(dim=2, contains=lambda u: u[1] - u[0] * u[0] > 0.0, func=func)


def _normal_spec() -> PotentialSpec:
    def sample(rng):
        return np.array([rng.uniform(-2.0, 2.0), -math.exp(rng.uniform(math.log(0.25), math.log(3.0)))])

    def sample_dual(rng):
        u1 = rng.uniform(-1.5, 1.5)
        return np.array([u1, u1 * u1 + math.exp(rng.uniform(math.log(0.3), math.log(2.5)))])

    primal = PotentialSpec(
        name="normal",
        dim=2,
        program=_normal_program(),
        interior_point=np.array([0.0, -0.5]),
        sample=sample,
    )
    dual = PotentialSpec(
        name="normal*",
        dim=2,
        program=_normal_dual_program(),
        interior_point=np.array([0.0, 1.0]),
        sample=sample_dual,
    )
    return _pair(primal, dual)


# --- isotropic multivariate normal ----------------------------------------
#
# The quadratic-over-linear potential with a 1/2 log barrier.  The 2..n block
# coefficient is -1/(2 x1) (positive on x1 < 0); with this sign the n = 2 case
# is the normal potential up to the affine change x1 -> 2 x2 and an additive
# constant, and the Hessian is positive definite on the whole half-space.

def _isomulnor_program(n: int) -> JetProgram:
    def func(v):
        s = 0.0
        for i in range(1, n):
            s = s + v[i] * v[i]
        return 0.5 * (-s / v[0] - jets.log(-v[0]))

    return JetProgram(dim=n, contains=lambda x: x[0] < 0.0, func=func)


def _isomulnor_dual_program(n: int) -> JetProgram:
    def func(v):
        s = 0.0
        for i in range(1, n):
            s = s + v[i] * v[i]
        return -0.5 - 0.5 * jets.log(2.0 * v[0] - s)

    def contains(u):
        return 2.0 * u[0] - float(np.dot(u[1:], u[1:])) > 0.0

    return JetProgram(dim=n, contains=contains, func=func)


def _isomulnor_spec(n: int) -> PotentialSpec:
    if n < 2:
        raise UnknownName("isomulnor requires dimension >= 2")

    def sample(rng):
        x = rng.uniform(-1.2, 1.2, size=n)
        x[0] = -math.exp(rng.uniform(math.log(0.4), math.log(2.5)))
        return x

    def sample_dual(rng):
        u = rng.uniform(-1.0, 1.0, size=n)
        u[0] = 0.5 * float(np.dot(u[1:], u[1:])) + math.exp(
            rng.uniform(math.log(0.2), math.log(1.5))
        )
        return u

    point = np.zeros(n)
    point[0] = -1.0
    point[1:] = 0.25
    dual_point = np.zeros(n)
    dual_point[1:] = 0.25
    dual_point[0] = 0.5 * float(np.dot(dual_point[1:], dual_point[1:])) + 0.5

    primal = PotentialSpec(
        name=f"isomulnor-{n}",
        dim=n,
        program=_isomulnor_program(n),
        interior_point=point,
        sample=sample,
    )
    dual = PotentialSpec(
        name=f"isomulnor-{n}*",
        dim=n,
        program=_isomulnor_dual_program(n),
        interior_point=dual_point,
        sample=sample_dual,
    )
    return _pair(primal, dual)


# --- negative trinomial -----------------------------------------------------

def _negtri_program() -> JetProgram:
    def func(v):
        return -jets.log(1.0 - jets.exp(v[0]) - jets.exp(v[1]))

    def contains(t):
        # e^a + e^b >= 1 whenever either coordinate is >= 0; guard before exp
        # to avoid overflow on far-out probes.
        return t[0] < 0.0 and t[1] < 0.0 and math.exp(t[0]) + math.exp(t[1]) < 1.0

    return JetProgram(dim=2, contains=contains, func=func)


def _negtri_dual_program() -> JetProgram:
    def func(v):
        e1, e2 = v
        total = 1.0 + e1 + e2
        return e1 * jets.log(e1) + e2 * jets.log(e2) - total * jets.log(total)

    return JetProgram(dim=2, contains=lambda e: e[0] > 0.0 and e[1] > 0.0, func=func)


def _negtri_spec() -> PotentialSpec:
    def sample(rng):
        p1 = rng.uniform(0.05, 0.65)
        p2 = rng.uniform(0.05, 0.9 - p1)
        return np.array([math.log(p1), math.log(p2)])

    def sample_dual(rng):
        return np.exp(rng.uniform(math.log(0.1), math.log(4.0), size=2))

    primal = PotentialSpec(
        name="negtri",
        dim=2,
        program=_negtri_program(),
        interior_point=np.array([math.log(0.25), math.log(0.25)]),
        sample=sample,
    )
    dual = PotentialSpec(
        name="negtri*",
        dim=2,
        program=_negtri_dual_program(),
        interior_point=np.array([0.5, 0.5]),
        sample=sample_dual,
    )
    return _pair(primal, dual)


# --- inverse Gaussian -------------------------------------------------------
#
# Potential on the open third quadrant.  Its gradient image is
# {eta1 > 0, 4 eta1 eta2 > 1} and the Fenchel dual has the closed form below;
# both are verified against the numeric Legendre oracle in the test suite.

def _invgau_program() -> JetProgram:
    def func(v):
        t1, t2 = v
        return -jets.sqrt(t1 * t2) - 0.5 * jets.log(-t2)

    return JetProgram(dim=2, contains=lambda t: t[0] < 0.0 and t[1] < 0.0, func=func)


def _invgau_dual_program() -> JetProgram:
    def func(v):
        e1, e2 = v
        return 0.5 * (-1.0 + jets.log(2.0 * e1 / (4.0 * e1 * e2 - 1.0)))

    return JetProgram(
        dim=2,
        contains=lambda e: e[0] > 0.0 and 4.0 * e[0] * e[1] - 1.0 > 0.0,
        func=func,
    )


def _invgau_spec() -> PotentialSpec:
    def sample(rng):
        return -np.exp(rng.uniform(math.log(0.3), math.log(3.0), size=2))

    def sample_dual(rng):
        e1 = math.exp(rng.uniform(math.log(0.2), math.log(2.5)))
        slack = math.exp(rng.uniform(math.log(0.3), math.log(4.0)))
        return np.array([e1, (1.0 + slack) / (4.0 * e1)])

    primal = PotentialSpec(
        name="invgau",
        dim=2,
        program=_invgau_program(),
        interior_point=np.array([-1.0, -1.0]),
        sample=sample,
    )
    dual = PotentialSpec(
        name="invgau*",
        dim=2,
        program=_invgau_dual_program(),
        interior_point=np.array([0.5, 1.0]),
        sample=sample_dual,
    )
    return _pair(primal, dual)


# --- probability simplex ----------------------------------------------------

def _simplex_program(n: int) -> JetProgram:
    def func(v):
        s = 1.0
        for i in range(n):
            s = s + jets.exp(v[i])
        return jets.log(s)

    return JetProgram(dim=n, contains=lambda x: True, func=func)


def _simplex_dual_program(n: int) -> JetProgram:
    def func(v):
        total = 0.0
        out = 0.0
        for i in range(n):
            out = out + v[i] * jets.log(v[i])
            total = total + v[i]
        rest = 1.0 - total
        return out + rest * jets.log(rest)

    def contains(u):
        return bool(np.all(u > 0.0)) and float(np.sum(u)) < 1.0

    return JetProgram(dim=n, contains=contains, func=func)


def _simplex_spec(n: int) -> PotentialSpec:
    def sample(rng):
        return rng.normal(0.0, 1.2, size=n)

    def sample_dual(rng):
        w = rng.uniform(0.1, 1.0, size=n + 1)
        return w[:n] / float(np.sum(w))

    primal = PotentialSpec(
        name=f"simplex-{n}",
        dim=n,
        program=_simplex_program(n),
        interior_point=np.zeros(n),
        sample=sample,
    )
    dual = PotentialSpec(
        name=f"simplex-{n}*",
        dim=n,
        program=_simplex_dual_program(n),
        interior_point=np.full(n, 1.0 / (n + 1.0)),
        sample=sample_dual,
    )
    return _pair(primal, dual)


# --- Frobenius catalogue (flat Hessian metrics) -----------------------------

def _quad_spec(n: int) -> PotentialSpec:
    def func(v):
        s = 0.0
        for i in range(n):
            s = s + v[i] * v[i]
        return 0.5 * s

    spec = PotentialSpec(
        name=f"quad-{n}",
        dim=n,
        program=JetProgram(dim=n, contains=lambda x: True, func=func),
        interior_point=np.zeros(n),
        sample=lambda rng: rng.normal(0.0, 1.5, size=n),
    )
    spec.dual = spec  # the unique self-dual structure
    return spec


def _coshlog_spec() -> PotentialSpec:
    def func(v):
        return jets.log(jets.cosh(v[0]) + jets.cosh(v[1]))

    return PotentialSpec(
        name="coshlog",
        dim=2,
        program=JetProgram(dim=2, contains=lambda x: True, func=func),
        interior_point=np.array([0.3, -0.7]),
        sample=lambda rng: rng.uniform(-1.8, 1.8, size=2),
    )


def _coslog_spec() -> PotentialSpec:
    def func(v):
        return -jets.log(jets.cos(v[0]) + jets.cos(v[1]))

    return PotentialSpec(
        name="coslog",
        dim=2,
        # the open diamond |x1| + |x2| < pi, on which cos x1 + cos x2 > 0
        program=JetProgram(
            dim=2,
            contains=lambda x: abs(x[0]) + abs(x[1]) < math.pi,
            func=func,
        ),
        interior_point=np.array([0.4, -0.2]),
        sample=lambda rng: _sample_diamond(rng),
    )


def _sample_diamond(rng) -> np.ndarray:
    while True:
        x = rng.uniform(-0.75 * math.pi, 0.75 * math.pi, size=2)
        if abs(x[0]) + abs(x[1]) < 0.8 * math.pi:
            return x


def _cone_spec() -> PotentialSpec:
    def func(v):
        return -jets.log(v[0] * v[0] - v[1] * v[1])

    def func_dual(v):
        u1, u2 = v
        return -2.0 - jets.log((u2 - u1) / 2.0) - jets.log(-(u1 + u2) / 2.0)

    def sample(rng):
        t = np.exp(rng.uniform(math.log(0.3), math.log(3.0), size=2))
        return np.array([0.5 * (t[0] + t[1]), 0.5 * (t[1] - t[0])])

    def sample_dual(rng):
        v = -np.exp(rng.uniform(math.log(0.2), math.log(3.0), size=2))
        return np.array([v[0] + v[1], v[1] - v[0]])

    primal = PotentialSpec(
        name="cone",
        dim=2,
        program=JetProgram(
            dim=2, contains=lambda x: x[0] > abs(x[1]), func=func
        ),
        interior_point=np.array([2.0, 0.5]),
        sample=sample,
    )
    dual = PotentialSpec(
        name="cone*",
        dim=2,
        program=JetProgram(
            dim=2,
            contains=lambda u: u[1] > u[0] and u[0] + u[1] < 0.0,
            func=func_dual,
        ),
        interior_point=np.array([-2.0, 1.0]),
        sample=sample_dual,
    )
    return _pair(primal, dual)


def _logorthant_spec(n: int) -> PotentialSpec:
    def func(v):
        out = 0.0
        for i in range(n):
            out = out - jets.log(v[i])
        return out

    def func_dual(v):
        out = -float(n)
        for i in range(n):
            out = out - jets.log(-v[i])
        return out

    primal = PotentialSpec(
        name=f"logorthant-{n}",
        dim=n,
        program=JetProgram(
            dim=n, contains=lambda t: bool(np.all(t > 0.0)), func=func
        ),
        interior_point=np.ones(n),
        sample=lambda rng: np.exp(rng.uniform(math.log(0.3), math.log(3.0), size=n)),
    )
    dual = PotentialSpec(
        name=f"logorthant-{n}*",
        dim=n,
        program=JetProgram(
            dim=n, contains=lambda u: bool(np.all(u < 0.0)), func=func_dual
        ),
        interior_point=-np.ones(n),
        sample=lambda rng: -np.exp(rng.uniform(math.log(0.3), math.log(3.0), size=n)),
    )
    return _pair(primal, dual)


# --- the expanding-soliton family -------------------------------------------
#
# Phi_t(x) = -x1^2 / (4 x2) - t log(-x2).  The 1/4 coefficient is the unique
# choice that makes the closed-form dual family Legendre-consistent and makes
# t = 1/2 the normal-family potential up to an additive constant.

def soliton_potential(t: float) -> PotentialSpec:
    if t <= 0.0:
        raise UnknownName("soliton family requires t > 0")

    def func(v):
        x1, x2 = v
        return -(x1 * x1) / (4.0 * x2) - t * jets.log(-x2)

    def func_dual(v):
        u1, u2 = v
        return -t + t * math.log(t) - t * jets.log(u2 - u1 * u1)

    def sample(rng):
        return np.array(
            [rng.uniform(-2.0, 2.0), -math.exp(rng.uniform(math.log(0.25), math.log(3.0)))]
        )

    def sample_dual(rng):
        u1 = rng.uniform(-1.5, 1.5)
        return np.array([u1, u1 * u1 + math.exp(rng.uniform(math.log(0.3), math.log(2.5)))])

    primal = PotentialSpec(
        name="soliton" if t == 1.0 else f"soliton@t={t:g}",
        dim=2,
        program=JetProgram(dim=2, contains=lambda x: x[1] < 0.0, func=func),
        interior_point=np.array([0.0, -1.0]),
        sample=sample,
    )
    dual = PotentialSpec(
        name=primal.name + "*",
        dim=2,
        program=JetProgram(
            dim=2, contains=lambda u: u[1] - u[0] * u[0] > 0.0, func=func_dual
        ),
        interior_point=np.array([0.0, 1.0]),
        sample=sample_dual,
    )
    return _pair(primal, dual)


_FIXED = {
    "normal": _normal_spec,
    "negtri": _negtri_spec,
    "invgau": _invgau_spec,
    "coshlog": _coshlog_spec,
    "coslog": _coslog_spec,
    "cone": _cone_spec,
    "soliton": lambda: soliton_potential(1.0),
}

_PARAMETRIC = {
    "isomulnor": _isomulnor_spec,
    "simplex": _simplex_spec,
    "quad": _quad_spec,
    "logorthant": _logorthant_spec,
}

_MAX_DIM = 6
_cache: dict[str, PotentialSpec] = {}


def get_spec(name: str) -> PotentialSpec:
    """Resolve a catalogue name like ``normal`` or ``isomulnor-3``.

    A trailing ``*`` selects the closed-form dual when one exists.
    """
    key = name.strip().lower()
    if key in _cache:
        return _cache[key]
    want_dual = key.endswith("*")
    base = key[:-1] if want_dual else key
    spec: Optional[PotentialSpec] = None
    if base in _FIXED:
        spec = _FIXED[base]()
    elif "-" in base:
        stem, _, suffix = base.rpartition("-")
        if stem in _PARAMETRIC and suffix.isdigit():
            n = int(suffix)
            if not 1 <= n <= _MAX_DIM:
                raise UnknownName(
                    f"{stem} dimension {n} outside the supported range 1..{_MAX_DIM}"
                )
            spec = _PARAMETRIC[stem](n)
    if spec is None:
        raise UnknownName(f"unknown catalogue potential {name!r}")
    _cache[base] = spec
    if spec.dual is not None:
        _cache[base + "*"] = spec.dual
    if want_dual:
        if spec.dual is None:
            raise UnknownName(f"{base} has no closed-form dual in the catalogue")
        return spec.dual
    return spec


def catalogue_names(max_dim: int = 3) -> list[str]:
    """Primal catalogue names, expanding parametric families up to max_dim."""
    names = [n for n in _FIXED]
    for stem in _PARAMETRIC:
        lo = 2 if stem in ("isomulnor", "simplex") else 1
        names.extend(f"{stem}-{n}" for n in range(max(lo, 2), max_dim + 1))
    return names


FROBENIUS_NAMES = ("quad-2", "coshlog", "coslog", "cone", "logorthant-2")
"""The five flat (WDVV-solving) catalogue entries in dimension 2."""
