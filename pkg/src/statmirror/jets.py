"""Exact forward-mode differentiation of potential programs to total order 4.

A potential program is an ordinary Python callable that receives one number
per coordinate and combines them with ``+ - * / **`` and the elementary
functions exported here (:func:`exp`, :func:`log`, :func:`sqrt`, :func:`cos`,
:func:`cosh`).  Fed plain floats it returns the potential value; fed
:class:`Series` objects it propagates a truncated multivariate Taylor
expansion, from which :func:`jet_eval` assembles every mixed partial
derivative up to the requested total order.

The expansion is exact (no truncation error below the cutoff degree): series
multiplication is the Leibniz convolution and elementary functions are
composed through their univariate Taylor polynomials, which terminate exactly
because the inner perturbation has no constant term.

An independent central finite-difference oracle (:func:`jet_fd_check`) is
provided so every downstream curvature formula can be cross-checked against
derivatives that never touch the series arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ArithmeticDomain, DomainViolation

MAX_ORDER = 4

Number = "float | Series"


@lru_cache(maxsize=None)
def _exponents(dim: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All exponent multi-indices with total degree <= order."""
    out = [
        alpha
        for alpha in itertools.product(range(order + 1), repeat=dim)
        if sum(alpha) <= order
    ]
    out.sort(key=lambda a: (sum(a), a))
    return tuple(out)


@lru_cache(maxsize=None)
def _factorial_alpha(alpha: tuple[int, ...]) -> float:
    p = 1.0
    for a in alpha:
        p *= math.factorial(a)
    return p


class Series:
    """Truncated multivariate Taylor polynomial around a base point.

    Coefficients are stored sparsely as ``{exponent tuple: coefficient}``;
    the coefficient of ``alpha`` is the Taylor coefficient, i.e. the partial
    derivative divided by ``alpha!``.
    """

    __slots__ = ("dim", "order", "coef")

    def __init__(self, dim: int, order: int, coef: dict):
        self.dim = dim
        self.order = order
        self.coef = coef

    @classmethod
    def constant(cls, value: float, dim: int, order: int) -> "Series":
        zero = (0,) * dim
        return cls(dim, order, {zero: float(value)} if value != 0.0 else {})

    @classmethod
    def variable(cls, index: int, value: float, dim: int, order: int) -> "Series":
        zero = (0,) * dim
        unit = tuple(1 if i == index else 0 for i in range(dim))
        coef = {unit: 1.0}
        if value != 0.0:
            coef[zero] = float(value)
        return cls(dim, order, coef)

    @property
    def value(self) -> float:
        return self.coef.get((0,) * self.dim, 0.0)

    def _coerce(self, other) -> "Series | None":
        if isinstance(other, Series):
            if other.dim != self.dim or other.order != self.order:
                raise ValueError("mixing series of different shape")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Series.constant(float(other), self.dim, self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        coef = dict(self.coef)
        for k, v in o.coef.items():
            coef[k] = coef.get(k, 0.0) + v
        return Series(self.dim, self.order, coef)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.dim, self.order, {k: -v for k, v in self.coef.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        coef = dict(self.coef)
        for k, v in o.coef.items():
            coef[k] = coef.get(k, 0.0) - v
        return Series(self.dim, self.order, coef)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            c = float(other)
            return Series(self.dim, self.order, {k: v * c for k, v in self.coef.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        order = self.order
        coef: dict = {}
        for a, va in self.coef.items():
            ta = sum(a)
            for b, vb in o.coef.items():
                if ta + sum(b) > order:
                    continue
                key = tuple(x + y for x, y in zip(a, b))
                coef[key] = coef.get(key, 0.0) + va * vb
        return Series(self.dim, self.order, coef)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * (1.0 / float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * _reciprocal(o)

    def __rtruediv__(self, other):
        return _reciprocal(self) * other

    def __pow__(self, exponent):
        if isinstance(exponent, (int, np.integer)) or (
            isinstance(exponent, float) and exponent.is_integer()
        ):
            n = int(exponent)
            if n == 0:
                return Series.constant(1.0, self.dim, self.order)
            if n < 0:
                return _reciprocal(self) ** (-n)
            out = self
            for _ in range(n - 1):
                out = out * self
            return out
        c0 = self.value
        if c0 <= 0.0:
            raise ArithmeticDomain("non-integer power of a non-positive base")
        r = float(exponent)
        derivs, fall = [], 1.0
        for k in range(self.order + 1):
            derivs.append(fall * c0 ** (r - k))
            fall *= r - k
        return _compose(self, derivs)

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Series(dim={self.dim}, order={self.order}, value={self.value})"


def _compose(f: Series, derivs: Sequence[float]) -> Series:
    """Compose a univariate g with f: sum_k g^(k)(f0)/k! (f - f0)^k.

    Exact at the truncation order because ``f - f0`` has no constant term.
    """
    zero = (0,) * f.dim
    p_coef = {k: v for k, v in f.coef.items() if k != zero}
    p = Series(f.dim, f.order, p_coef)
    out = Series.constant(derivs[0], f.dim, f.order)
    power = Series.constant(1.0, f.dim, f.order)
    fact = 1.0
    for k in range(1, f.order + 1):
        power = power * p
        fact *= k
        if not power.coef:
            break
        out = out + power * (derivs[k] / fact)
    return out


def _reciprocal(f: Series) -> Series:
    c0 = f.value
    if c0 == 0.0:
        raise ArithmeticDomain("division by a series with zero value")
    derivs, sign = [], 1.0
    fact = 1.0
    for k in range(f.order + 1):
        derivs.append(sign * fact / c0 ** (k + 1))
        sign = -sign
        fact *= k + 1
    return _compose(f, derivs)


def _unary(series_derivs, float_fn, domain_check=None, domain_msg=""):
    def apply(x):
        if isinstance(x, Series):
            c0 = x.value
            if domain_check is not None and not domain_check(c0):
                raise ArithmeticDomain(domain_msg)
            return _compose(x, series_derivs(c0, x.order))
        xf = float(x)
        if domain_check is not None and not domain_check(xf):
            raise ArithmeticDomain(domain_msg)
        return float_fn(xf)

    return apply


exp = _unary(
    lambda c, order: [math.exp(c)] * (order + 1),
    math.exp,
)

log = _unary(
    lambda c, order: [math.log(c)]
    + [(-1.0) ** (k - 1) * math.factorial(k - 1) / c**k for k in range(1, order + 1)],
    math.log,
    domain_check=lambda c: c > 0.0,
    domain_msg="log of a non-positive argument",
)


def _sqrt_derivs(c, order):
    out, coeff = [math.sqrt(c)], 0.5
    for k in range(1, order + 1):
        out.append(coeff * c ** (0.5 - k))
        coeff *= 0.5 - k
    return out


sqrt = _unary(
    _sqrt_derivs,
    math.sqrt,
    domain_check=lambda c: c > 0.0,
    domain_msg="sqrt of a non-positive argument",
)

cos = _unary(
    lambda c, order: [
        (math.cos, lambda t: -math.sin(t), lambda t: -math.cos(t), math.sin)[k % 4](c)
        for k in range(order + 1)
    ],
    math.cos,
)

cosh = _unary(
    lambda c, order: [math.cosh(c) if k % 2 == 0 else math.sinh(c) for k in range(order + 1)],
    math.cosh,
)


class Jet:
    """Value plus all mixed partial derivatives up to a total order.

    Partials are stored once per multi-index in canonical sorted index order;
    queries with permuted indices return the identical stored value.
    """

    __slots__ = ("dim", "order", "point", "_table", "_dense")

    def __init__(self, dim: int, order: int, point: np.ndarray, table: dict):
        self.dim = dim
        self.order = order
        self.point = point
        self._table = table
        self._dense: dict = {}

    @classmethod
    def from_series(cls, series: Series, point: np.ndarray) -> "Jet":
        table = {}
        for alpha in _exponents(series.dim, series.order):
            idx = tuple(
                i for i, a in enumerate(alpha) for _ in range(a)
            )  # sorted by construction
            table[idx] = series.coef.get(alpha, 0.0) * _factorial_alpha(alpha)
        return cls(series.dim, series.order, np.asarray(point, dtype=float), table)

    def partial(self, *indices: int) -> float:
        if len(indices) == 1 and isinstance(indices[0], (tuple, list)):
            indices = tuple(indices[0])
        if len(indices) > self.order:
            raise ValueError(f"requested order {len(indices)} beyond stored {self.order}")
        return self._table[tuple(sorted(indices))]

    @property
    def value(self) -> float:
        return self._table[()]

    def tensor(self, rank: int) -> np.ndarray:
        """Dense symmetric derivative tensor of the given rank."""
        if rank > self.order:
            raise ValueError(f"rank {rank} beyond stored order {self.order}")
        if rank in self._dense:
            return self._dense[rank]
        out = np.empty((self.dim,) * rank)
        for idx in itertools.product(range(self.dim), repeat=rank):
            out[idx] = self._table[tuple(sorted(idx))]
        out.flags.writeable = False
        self._dense[rank] = out
        return out

    def gradient(self) -> np.ndarray:
        return self.tensor(1)

    def hessian(self) -> np.ndarray:
        return self.tensor(2)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self._table.values())


@dataclass(frozen=True)
class JetProgram:
    """A jet-differentiable scalar program on a declared domain."""

    dim: int
    contains: Callable[[np.ndarray], bool]
    func: Callable[[Sequence], object]

    def __call__(self, point) -> float:
        """Plain float evaluation (used by the FD oracle and grid closures)."""
        point = np.asarray(point, dtype=float)
        out = self.func([float(v) for v in point])
        return float(out)


def jet_eval(program: JetProgram, point, order: int = MAX_ORDER) -> Jet:
    """Evaluate a program and all its partial derivatives up to ``order``.

    Raises ``DomainViolation`` when the point fails the program's domain
    predicate and ``ArithmeticDomain`` when an elementary function receives
    an argument outside its range (which signals a wrong convention upstream,
    since the domain predicate should have excluded the point).
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (program.dim,):
        raise DomainViolation(
            f"point of shape {point.shape} for a program of dimension {program.dim}"
        )
    if not (order >= 0 and order <= MAX_ORDER):
        raise ValueError(f"order must be within 0..{MAX_ORDER}")
    if not program.contains(point):
        raise DomainViolation(f"point {point.tolist()} outside the declared domain")
    variables = [
        Series.variable(i, point[i], program.dim, order) for i in range(program.dim)
    ]
    out = program.func(variables)
    if not isinstance(out, Series):
        out = Series.constant(float(out), program.dim, order)
    return Jet.from_series(out, point)


def _cd_stencil(alpha: tuple[int, ...], h: np.ndarray) -> dict:
    """Iterated central-difference stencil for the multi-index ``alpha``.

    Returns ``{integer offset vector: weight}``; the widest offset along an
    axis is ``alpha_i``, so all evaluation points lie in the box of radius
    ``max(alpha) * h``.
    """
    stencil = {(0,) * len(alpha): 1.0}
    for axis, reps in enumerate(alpha):
        for _ in range(reps):
            new: dict = {}
            for off, w in stencil.items():
                up = list(off)
                up[axis] += 1
                dn = list(off)
                dn[axis] -= 1
                ku, kd = tuple(up), tuple(dn)
                scale = 1.0 / (2.0 * h[axis])
                new[ku] = new.get(ku, 0.0) + w * scale
                new[kd] = new.get(kd, 0.0) - w * scale
            stencil = new
    return stencil


def jet_fd_check(
    program: JetProgram,
    point,
    order: int = MAX_ORDER,
    step: float | None = None,
) -> float:
    """Max relative deviation between jet partials and central differences.

    The default step for a derivative of total order ``m`` is
    ``eps ** (1 / (m + 2))`` scaled by the coordinate magnitude, balancing
    truncation against roundoff at each order.  One Richardson level (the
    same stencil at ``h`` and ``h/2``) removes the leading ``h^2`` truncation
    term; all evaluation points stay within the ball of radius
    ``order * step``.  Relative deviation is ``|jet - fd| / max(1, |jet|,
    |fd|)``.
    """
    point = np.asarray(point, dtype=float)
    jet = jet_eval(program, point, order)
    eps = np.finfo(float).eps

    def apply_stencil(alpha, h):
        fd = 0.0
        for off, w in _cd_stencil(alpha, h).items():
            x = point + np.asarray(off, dtype=float) * h
            if not program.contains(x):
                raise DomainViolation(
                    f"finite-difference stencil leaves the domain at {x.tolist()}"
                )
            fd += w * program(x)
        return fd

    worst = 0.0
    for alpha in _exponents(program.dim, order):
        m = sum(alpha)
        if m == 0:
            continue
        base = step if step is not None else eps ** (1.0 / (m + 2))
        h = base * np.maximum(1.0, np.abs(point))
        fd = (4.0 * apply_stencil(alpha, h / 2.0) - apply_stencil(alpha, h)) / 3.0
        exact = jet.partial(tuple(i for i, a in enumerate(alpha) for _ in range(a)))
        rel = abs(fd - exact) / max(1.0, abs(fd), abs(exact))
        worst = max(worst, rel)
    return worst
