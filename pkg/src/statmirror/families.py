"""Statistical families behind the Hessian potentials, with numeric
Fisher-information oracles.

Each :class:`StatFamily` couples a density (or pmf), sufficient statistics
and base measure to the catalogue potential of its log-partition function.
The numeric operations here (quadrature / lattice sums of score outer
products, density normalization, expectations of the sufficient statistics)
never touch the jet machinery, so they serve as independent oracles for the
potential programs.

Chart conventions, validated against these oracles:

* normal: familiar (mu, sigma), natural x = (mu/sigma^2, -1/(2 sigma^2)).
* negtri: familiar (p1, p2), natural theta = (log p1, log p2).
* invgau: familiar (mu, lam), natural theta = (-lam/mu^2, -lam) with
  sufficient statistics (zeta/2, 1/(2 zeta)).  This is the unique chart and
  statistic normalization under which the catalogue potential
  -sqrt(t1 t2) - log(-t2)/2 is the exact log-partition function; the
  expectation chart is then eta = (mu/2, (1/mu + 1/lam)/2) with image
  {eta1 > 0, 4 eta1 eta2 > 1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from . import jets
from .errors import RangeViolation, ToleranceNotMet, UnknownName
from .jets import JetProgram
from .potentials import ChartMap, PotentialSpec, get_spec

QUAD_ABS_TOL = 1e-9
SCORE_STEP = 1e-5


@dataclass
class StatFamily:
    """A parametrized probability family tied to its log-partition potential."""

    name: str
    param_names: tuple[str, ...]
    kind: str  # "continuous" | "lattice"
    support: tuple[float, float]  # integration interval for continuous kinds
    in_range: Callable[[np.ndarray], bool]
    log_density: Callable[[float, np.ndarray], float]  # log rho(zeta | params)
    sufficient: Callable[[float], np.ndarray]
    log_base: Callable[[float], float]
    natural_chart: Callable[[np.ndarray], np.ndarray]
    potential: PotentialSpec
    sample_params: Callable[[np.random.Generator], np.ndarray]

    def _check(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (len(self.param_names),) or not self.in_range(params):
            raise RangeViolation(
                f"{self.name} parameters {params.tolist()} outside the family range"
            )
        return params

    def log_density_natural(self, zeta: float, theta: np.ndarray) -> float:
        """Exponential-family density in the natural chart."""
        return (
            self.log_base(zeta)
            + float(np.dot(theta, self.sufficient(zeta)))
            - self.potential.value(theta)
        )


def to_natural(family: StatFamily, familiar) -> np.ndarray:
    """Map familiar parameters to the natural chart; the image must satisfy
    the potential's domain predicate."""
    params = family._check(familiar)
    theta = family.natural_chart(params)
    if not family.potential.contains(theta):
        raise RangeViolation(
            f"natural image {theta.tolist()} escapes the potential domain"
        )
    return theta


def to_expectation(family: StatFamily, familiar) -> np.ndarray:
    """Expectation parameters: the gradient of the log-partition function at
    the natural point."""
    theta = to_natural(family, familiar)
    return family.potential.jet(theta, order=1).gradient()


def _quad(f, a, b):
    value, err = integrate.quad(f, a, b, epsabs=1e-12, epsrel=1e-11, limit=200)
    if err > QUAD_ABS_TOL:
        raise ToleranceNotMet(
            f"quadrature error estimate {err:.2e} exceeds {QUAD_ABS_TOL:g}"
        )
    return value


def _lattice_sum(weight, params, tol=1e-12, max_level=4000):
    """Sum weight(k1, k2) * pmf over the lattice by diagonals k1 + k2 = m.

    The pmf level mass decays like (p1 + p2)^m, so once consecutive level
    contributions fall below the geometric-envelope threshold the remaining
    tail is negligible; three quiet levels are required before stopping.
    """
    total = 0.0
    quiet = 0
    for m in range(max_level + 1):
        level = 0.0
        for k1 in range(m + 1):
            level += weight(k1, m - k1)
        total += level
        if abs(level) < tol * max(1.0, abs(total)):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
    raise ToleranceNotMet(f"lattice sum did not settle within {max_level} levels")


def density_normalization(family: StatFamily, familiar) -> float:
    """Total mass of the density/pmf at the given parameters."""
    params = family._check(familiar)
    if family.kind == "continuous":
        return _quad(
            lambda z: math.exp(family.log_density(z, params)), *family.support
        )
    return _lattice_sum(
        lambda k1, k2: math.exp(family.log_density((k1, k2), params)), params
    )


def expectation_numeric(family: StatFamily, familiar) -> np.ndarray:
    """Expectation of the sufficient statistics by quadrature / lattice sum."""
    params = family._check(familiar)
    n = len(family.param_names)
    out = np.empty(n)
    for i in range(n):
        if family.kind == "continuous":
            out[i] = _quad(
                lambda z, i=i: family.sufficient(z)[i]
                * math.exp(family.log_density(z, params)),
                *family.support,
            )
        else:
            out[i] = _lattice_sum(
                lambda k1, k2, i=i: family.sufficient((k1, k2))[i]
                * math.exp(family.log_density((k1, k2), params)),
                params,
            )
    return out


def _scores(family: StatFamily, zeta, point: np.ndarray, chart: str) -> np.ndarray:
    """Central-difference scores d/d(chart_i) log rho, independent of jets."""
    n = point.size
    out = np.empty(n)
    logp = (
        family.log_density if chart == "familiar" else family.log_density_natural
    )
    for i in range(n):
        h = SCORE_STEP * max(1.0, abs(point[i]))
        up = point.copy()
        dn = point.copy()
        up[i] += h
        dn[i] -= h
        out[i] = (logp(zeta, up) - logp(zeta, dn)) / (2.0 * h)
    return out


def fisher_numeric(family: StatFamily, familiar, chart: str = "familiar") -> np.ndarray:
    """Fisher information: the expectation of the score outer product.

    Scores are central differences of the log density in the requested chart
    ("familiar" or "natural"), integrated by adaptive quadrature for
    continuous families and by tail-bounded lattice sums for discrete ones.
    """
    params = family._check(familiar)
    if chart not in ("familiar", "natural"):
        raise UnknownName(f"unknown chart {chart!r}")
    point = params if chart == "familiar" else to_natural(family, params)
    n = point.size
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            if family.kind == "continuous":
                def integrand(z, i=i, j=j):
                    s = _scores(family, z, point, chart)
                    return s[i] * s[j] * math.exp(
                        family.log_density(z, params)
                        if chart == "familiar"
                        else family.log_density_natural(z, point)
                    )

                out[i, j] = _quad(integrand, *family.support)
            else:
                def weight(k1, k2, i=i, j=j):
                    s = _scores(family, (k1, k2), point, chart)
                    mass = math.exp(
                        family.log_density((k1, k2), params)
                        if chart == "familiar"
                        else family.log_density_natural((k1, k2), point)
                    )
                    return s[i] * s[j] * mass

                out[i, j] = _lattice_sum(weight, params)
            out[j, i] = out[i, j]
    return out


# --- the three catalogue families -------------------------------------------

def _normal_family() -> StatFamily:
    def log_density(z, p):
        mu, sigma = p
        return -0.5 * ((z - mu) / sigma) ** 2 - 0.5 * math.log(2.0 * math.pi * sigma**2)

    return StatFamily(
        name="normal",
        param_names=("mu", "sigma"),
        kind="continuous",
        support=(-np.inf, np.inf),
        in_range=lambda p: p[1] > 0.0,
        log_density=log_density,
        sufficient=lambda z: np.array([z, z * z]),
        log_base=lambda z: 0.0,
        natural_chart=lambda p: np.array([p[0] / p[1] ** 2, -0.5 / p[1] ** 2]),
        potential=get_spec("normal"),
        sample_params=lambda rng: np.array(
            [rng.uniform(-1.5, 1.5), math.exp(rng.uniform(math.log(0.5), math.log(2.0)))]
        ),
    )


def _negtri_family() -> StatFamily:
    def log_pmf(k, p):
        k1, k2 = k
        p1, p2 = p
        return (
            gammaln(k1 + k2 + 1.0)
            - gammaln(k1 + 1.0)
            - gammaln(k2 + 1.0)
            + k1 * math.log(p1)
            + k2 * math.log(p2)
            + math.log(1.0 - p1 - p2)
        )

    return StatFamily(
        name="negtri",
        param_names=("p1", "p2"),
        kind="lattice",
        support=(0.0, np.inf),
        in_range=lambda p: p[0] > 0.0 and p[1] > 0.0 and p[0] + p[1] < 1.0,
        log_density=log_pmf,
        sufficient=lambda k: np.array([float(k[0]), float(k[1])]),
        log_base=lambda k: float(
            gammaln(k[0] + k[1] + 1.0) - gammaln(k[0] + 1.0) - gammaln(k[1] + 1.0)
        ),
        natural_chart=lambda p: np.log(np.asarray(p, dtype=float)),
        potential=get_spec("negtri"),
        sample_params=lambda rng: _sample_negtri_params(rng),
    )


def _sample_negtri_params(rng) -> np.ndarray:
    p1 = rng.uniform(0.08, 0.55)
    p2 = rng.uniform(0.08, 0.85 - p1)
    return np.array([p1, p2])


def _invgau_family() -> StatFamily:
    def log_density(z, p):
        mu, lam = p
        return (
            0.5 * (math.log(lam) - math.log(2.0 * math.pi) - 3.0 * math.log(z))
            - lam * (z - mu) ** 2 / (2.0 * mu**2 * z)
        )

    return StatFamily(
        name="invgau",
        param_names=("mu", "lam"),
        kind="continuous",
        support=(0.0, np.inf),
        in_range=lambda p: p[0] > 0.0 and p[1] > 0.0,
        log_density=log_density,
        sufficient=lambda z: np.array([0.5 * z, 0.5 / z]),
        log_base=lambda z: -0.5 * math.log(2.0 * math.pi * z**3),
        natural_chart=lambda p: np.array([-p[1] / p[0] ** 2, -p[1]]),
        potential=get_spec("invgau"),
        sample_params=lambda rng: np.exp(rng.uniform(math.log(0.5), math.log(2.0), size=2)),
    )


_FAMILIES = {
    "normal": _normal_family,
    "negtri": _negtri_family,
    "invgau": _invgau_family,
}
_family_cache: dict[str, StatFamily] = {}


def get_family(name: str) -> StatFamily:
    key = name.strip().lower()
    if key not in _FAMILIES:
        raise UnknownName(f"unknown statistical family {name!r}")
    if key not in _family_cache:
        _family_cache[key] = _FAMILIES[key]()
    return _family_cache[key]


def family_names() -> tuple[str, ...]:
    return tuple(_FAMILIES)


# --- closed-form familiar-chart metrics and isometry fixtures ---------------
#
# These back the pullback/isometry tests.  The negative-trinomial Fisher
# metric in the probability chart is four times the standard Klein-disk
# metric under s_i = sqrt(p_i) (curvature -1/4); the inverse-Gaussian Fisher
# metric in the chart (mu^{-1/2}, lam^{-1/2}) is the anisotropic half-plane
# form (4 dx1^2 + 2 dx2^2) / x2^2, whose isometries are generated by
# dilations and by inversion in the weighted circle 2 x1^2 + x2^2 = r^2.

def normal_fisher_musigma(p) -> np.ndarray:
    mu, sigma = p
    return np.array([[1.0 / sigma**2, 0.0], [0.0, 2.0 / sigma**2]])


def negtri_fisher_p(p) -> np.ndarray:
    p1, p2 = p
    p0 = 1.0 - p1 - p2
    return np.array(
        [
            [(p0 + p1) / (p0**2 * p1), 1.0 / p0**2],
            [1.0 / p0**2, (p0 + p2) / (p0**2 * p2)],
        ]
    )


def negtri_klein_metric(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    d = 1.0 - float(s @ s)
    return 4.0 * (np.eye(2) / d + np.outer(s, s) / d**2)


def invgau_fisher_mulam(p) -> np.ndarray:
    mu, lam = p
    return np.array([[lam / mu**3, 0.0], [0.0, 0.5 / lam**2]])


def invgau_halfplane_metric(x) -> np.ndarray:
    return np.array([[4.0, 0.0], [0.0, 2.0]]) / x[1] ** 2


def sqrt_chart() -> ChartMap:
    """p -> s = sqrt(p), componentwise, on the open probability triangle."""
    def prog(i):
        return JetProgram(
            dim=2,
            contains=lambda p: p[0] > 0.0 and p[1] > 0.0 and p[0] + p[1] < 1.0,
            func=lambda v, i=i: jets.sqrt(v[i]),
        )

    return ChartMap(
        name="sqrt",
        programs=(prog(0), prog(1)),
        source_contains=lambda p: p[0] > 0.0 and p[1] > 0.0 and p[0] + p[1] < 1.0,
        target_contains=lambda s: s[0] > 0.0 and s[1] > 0.0 and float(s @ s) < 1.0,
    )


def invgau_x_chart() -> ChartMap:
    """(mu, lam) -> (mu^{-1/2}, lam^{-1/2}), the half-plane chart."""
    def prog(i):
        return JetProgram(
            dim=2,
            contains=lambda p: p[0] > 0.0 and p[1] > 0.0,
            func=lambda v, i=i: v[i] ** -0.5,
        )

    quadrant = lambda x: x[0] > 0.0 and x[1] > 0.0
    return ChartMap(
        name="invgau-x",
        programs=(prog(0), prog(1)),
        source_contains=quadrant,
        target_contains=quadrant,
    )


def scaling_chart(alpha: float) -> ChartMap:
    """(x1, x2) -> (alpha x1, alpha x2) on the open first quadrant."""
    def prog(i):
        return JetProgram(
            dim=2,
            contains=lambda x: x[0] > 0.0 and x[1] > 0.0,
            func=lambda v, i=i: alpha * v[i],
        )

    quadrant = lambda x: x[0] > 0.0 and x[1] > 0.0
    return ChartMap(
        name=f"scaling-{alpha:g}",
        programs=(prog(0), prog(1)),
        source_contains=quadrant,
        target_contains=quadrant,
    )


def inversion_chart(radius: float = 1.0) -> ChartMap:
    """Inversion in the weighted circle 2 x1^2 + x2^2 = radius^2.

    This is the half-plane inversion conjugated by the rescaling that maps
    the anisotropic metric (4 dx1^2 + 2 dx2^2)/x2^2 to the standard model;
    it preserves the first quadrant.
    """
    r2 = radius * radius

    def prog(i):
        def func(v, i=i):
            q = 2.0 * v[0] * v[0] + v[1] * v[1]
            return r2 * v[i] / q

        return JetProgram(
            dim=2, contains=lambda x: x[0] > 0.0 and x[1] > 0.0, func=func
        )

    quadrant = lambda x: x[0] > 0.0 and x[1] > 0.0
    return ChartMap(
        name=f"inversion-{radius:g}",
        programs=(prog(0), prog(1)),
        source_contains=quadrant,
        target_contains=quadrant,
    )


def identity_chart(dim: int, contains=lambda x: True) -> ChartMap:
    def prog(i):
        return JetProgram(dim=dim, contains=contains, func=lambda v, i=i: v[i])

    return ChartMap(
        name="identity",
        programs=tuple(prog(i) for i in range(dim)),
        source_contains=contains,
        target_contains=contains,
    )
