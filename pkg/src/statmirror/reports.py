"""Report documents and deterministic JSON serialization.

Numbers are serialized with 17 significant digits (round-trip exact for
double precision) and every document embeds the generator seed, so reruns
with the same flags produce byte-identical output.
"""

from __future__ import annotations

import math

import numpy as np

from . import flows, hessian, kahler, wdvv
from .errors import DomainViolation, ParseError, UnknownName
from .potentials import ChartMap, PotentialSpec, get_spec, soliton_potential

ARTIFACT_VERSION = "0.1.0"


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("report documents must contain only finite numbers")
    return format(float(x), ".17g")


def to_json(obj, indent: int = 0) -> str:
    """Serialize dicts/lists/scalars with fixed float formatting.

    Key order is insertion order, which the report builders keep
    deterministic; the output is byte-stable across runs.
    """
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [
            f'{inner}"{k}": {to_json(v, indent + 1)}' for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        flat = all(isinstance(v, (int, float, np.floating, np.integer)) for v in seq)
        if flat:
            return "[" + ", ".join(to_json(v) for v in seq) + "]"
        rows = [f"{inner}{to_json(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _matrix(m: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.asarray(m)]


def _stats(values) -> dict:
    arr = np.asarray(values, dtype=float)
    return {
        "min": float(arr.min()),
        "max": float(arr.max()),
        "mean": float(arr.mean()),
        "count": int(arr.size),
    }


def parse_point(text: str, dim: int | None = None) -> np.ndarray:
    try:
        point = np.array([float(v) for v in str(text).split(",")])
    except ValueError as exc:
        raise ParseError(f"cannot parse point {text!r}") from exc
    if dim is not None and point.size != dim:
        raise ParseError(f"point {text!r} has {point.size} coordinates, expected {dim}")
    return point


def resolve_side(name: str, side: str):
    spec = get_spec(name)
    if side == "primal":
        return spec
    if side == "dual":
        return hessian.dual_view(spec)
    raise ParseError(f"side must be 'primal' or 'dual', got {side!r}")


def _fenchel_residual(spec, rng, count: int) -> float:
    """Max Fenchel-identity defect |Phi*(grad Phi(x)) + Phi(x) - <x, grad>|.

    For a transported (numeric) dual the identity is evaluated on its primal,
    which is the same statement read from the other side.
    """
    base = spec.primal if isinstance(spec, hessian.NumericDual) else spec
    worst = 0.0
    for _ in range(count):
        x = base.sample(rng)
        u = hessian.grad_map(base, x)
        value = hessian.legendre_value(base, u, seed=x)
        worst = max(worst, abs(value + base.value(x) - float(x @ u)))
    return worst


def curvature_report(
    name: str,
    side: str = "primal",
    point=None,
    samples: int = 50,
    seed: int = 0,
) -> dict:
    spec = resolve_side(name, side)
    if point is None:
        point = spec.interior_point
    point = np.asarray(point, dtype=float)
    if not spec.contains(point):
        raise DomainViolation(
            f"point {point.tolist()} outside the domain of {spec.name}"
        )
    rng = np.random.default_rng(seed)
    md = hessian.metric(spec, point)
    ric = kahler.ricci(spec, point)

    hsc, ob, omtw = [], [], []
    residual_points = []
    for k in range(samples):
        x = spec.sample(rng)
        g = hessian.metric(spec, x).g
        v, w = kahler.sample_orthogonal_pair(rng, g)
        hsc.append(kahler.holo_sectional(spec, x, v))
        ob.append(kahler.orth_bisectional(spec, x, v, w))
        omtw.append(kahler.mtw(spec, x, v, w))
        if k < min(samples, 20):
            residual_points.append(x)

    wdvv_max = max(wdvv.wdvv_residual(spec, x) for x in residual_points)
    totaro = max(wdvv.totaro_consistency(spec, x) for x in residual_points)
    fenchel = _fenchel_residual(spec, rng, min(samples, 20))

    return {
        "version": ARTIFACT_VERSION,
        "spec": spec.name,
        "side": side,
        "point": [float(v) for v in point],
        "seed": int(seed),
        "samples": int(samples),
        "metric": {
            "g": _matrix(md.g),
            "inverse": _matrix(md.inv),
        },
        "ricci": {
            "form": _matrix(ric.form),
            "mixed": _matrix(ric.mixed),
            "potential": float(ric.potential),
            "scalar": float(ric.scalar),
            "ricci_trace": float(np.trace(ric.mixed)),
            "ricci_det": float(np.linalg.det(ric.mixed)),
        },
        "scalar": float(ric.scalar),
        "curvature_samples": {
            "holo_sectional": _stats(hsc),
            "orth_bisectional": _stats(ob),
            "orth_mtw": _stats(omtw),
        },
        "residuals": {
            "wdvv_max": float(wdvv_max),
            "totaro_consistency": float(totaro),
            "fenchel_identity": float(fenchel),
        },
    }


def legendre_report(
    name: str,
    side: str = "primal",
    point=None,
    samples: int = 50,
    seed: int = 0,
    tol: float | None = None,
) -> dict:
    spec = resolve_side(name, side)
    base = spec.primal if isinstance(spec, hessian.NumericDual) else spec
    rng = np.random.default_rng(seed)
    newton_tol = tol if tol is not None else hessian.NEWTON_TOL

    involution = 0.0
    fenchel = 0.0
    dual_hess = 0.0
    for _ in range(samples):
        x = base.sample(rng)
        u = hessian.grad_map(base, x)
        back = hessian.inverse_grad_map(base, u, tol=newton_tol)
        involution = max(involution, float(np.max(np.abs(back - x))))
        value = hessian.legendre_value(base, u, seed=x)
        fenchel = max(fenchel, abs(value + base.value(x) - float(x @ u)))
        dual = hessian.dual_view(base)
        h_dual = dual.jet(u, order=2).hessian()
        h_inv = hessian.metric(base, x).inv
        dual_hess = max(dual_hess, float(np.max(np.abs(h_dual - h_inv))))

    doc = {
        "version": ARTIFACT_VERSION,
        "spec": spec.name,
        "side": side,
        "seed": int(seed),
        "samples": int(samples),
        "newton_tol": float(newton_tol),
        "residuals": {
            "fenchel_identity": float(fenchel),
            "involution": float(involution),
            "dual_hessian_identity": float(dual_hess),
        },
    }
    if point is not None:
        u = np.asarray(point, dtype=float)
        doc["point"] = [float(v) for v in u]
        doc["fenchel_value"] = float(hessian.legendre_value(base, u))
    return doc


def wdvv_report(
    name: str,
    side: str = "primal",
    samples: int = 20,
    seed: int = 0,
    with_dual: bool = True,
) -> dict:
    spec = resolve_side(name, side)
    rng = np.random.default_rng(seed)
    rep = wdvv.report(spec, rng, count=samples)
    doc = {
        "version": ARTIFACT_VERSION,
        "spec": spec.name,
        "side": side,
        "seed": int(seed),
        "samples": int(samples),
        "wdvv_max": float(rep.max_residual),
        "totaro_consistency": float(rep.totaro_consistency),
    }
    if rep.scalar_residual is not None:
        doc["scalar_residual_max"] = float(rep.scalar_residual)
    if rep.ricci_residual is not None:
        doc["ricci_residual_max"] = float(np.max(np.abs(rep.ricci_residual)))
    if with_dual and not isinstance(spec, hessian.NumericDual):
        doc["dual_wdvv_max"] = float(
            wdvv.legendre_wdvv_check(spec, np.random.default_rng(seed + 1), count=samples)
        )
    return doc


def mirror_report(
    name: str,
    point=None,
    samples: int = 20,
    seed: int = 0,
) -> dict:
    spec = get_spec(name)
    if point is None:
        point = spec.interior_point
    point = np.asarray(point, dtype=float)
    dual_point = hessian.grad_map(spec, point)
    rng = np.random.default_rng(seed)
    defect = 0.0
    for _ in range(samples):
        x = spec.sample(rng)
        u = rng.normal(size=spec.dim)
        v = rng.normal(size=spec.dim)
        w_val = kahler.mirror_w(spec, x, u, v)
        m_val = kahler.mtw(hessian.dual_view(spec), hessian.grad_map(spec, x), u, v)
        scale = max(1.0, abs(w_val), abs(m_val))
        defect = max(defect, abs(w_val - m_val) / scale)
    primal = curvature_report(name, "primal", point, samples=samples, seed=seed)
    dual = curvature_report(name, "dual", dual_point, samples=samples, seed=seed)
    return {
        "version": ARTIFACT_VERSION,
        "spec": spec.name,
        "seed": int(seed),
        "point": [float(v) for v in point],
        "dual_point": [float(v) for v in dual_point],
        "mirror_defect_max": float(defect),
        "primal": primal,
        "dual": dual,
    }


# --- flow command ------------------------------------------------------------

def _flow_initial(init: str):
    """Initial data + exact closure for the grid command.

    Accepted: ``quad-2``, ``aniso:A,B``, ``expramp``, ``normal``.
    """
    key = init.strip().lower()
    if key == "quad-2":
        fn = lambda X1, X2: 0.5 * (X1**2 + X2**2)
        return fn, (lambda X1, X2, t: fn(X1, X2)), ((-1.0, 1.0), (-1.0, 1.0))
    if key.startswith("aniso:"):
        try:
            a, b = (float(v) for v in key.split(":", 1)[1].split(","))
        except ValueError as exc:
            raise ParseError(f"cannot parse {init!r}; expected aniso:A,B") from exc
        if a <= 0 or b <= 0:
            raise ParseError("aniso coefficients must be positive")
        fn = lambda X1, X2: 0.5 * (a * X1**2 + b * X2**2)
        clo = lambda X1, X2, t: fn(X1, X2) + t * math.log(a * b)
        return fn, clo, ((-1.0, 1.0), (-1.0, 1.0))
    if key == "expramp":
        return (
            flows.exp_ramp_initial,
            flows.exp_ramp_closure,
            ((-1.0, 1.0), (-1.0, 1.0)),
        )
    if key == "normal":
        fn = lambda X1, X2: -X1**2 / (4.0 * X2) - 0.5 * np.log(-X2 / math.pi)
        return fn, (lambda X1, X2, t: fn(X1, X2)), ((-1.0, 1.0), (-2.2, -0.6))
    raise UnknownName(f"unknown flow initial data {init!r}")


def parse_grid(text: str) -> tuple[int, int]:
    try:
        n1, n2 = (int(v) for v in str(text).lower().split("x"))
    except ValueError as exc:
        raise ParseError(f"cannot parse grid {text!r}; expected like 33x33") from exc
    if n1 < 5 or n2 < 5:
        raise ParseError("grid must be at least 5x5")
    return n1, n2


def trajectory_csv(trajectory) -> str:
    lines = ["step,t,x1,x2,phi"]
    for step, state in enumerate(trajectory):
        X1, X2 = state.mesh()
        t_str = _fmt_float(state.t)
        flat = zip(X1.ravel(), X2.ravel(), state.phi.ravel())
        for x1v, x2v, ph in flat:
            lines.append(
                f"{step},{t_str},{_fmt_float(x1v)},{_fmt_float(x2v)},{_fmt_float(ph)}"
            )
    return "\n".join(lines) + "\n"


def flow_run_report(
    init: str = "quad-2",
    grid: str = "33x33",
    dt: float | str = "auto",
    steps: int = 100,
    record_every: int = 0,
    seed: int = 0,
    include_csv: bool = False,
) -> dict:
    initial, closure, bounds = _flow_initial(init)
    shape = parse_grid(grid)
    state = flows.make_grid(bounds, shape, initial, closure=closure)
    if dt == "auto" or dt is None:
        dt_val = flows.stability_dt(state)
    else:
        dt_val = float(dt)
    every = record_every if record_every > 0 else max(1, steps)
    trajectory = flows.integrate_hk(state, dt_val, steps, record_every=every)
    final = trajectory[-1]
    X1, X2 = final.mesh()
    drift = float(np.max(np.abs(final.phi - trajectory[0].phi)))
    defect = float(np.max(np.abs(final.phi - final.closure(X1, X2, final.t))))
    doc = {
        "version": ARTIFACT_VERSION,
        "command": "flow",
        "init": init,
        "grid": list(shape),
        "bounds": [list(b) for b in bounds],
        "dt": float(dt_val),
        "steps": int(steps),
        "seed": int(seed),
        "final_t": float(final.t),
        "max_drift": drift,
        "max_defect_vs_closure": defect,
        "stability_bound": float(flows.stability_dt(trajectory[0])),
        "recorded_states": len(trajectory),
    }
    if include_csv:
        doc["csv"] = trajectory_csv(trajectory)
    return doc


def flow_soliton_report(
    tmin: float = 0.1,
    tmax: float = 10.0,
    samples: int = 100,
    seed: int = 0,
) -> dict:
    if not (0.0 < tmin <= tmax):
        raise ParseError("need 0 < tmin <= tmax")
    rng = np.random.default_rng(seed)
    worst_pullback = 0.0
    worst_dual_hessian = 0.0
    membership_failures = 0
    base = soliton_potential(1.0)
    for _ in range(samples):
        t = math.exp(rng.uniform(math.log(tmin), math.log(tmax)))
        x = base.sample(rng)
        worst_pullback = max(worst_pullback, flows.soliton_pullback_residual(t, x))
        spec_t = soliton_potential(t)
        u = hessian.grad_map(spec_t, x)
        if not (u[1] - u[0] * u[0] > 0.0):
            membership_failures += 1
        model = t * _neg_log_gap_hessian(u)
        dual_h = np.linalg.inv(hessian.metric(spec_t, x).g)
        worst_dual_hessian = max(
            worst_dual_hessian, float(np.max(np.abs(dual_h - model)))
        )
    return {
        "version": ARTIFACT_VERSION,
        "command": "flow-soliton",
        "tmin": float(tmin),
        "tmax": float(tmax),
        "samples": int(samples),
        "seed": int(seed),
        "max_pullback_residual": float(worst_pullback),
        "max_dual_hessian_defect": float(worst_dual_hessian),
        "dual_domain_membership_failures": int(membership_failures),
    }


def _neg_log_gap_hessian(u) -> np.ndarray:
    """Hessian of -log(u2 - u1^2)."""
    d = u[1] - u[0] * u[0]
    return np.array(
        [
            [2.0 / d + 4.0 * u[0] ** 2 / d**2, -2.0 * u[0] / d**2],
            [-2.0 * u[0] / d**2, 1.0 / d**2],
        ]
    )
