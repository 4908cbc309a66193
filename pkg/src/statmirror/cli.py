"""Thin command-line client for the laboratory service.

By default the CLI talks to the FastAPI app in-process (no server needed);
``--server URL`` points it at a running instance instead.  All run
parameters are flags; an optional key=value config file supplies defaults
and flags always win.  Exit codes: 0 success, 2 input/domain error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ParseError


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    from starlette.testclient import TestClient

    from .service import app

    return TestClient(app)


def _read_config(path: str | None) -> dict:
    if not path:
        return {}
    out = {}
    try:
        with open(path) as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#") or "=" not in line:
                    continue
                key, _, value = line.partition("=")
                out[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ParseError(f"cannot read config file {path!r}: {exc}") from exc
    return out


_CONFIG_TYPES = {
    "samples": int,
    "seed": int,
    "steps": int,
    "record_every": int,
    "tmin": float,
    "tmax": float,
    "tol": float,
    "no_dual": lambda s: s.lower() in ("1", "true", "yes"),
    "json": lambda s: s.lower() in ("1", "true", "yes"),
}


def _seed_namespace(config: dict) -> argparse.Namespace:
    """Typed namespace from the config file; argparse skips defaults for
    attributes that already exist, so explicit flags still win."""
    ns = argparse.Namespace()
    for key, raw in config.items():
        if key in ("config", "server"):
            continue
        cast = _CONFIG_TYPES.get(key, str)
        try:
            setattr(ns, key, cast(raw))
        except ValueError as exc:
            raise ParseError(f"bad config value {key}={raw!r}") from exc
    return ns


def _parse_point(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ParseError(f"cannot parse point {text!r}") from exc


def _emit(payload: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _fail(message: str, code: int) -> int:
    sys.stderr.write(message.rstrip() + "\n")
    return code


def _post(client, path: str, body: dict, out: str | None) -> int:
    resp = client.post(path, json=body)
    if resp.status_code == 200:
        _emit(resp.text, out)
        return 0
    try:
        detail = resp.json()
    except (ValueError, json.JSONDecodeError):
        detail = {"error": {"message": resp.text, "exit_code": 3}}
    err = detail.get("error")
    if err is None:  # pydantic validation failure (HTTP 422)
        return _fail(json.dumps(detail), 2)
    return _fail(
        f"{err.get('type', 'Error')}: {err.get('message', '')}",
        int(err.get("exit_code", 3)),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statmirror",
        description="Curvature reports, Legendre checks, flow runs and WDVV "
        "verification for the Hessian-potential catalogue.",
    )
    parser.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    parser.add_argument("--config", default=None, help="key=value file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, samples_default=50):
        p.add_argument("--spec", "--family", dest="spec", default=None)
        p.add_argument("--side", choices=("primal", "dual"), default="primal")
        p.add_argument("--point", default=None, help="comma-separated coordinates")
        p.add_argument("--samples", type=int, default=samples_default)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="write the JSON document here")
        p.add_argument("--json", action="store_true", help="JSON output (the default)")

    p_report = sub.add_parser("report", help="curvature report for one potential")
    common(p_report)

    p_leg = sub.add_parser("legendre", help="Fenchel / involution / dual-Hessian checks")
    common(p_leg)
    p_leg.add_argument("--tol", type=float, default=None, help="Newton tolerance")

    p_wdvv = sub.add_parser("wdvv", help="WDVV residuals and flatness checks")
    common(p_wdvv, samples_default=20)
    p_wdvv.add_argument("--no-dual", action="store_true", help="skip the dual-side check")

    p_mirror = sub.add_parser("mirror", help="side-by-side primal/dual report")
    p_mirror.add_argument("--spec", "--family", dest="spec", default=None)
    p_mirror.add_argument("--point", default=None)
    p_mirror.add_argument("--samples", type=int, default=20)
    p_mirror.add_argument("--seed", type=int, default=0)
    p_mirror.add_argument("--out", default=None)
    p_mirror.add_argument("--json", action="store_true")

    p_flow = sub.add_parser("flow", help="grid flow run or soliton check")
    p_flow.add_argument("--init", default="quad-2", help="quad-2 | aniso:A,B | expramp | normal")
    p_flow.add_argument("--grid", default="33x33")
    p_flow.add_argument("--dt", default="auto", help="time step or 'auto'")
    p_flow.add_argument("--steps", type=int, default=100)
    p_flow.add_argument("--record-every", type=int, default=0, dest="record_every")
    p_flow.add_argument("--check", choices=("soliton",), default=None)
    p_flow.add_argument("--tmin", type=float, default=0.1)
    p_flow.add_argument("--tmax", type=float, default=10.0)
    p_flow.add_argument("--samples", type=int, default=100)
    p_flow.add_argument("--seed", type=int, default=0)
    p_flow.add_argument("--csv", default=None, help="write the trajectory CSV here")
    p_flow.add_argument("--out", default=None, help="write the JSON summary here")
    p_flow.add_argument("--json", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        boot = argparse.ArgumentParser(add_help=False)
        boot.add_argument("--config", default=None)
        pre, _ = boot.parse_known_args(argv)
        config = _read_config(pre.config)
        args = parser.parse_args(argv, namespace=_seed_namespace(config))
        if args.command in ("report", "legendre", "wdvv", "mirror") and not args.spec:
            return _fail("ParseError: --spec/--family is required", 2)
        with _client(args.server) as client:
            if args.command == "report":
                body = {
                    "spec": args.spec,
                    "side": args.side,
                    "point": _parse_point(args.point),
                    "samples": args.samples,
                    "seed": args.seed,
                }
                return _post(client, "/report", body, args.out)
            if args.command == "legendre":
                body = {
                    "spec": args.spec,
                    "side": args.side,
                    "point": _parse_point(args.point),
                    "samples": args.samples,
                    "seed": args.seed,
                    "tol": args.tol,
                }
                return _post(client, "/legendre", body, args.out)
            if args.command == "wdvv":
                body = {
                    "spec": args.spec,
                    "side": args.side,
                    "samples": args.samples,
                    "seed": args.seed,
                    "with_dual": not args.no_dual,
                }
                return _post(client, "/wdvv", body, args.out)
            if args.command == "mirror":
                body = {
                    "spec": args.spec,
                    "point": _parse_point(args.point),
                    "samples": args.samples,
                    "seed": args.seed,
                }
                return _post(client, "/mirror", body, args.out)
            if args.command == "flow":
                if args.check == "soliton":
                    body = {
                        "tmin": args.tmin,
                        "tmax": args.tmax,
                        "samples": args.samples,
                        "seed": args.seed,
                    }
                    return _post(client, "/flow/soliton", body, args.out)
                if args.dt != "auto":
                    try:
                        dt_val = float(args.dt)
                    except ValueError as exc:
                        raise ParseError(f"cannot parse dt {args.dt!r}") from exc
                else:
                    dt_val = None
                body = {
                    "init": args.init,
                    "grid": args.grid,
                    "dt": dt_val,
                    "steps": args.steps,
                    "record_every": args.record_every,
                    "seed": args.seed,
                    "include_csv": args.csv is not None,
                }
                resp = client.post("/flow/run", json=body)
                if resp.status_code != 200:
                    return _post_error(resp)
                doc = json.loads(resp.text)
                csv_text = doc.pop("csv", None)
                if args.csv and csv_text is not None:
                    with open(args.csv, "w") as fh:
                        fh.write(csv_text)
                from .reports import to_json

                _emit(to_json(doc) + "\n", args.out)
                return 0
    except ParseError as exc:
        return _fail(f"ParseError: {exc}", exc.exit_code)
    return 2


def _post_error(resp) -> int:
    try:
        detail = resp.json()
    except (ValueError, json.JSONDecodeError):
        detail = {}
    err = detail.get("error")
    if err is None:
        sys.stderr.write(resp.text + "\n")
        return 2
    sys.stderr.write(f"{err.get('type', 'Error')}: {err.get('message', '')}\n")
    return int(err.get("exit_code", 3))


if __name__ == "__main__":
    sys.exit(main())
