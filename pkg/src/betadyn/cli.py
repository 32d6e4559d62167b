"""Command-line client.

Subcommand flags mirror the request models field for field.  By default
the operation runs in-process; ``--server URL`` sends the same request to
a running service instead.  Exit status: 0 ok, 1 domain error, 2 precision
exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import typing
from typing import Any, Sequence

from pydantic import ValidationError

from .errors import BetaDynError
from .schemas import ErrorOut, Result

HELP = {
    "expand": "greedy beta-expansion digits of x",
    "eps-star": "eps*(beta) prefix and the expansion of 1",
    "admissible": "Parry admissibility of a word",
    "enumerate": "admissible words of length n (or their count)",
    "beta-n": "the approximating base beta_N",
    "cylinder": "basic interval of a word (or its smallest full extension)",
    "partition": "all level-n cylinders; CSV columns word,left,right,length,is_full",
    "orbit": "exact orbit x, Tx, ..., T^(n-1)x",
    "hits": "n <= horizon with T^n x < psi(n)",
    "uniform": "per-N uniform hitting verdicts",
    "exponents": "nu and nu-hat estimates for a digit stream (--param key=value)",
    "psi-exp": "liminf/limsup exponents of a speed function",
    "classify": "dimension bounds for L(psi1) ∩ U(psi2) from a quadruple",
    "classify-uniform": "dimension bounds for U(psi2)",
    "bl": "dimension of {nu = v} ∩ {nu-hat = v_hat}",
    "sw": "1/(1+v)",
    "s0": "critical exponent of the covering series",
    "cantor-schedule": "run schedule (JSON dump of sequences and ratios)",
    "cantor-gen": "template words at a depth; CSV columns level,word,left,length,mass",
    "cantor-measure": "mass of a template word",
    "localdim": "local-dimension ratios at the milestones",
    "boxcount": "box-counting slope over milestone scales",
    "verify-membership": "orbit checks on sampled Cantor points",
    "examples": "worked examples table",
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_field(p: argparse.ArgumentParser, name: str, info) -> None:
    ann = info.annotation
    origin = typing.get_origin(ann)
    args = typing.get_args(ann)
    if origin is typing.Union and type(None) in args:
        ann = next(a for a in args if a is not type(None))
        origin, args = typing.get_origin(ann), typing.get_args(ann)
    desc = info.description or ""
    if ann is bool:
        p.add_argument(_flag(name), dest=name, action="store_true", default=None, help=desc)
    elif origin is typing.Literal:
        p.add_argument(_flag(name), dest=name, choices=list(args), help=desc)
    elif origin is list:
        p.add_argument(_flag(name), dest=name, nargs="+", type=int, help=desc)
    elif origin is dict:
        p.add_argument("--param", dest=name, action="append", metavar="KEY=VALUE", help="stream parameter")
    else:
        p.add_argument(_flag(name), dest=name, type=int if ann is int else str, help=desc)


def build_parser() -> argparse.ArgumentParser:
    from .operations import OPERATIONS

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "table"], default="json")
    common.add_argument("--server", metavar="URL", help="send the request to a running service")
    parser = argparse.ArgumentParser(prog="betadyn", description="beta-transformation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (model, _) in OPERATIONS.items():
        p = sub.add_parser(name, parents=[common], help=HELP.get(name), description=HELP.get(name))
        for field, info in model.model_fields.items():
            _add_field(p, field, info)
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _request_data(ns: argparse.Namespace) -> dict:
    skip = {"command", "format", "server"}
    data = {}
    for key, val in vars(ns).items():
        if key in skip or val is None:
            continue
        if key == "params":
            val = dict(item.split("=", 1) for item in val)
        data[key] = val
    return data


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result.payload, indent=2, default=str)
    if fmt == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(result.columns)
        for row in result.rows:
            w.writerow([_cell(c) for c in row])
        return out.getvalue().rstrip("\n")
    cells = [result.columns] + [[_cell(c) for c in row] for row in result.rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(result.columns))]
    return "\n".join("  ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() for r in cells)


def _remote(server: str, command: str, data: dict) -> Result | ErrorOut:
    import httpx

    resp = httpx.post(f"{server.rstrip('/')}/{command}", json=data, timeout=None)
    if resp.status_code == 200:
        return Result.model_validate(resp.json())
    body = resp.json()
    if "error" in body:
        return ErrorOut.model_validate(body)
    return ErrorOut(error="invalid_params", message=json.dumps(body.get("detail", body)))


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ns = build_parser().parse_args(argv)
    if ns.command == "serve":
        import uvicorn

        uvicorn.run("betadyn.api:app", host=ns.host, port=ns.port)
        return 0
    from .operations import error_out, execute

    data = _request_data(ns)
    try:
        if ns.server:
            res = _remote(ns.server, ns.command, data)
        else:
            res = execute(ns.command, data)
    except BetaDynError as exc:
        res = error_out(exc)
    except ValidationError as exc:
        msg = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())
        res = ErrorOut(error="invalid_params", message=msg)
    if isinstance(res, ErrorOut):
        print(json.dumps(res.model_dump(exclude={"exit_code"})), file=out)
        return res.exit_code
    print(render(res, ns.format), file=out)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
