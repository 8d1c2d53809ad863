"""Command-line front end.

Standard output carries only the result JSON (or DOT / CSV text); all
diagnostics go to standard error.  Exit codes:

    0  success
    2  parse error (malformed JSON or missing fields)
    3  validation error (graph, query or spec invariants)
    4  method does not apply to the model's semantics
    5  brute-force oracle cap exceeded
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as fileio
from .algebra import rel_linf
from .bench import run_bench
from .errors import (
    CapExceeded,
    DomainError,
    GraphError,
    HeuristicFailure,
    MethodError,
    ModelFormatError,
    QueryError,
    SpecError,
)
from .graph import DEFAULT_CAP, check_marginal_independence, dualize, separates, to_dot
from .inference import Method, Query, answer
from .models import (
    build_if_model,
    build_latent_sum,
    covariance_graph,
    covariance_graph_dot,
    export_chain_graph,
    gaussian_cfg_dot,
    gaussian_decompose,
    maximal_cliques,
)

EXIT_PARSE, EXIT_VALIDATION, EXIT_METHOD, EXIT_CAP = 2, 3, 4, 5


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _result_json(f, imag_tol: float = 1e-12) -> dict:
    values = np.asarray(f.values, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
    as_complex = bool(np.max(np.abs(values.imag), initial=0.0) > imag_tol * scale)
    flat, _ = fileio.values_to_json(values, as_complex)
    return {"scope": f.names, "values": flat, "complex": as_complex}


def cmd_infer(args) -> int:
    g = fileio.load_model(args.model)
    if args.query:
        query, method, check_oracle = fileio.load_query(args.query, g)
    else:
        query, method, check_oracle = Query(), Method.AUTO, False
    if args.method:
        method = Method(args.method)
    check_oracle = check_oracle or args.check_oracle
    trace = [] if args.verbose_trace else None
    result = answer(g, query, method, cap=args.oracle_cap, trace=trace)
    for record in trace or ():
        print(json.dumps(record), file=sys.stderr)
    out = _result_json(result)
    if check_oracle:
        reference = answer(g, query, Method.ORACLE, cap=args.oracle_cap)
        out["max_deviation"] = rel_linf(result, reference)
    _emit(out)
    return 0


def _names(g, raw: str | None) -> list[str]:
    names = [s for s in (raw or "").split(",") if s]
    for name in names:
        g.var(name)
    return names


def cmd_check_indep(args) -> int:
    g = fileio.load_model(args.model)
    try:
        a, b, s = _names(g, args.a), _names(g, args.b), _names(g, args.separator)
    except KeyError as exc:
        raise QueryError(f"unknown variable {exc}") from None
    if set(a) & set(b) or set(a) & set(s) or set(b) & set(s):
        raise QueryError("variable sets A, B and S must be pairwise disjoint")
    verdict = check_marginal_independence(g, a, b, cap=args.oracle_cap)
    _emit({
        "separated_by_empty_or_given_S": separates(g, a, b, s),
        "independent": verdict.independent,
        "max_deviation": verdict.max_deviation,
    })
    return 0


def cmd_dualize(args) -> int:
    g = fileio.load_model(args.model)
    dual = dualize(g)
    if args.out:
        fileio.save_model(dual, args.out, as_complex=True)
    else:
        _emit(fileio.model_to_dict(dual, as_complex=True))
    return 0


def cmd_export_dot(args) -> int:
    doc = fileio.read_json(args.path)
    if args.kind == "model":
        text = to_dot(fileio.model_from_dict(doc))
    elif args.kind == "chain":
        text = export_chain_graph(fileio.latent_sum_from_dict(doc))
    elif args.kind == "latent-sum-cfg":
        text = to_dot(build_latent_sum(fileio.latent_sum_from_dict(doc)))
    elif args.kind == "covariance":
        text = covariance_graph_dot(fileio.covariance_model_from_dict(doc))
    elif args.kind == "gaussian-cfg":
        text = gaussian_cfg_dot(fileio.covariance_model_from_dict(doc))
    else:
        text = to_dot(build_if_model(fileio.if_spec_from_dict(doc)))
    sys.stdout.write(text)
    return 0


def cmd_build_model(args) -> int:
    doc = fileio.read_json(args.spec)
    if args.kind == "latent-sum":
        out = fileio.model_to_dict(build_latent_sum(fileio.latent_sum_from_dict(doc)))
    elif args.kind == "if":
        out = fileio.model_to_dict(build_if_model(fileio.if_spec_from_dict(doc)))
    else:
        model = fileio.covariance_model_from_dict(doc)
        factors = gaussian_decompose(model)
        out = {
            "names": list(model.names),
            "cliques": [sorted(int(i) for i in q) for q in maximal_cliques(covariance_graph(model))],
            "factors": [
                {
                    "scope": [model.names[i] for i in f.scope],
                    "mean": f.mean.tolist(),
                    "covariance": f.covariance.tolist(),
                }
                for f in factors
            ],
        }
    text = json.dumps(out, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    report = run_bench(args.template, args.length, sizes, args.reps, args.seed)
    print(report.table(), file=sys.stderr)
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    sys.stdout.write(report.to_csv())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convfactor", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="answer a marginalize/evidence query")
    p.add_argument("model")
    p.add_argument("query", nargs="?")
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--check-oracle", action="store_true", help="also report deviation from brute force")
    p.add_argument("--verbose-trace", action="store_true", help="elimination steps as JSON lines on stderr")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("check-indep", help="test marginal independence of two variable sets")
    p.add_argument("model")
    p.add_argument("--a", required=True, help="comma-separated variable names")
    p.add_argument("--b", required=True, help="comma-separated variable names")
    p.add_argument("--separator", default="", help="comma-separated names of the cut set S")
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_check_indep)

    p = sub.add_parser("dualize", help="write the Fourier-dual model")
    p.add_argument("model")
    p.add_argument("out", nargs="?")
    p.set_defaults(func=cmd_dualize)

    p = sub.add_parser("export-dot", help="Graphviz text for a model or spec")
    p.add_argument("path")
    p.add_argument(
        "--kind",
        default="model",
        choices=["model", "chain", "latent-sum-cfg", "covariance", "gaussian-cfg", "if"],
    )
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("build-model", help="build a model from a spec file")
    p.add_argument("kind", choices=["latent-sum", "gaussian", "if"])
    p.add_argument("spec")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_build_model)

    p = sub.add_parser("bench", help="time direct elimination against the FFT route")
    p.add_argument("--template", choices=["chain", "star"], default="chain")
    p.add_argument("--length", type=int, default=4)
    p.add_argument("--sizes", default="16,64,256,1024")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="also write the CSV report here")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr)
    try:
        return args.func(args)
    except ModelFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except MethodError as exc:
        print(f"method error: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except CapExceeded as exc:
        print(f"oracle cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (GraphError, QueryError, SpecError, DomainError, HeuristicFailure) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
