"""Command-line interface.

Exit codes: 0 ok, 1 input error, 2 oracle cap exceeded, 3 uncertified or
unsupported regime, 4 numeric failure (including a failed ``compare``).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .corpus import random_connected_graph, random_pins
from .errors import (
    CorrDecayError,
    DomainError,
    HardConstraintError,
    InvalidInputError,
    NonContractiveError,
    NumericError,
    TooLargeError,
    UncertifiedError,
    UnsupportedRegimeError,
)
from .fptas import approx_marginal, approx_partition, certify
from .graphio import format_graph, load_graph
from .model import SpinSystem, classify, energy_to_activities, to_ising
from .oracle import DEFAULT_CAP, exact_marginals
from .phase import decay_rate_estimate, lambda_c_curve, parse_grid, write_curve_csv, write_decay_csv, zero_crossing
from .recursion import TreeParams, message_constants
from .sawtree import DEFAULT_NODE_CAP, saw_interval

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_UNCERTIFIED, EXIT_NUMERIC = 0, 1, 2, 3, 4


class _Out:
    """Emit records as ``key: value`` text, JSON lines or CSV."""

    def __init__(self, fh, fmt):
        self.fh = fh
        self.fmt = fmt
        self._csv_header = None

    def record(self, kind, fields):
        if self.fmt == "json-lines":
            self.fh.write(json.dumps({"record": kind, **fields}, allow_nan=True) + "\n")
        elif self.fmt == "csv":
            keys = list(fields)
            if self._csv_header != keys:
                self.fh.write(",".join(keys) + "\n")
                self._csv_header = keys
            self.fh.write(",".join(_csv_value(fields[k]) for k in keys) + "\n")
        else:
            self.fh.write(f"[{kind}]\n")
            for k, v in fields.items():
                self.fh.write(f"{k}: {_text_value(v)}\n")


def _text_value(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return "none"
    return str(v)


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _system(args):
    if args.energy is not None:
        tr = energy_to_activities(*args.energy)
        return tr.system, tr
    if args.beta is None or args.gamma is None or args.lam is None:
        raise InvalidInputError("give --beta, --gamma and --lambda (or --energy)")
    return SpinSystem(args.beta, args.gamma, args.lam), None


def _cert_fields(cert):
    return {
        "beta_prime": cert.beta_prime,
        "d": cert.d,
        "c": cert.c,
        "L1": cert.L1,
        "L2": cert.L2,
        "ok": cert.ok,
        "near_boundary": cert.near_boundary,
    }


def cmd_exact(args, out):
    graph = load_graph(args.graph)
    system, tr = _system(args)
    verts = [] if args.no_marginals else None
    res = exact_marginals(system, graph, verts, cap=args.cap)
    fields = {"n": graph.n, "m": graph.m, "log_Z": res.log_Z}
    if tr is not None:
        fields["log_Z_energy"] = res.log_Z - tr.log_offset(graph)
    out.record("exact", fields)
    for v, p in sorted(res.marginals.items()):
        out.record("marginal", {"vertex": v, "p": p})
    return EXIT_OK


def cmd_partition(args, out):
    graph = load_graph(args.graph)
    system, tr = _system(args)
    est = approx_partition(system, graph, args.eps, node_cap=args.node_cap, arity=args.arity)
    fields = {
        "log_Z_hat": est.log_Z_hat,
        "relative_error_bound": est.relative_error_bound,
        "epsilon": est.epsilon,
        "depth_used": est.depth_used,
        "nodes": est.nodes,
    }
    if tr is not None:
        fields["log_Z_energy_hat"] = est.log_Z_hat - tr.log_offset(graph)
    fields.update(_cert_fields(est.certificate))
    out.record("partition", fields)
    return EXIT_OK


def cmd_marginal(args, out):
    graph = load_graph(args.graph)
    system, _ = _system(args)
    if args.depth is not None:
        cert = certify(system, graph, args.arity)
        res = saw_interval(to_ising(system, graph), graph, args.vertex, args.depth, node_cap=args.node_cap)
        iv, depth, nodes = res.interval, res.depth_limit, res.nodes
    else:
        est = approx_marginal(system, graph, args.vertex, args.eps, node_cap=args.node_cap, arity=args.arity)
        cert = None
        iv, depth, nodes = est.interval, est.depth_used, est.nodes
    fields = {
        "vertex": args.vertex,
        "lo": iv.lo,
        "hi": iv.hi,
        "midpoint": iv.midpoint,
        "width": iv.width,
        "depth_used": depth,
        "nodes": nodes,
    }
    if cert is not None:
        fields["certified"] = cert.ok
    out.record("marginal", fields)
    return EXIT_OK


def cmd_certify(args, out):
    graph = load_graph(args.graph)
    system, _ = _system(args)
    cert = certify(system, graph, args.arity)
    out.record("certificate", {"regime": classify(system).value, **_cert_fields(cert)})
    for r in cert.records:
        out.record("degree", {
            "degree": r.degree,
            "lambda_v": r.lambda_v,
            "log_lambda_c": r.log_lambda_c,
            "in_region": r.in_region,
            "margin": r.margin,
            "contraction": r.contraction,
        })
    if not cert.ok:
        for v, r in cert.failures():
            out.record("failure", {
                "vertex": v,
                "degree": r.degree,
                "abs_log_lambda_v": abs(math.log(r.lambda_v)),
                "log_lambda_c": r.log_lambda_c,
            })
        return EXIT_UNCERTIFIED
    return EXIT_OK


def cmd_phase(args, out):
    grid = parse_grid(args.beta_grid)
    ds = args.d or [5, 13]
    curves = {d: lambda_c_curve(d, grid) for d in ds}
    if out.fmt == "csv":
        for i, d in enumerate(ds):
            if i == 0:
                write_curve_csv(curves[d], out.fh)
            else:
                # one header for the whole file
                for p in curves[d]:
                    val = "" if p.log_lambda_c is None else repr(float(p.log_lambda_c))
                    out.fh.write(f"{p.d},{p.beta!r},{val}\n")
    else:
        for d in ds:
            for p in curves[d]:
                out.record("phase", {"d": p.d, "beta": p.beta, "log_lambda_c": p.log_lambda_c,
                                     "boundary": p.boundary, "failed": p.failed})
    for d in ds:
        z = zero_crossing(d, curves[d])
        print(f"# d={d} zero crossing beta={z!r}", file=sys.stderr)
    return EXIT_NUMERIC if any(p.failed for c in curves.values() for p in c) else EXIT_OK


def cmd_decay(args, out):
    params = TreeParams(args.d, args.beta, args.lam)
    trace = decay_rate_estimate(params, message_constants(args.d, args.beta), args.levels)
    if out.fmt == "csv":
        write_decay_csv(trace, out.fh)
    else:
        for i, g in enumerate(trace.gaps):
            out.record("decay", {"level": i, "q_plus_minus_gap": g,
                                 "ratio": trace.ratios[i - 1] if i else None})
    return EXIT_OK


def cmd_compare(args, out):
    graph = load_graph(args.graph)
    system, _ = _system(args)
    exact = exact_marginals(system, graph, [], cap=args.cap).log_Z
    est = approx_partition(system, graph, args.eps, node_cap=args.node_cap, arity=args.arity)
    rel = abs(math.expm1(est.log_Z_hat - exact))
    ok = rel <= args.eps
    out.record("compare", {
        "log_Z_exact": exact,
        "log_Z_hat": est.log_Z_hat,
        "relative_error": rel,
        "relative_error_bound": est.relative_error_bound,
        "epsilon": args.eps,
        "within_epsilon": ok,
    })
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_random_graph(args, out):
    rng = np.random.default_rng(args.seed)
    g = random_connected_graph(rng, args.n, args.max_degree, args.extra_edges)
    if args.pins:
        g = random_pins(rng, g)
    out.fh.write(f"# random graph: n={args.n} max_degree={args.max_degree} seed={args.seed}\n")
    out.fh.write(format_graph(g))
    return EXIT_OK


def _add_params(p, eps=False, eps_default=1e-3):
    p.add_argument("--graph", required=True, help="graph file")
    p.add_argument("--beta", type=float, help="(+,+) edge activity")
    p.add_argument("--gamma", type=float, help="(-,-) edge activity")
    p.add_argument("--lambda", dest="lam", type=float, help="vertex activity of spin -")
    p.add_argument("--energy", type=float, nargs=4, metavar=("QPP", "QPM", "QMM", "H"),
                   help="energy form instead of activities")
    if eps:
        p.add_argument("--eps", type=float, default=eps_default, help="target accuracy")
        p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP,
                       help="SAW-tree nodes per marginal before aborting")
        p.add_argument("--arity", type=int, default=None,
                       help="certify against the d-ary tree for this d (default max_degree-1)")


def build_parser():
    parser = argparse.ArgumentParser(prog="corrdecay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--format", choices=("text", "json-lines", "csv"), default=None)
    parser.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="brute-force log Z and marginals")
    _add_params(p)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max free vertices")
    p.add_argument("--no-marginals", action="store_true")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("partition", help="certified approximation of log Z")
    _add_params(p, eps=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("marginal", help="enclosure of one vertex marginal")
    _add_params(p, eps=True)
    p.add_argument("--vertex", "-v", type=int, required=True)
    p.add_argument("--depth", type=int, default=None, help="fixed truncation depth instead of --eps")
    p.set_defaults(func=cmd_marginal)

    p = sub.add_parser("certify", help="uniqueness-region certificate")
    _add_params(p)
    p.add_argument("--arity", type=int, default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("phase", help="log lambda_c(beta, d) curves as CSV")
    p.add_argument("--d", type=int, action="append", help="arity (repeatable; default 5 and 13)")
    p.add_argument("--beta-grid", default="0.01:0.99:0.005", help="start:stop:step or comma list")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("decay", help="all-+ vs all-- decay trace on the d-ary tree")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--levels", type=int, default=40)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("compare", help="exact vs approximate log Z; fails if off by more than eps")
    _add_params(p, eps=True)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("random-graph", help="write a seeded random connected graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--extra-edges", type=int, default=None)
    p.add_argument("--pins", action="store_true", help="also pin a random subset")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_random_graph)
    return parser


_DEFAULT_FORMAT = {"phase": "csv", "decay": "csv"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or _DEFAULT_FORMAT.get(args.command, "text")
    if getattr(args, "eps", None) is not None and not 0 < args.eps < 1:
        print("error: --eps must lie in (0, 1)", file=sys.stderr)
        return EXIT_INPUT
    try:
        with _output(args.output) as fh:
            return args.func(args, _Out(fh, fmt))
    except TooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except UncertifiedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v, r in exc.failures:
            print(f"  vertex {v}: degree {r.degree}, |log lambda_v|={abs(math.log(r.lambda_v))!r}, "
                  f"log lambda_c={r.log_lambda_c!r}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except UnsupportedRegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except (NumericError, NonContractiveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidInputError, HardConstraintError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CorrDecayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
