"""Command line front end: ``fracbound {apply,norm,verify,suite,report}``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import runner
from . import space_norms as sn
from .corpus import default_corpus
from .errors import ConfigParseError, FracboundError, MissingManifest
from .frac_calculus import Scheme, rl_derivative, rl_integral
from .function_model import sample, spec_from_json

SPACES = ("Lp", "LpWeak", "Holder", "Sobolev", "BMO", "KR", "WRL", "BK", "Continuous")


def _common(p: argparse.ArgumentParser, out_default=None):
    p.add_argument("--config", help="run configuration (JSON)")
    p.add_argument("--n", type=int, default=None, help="grid resolution (cells)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="fft")
    p.add_argument("--out", default=out_default)


def _function_args(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--function", default=None,
                   help=f"default corpus entry: {', '.join(default_corpus())}")
    g.add_argument("--spec", default=None, help="function spec as JSON text or @path")


def _resolve_spec(args):
    if args.spec:
        text = Path(args.spec[1:]).read_text() if args.spec.startswith("@") else args.spec
        try:
            return "spec", spec_from_json(json.loads(text))
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigParseError(f"bad function spec ({exc})", "--spec") from None
    corpus = default_corpus()
    name = args.function or "t"
    if name not in corpus:
        raise ConfigParseError(f"unknown corpus function {name!r}", "--function")
    return name, corpus[name]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracbound", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("apply", help="sample a function and apply J^alpha or D^alpha")
    _common(p)
    _function_args(p)
    p.add_argument("--op", choices=("integral", "derivative"), default="integral")

    p = sub.add_parser("norm", help="one norm or seminorm of a sampled function")
    _common(p)
    _function_args(p)
    p.add_argument("--space", choices=SPACES, required=True)
    p.add_argument("--gamma", type=float, default=None, help="Hoelder or KR exponent")
    p.add_argument("--order", type=int, default=1, help="derivative order for Holder/Sobolev/BK")
    p.add_argument("--convention", choices=("strict", "integer"), default="strict")

    p = sub.add_parser("verify", help="run one theorem check over the corpus")
    _common(p)
    p.add_argument("--tag", required=True, choices=sorted(runner.TAGS))
    p.add_argument("--function", action="append", default=None, help="restrict to corpus entries")
    for name in ("q", "r", "gamma", "beta", "tol"):
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--convention", choices=("strict", "integer"), default=None)
    p.add_argument("--timings", action="store_true")

    p = sub.add_parser("suite", help="run the acceptance sweep (or --config)")
    _common(p, out_default="fracbound-results")
    p.add_argument("--suite", choices=("full", "quick"), default="full")
    p.add_argument("--timings", action="store_true", help="fill the seconds column")

    p = sub.add_parser("report", help="summarize an output directory")
    p.add_argument("dir", nargs="?", default=None)
    p.add_argument("--out", default=None)
    return parser


def _emit_samples(f, out):
    stream = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["t"] + [f"f{k}" for k in range(f.dim)])
        for t, row in zip(f.nodes, f.values):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])
    finally:
        if out:
            stream.close()


def cmd_apply(args) -> int:
    _, spec = _resolve_spec(args)
    f = sample(spec, args.n or 1024)
    alpha = 0.5 if args.alpha is None else args.alpha
    op = rl_integral if args.op == "integral" else rl_derivative
    _emit_samples(op(f, alpha, args.scheme), args.out)
    return 0


def cmd_norm(args) -> int:
    _, spec = _resolve_spec(args)
    f = sample(spec, args.n or 1024)
    p = 2.0 if args.p is None else args.p
    g = args.gamma
    s = args.space
    if s == "Lp":
        rep = sn.lp_norm(f, p)
    elif s == "Continuous":
        rep = sn.lp_norm(f, math.inf)
    elif s == "LpWeak":
        rep = sn.weak_lp_seminorm(f, p)
    elif s == "Holder":
        rep = sn.holder_seminorm(f, args.order, 0.5 if g is None else g)
    elif s == "Sobolev":
        rep = sn.sobolev_norm(f, args.order, p)
    elif s == "BMO":
        rep = sn.bmo_seminorm(f, sn.BMO_DEFAULT_CAP)
    elif s == "KR":
        rep = sn.kr_norm(f, 1.0 if g is None else g)
    elif s == "WRL":
        rep = sn.wrl_norm(f, 1.0 if args.alpha is None else args.alpha, args.convention, args.scheme)
    else:
        rep = sn.bk_norm(f, args.order, p, 1.0 if g is None else g)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["space", "params", "n", "value", "candidates", "seconds"])
    w.writerow(rep.csv_row())
    return 0


def _verify_config(args) -> dict:
    params = {}
    for key in ("alpha", "p", "q", "r", "gamma", "beta"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    if args.order is not None:
        params["n"] = args.order
    if args.convention is not None:
        params["convention"] = args.convention
    entry = {"tag": args.tag, "params": params}
    if args.function:
        entry["functions"] = args.function
    if args.tol is not None:
        entry["tol"] = args.tol
    return {"grids": [args.n or 4096], "scheme": args.scheme, "checks": [entry]}


def cmd_verify(args) -> int:
    config = runner.parse_config(_verify_config(args))
    if args.out:
        runner.run(config, args.out, timings=args.timings)
        text, code = runner.report(args.out)
        sys.stdout.write(text)
        return code
    results = runner.execute(config)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(runner.CSV_HEADER)
    for r in results:
        w.writerow(r.csv_row(args.timings))
    bad = [r for r in results if r.verdict in ("fail", "error")
           or (hasattr(r, "matches") and not r.matches)]
    return 1 if bad else 0


def cmd_suite(args) -> int:
    if args.config:
        config = runner.load_config(args.config)
    else:
        obj = runner.builtin_suite(args.suite)
        obj["scheme"] = args.scheme
        if args.n:
            obj["grids"] = [args.n]
        config = runner.parse_config(obj)
    manifest = runner.run(config, args.out, timings=args.timings)
    text, code = runner.report(args.out)
    sys.stdout.write(text)
    sys.stdout.write(f"wrote {len(manifest.files)} files to {args.out}\n")
    return code


def cmd_report(args) -> int:
    target = args.dir or args.out or "fracbound-results"
    text, code = runner.report(target)
    sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"apply": cmd_apply, "norm": cmd_norm, "verify": cmd_verify,
               "suite": cmd_suite, "report": cmd_report}[args.command]
    try:
        return handler(args)
    except (ConfigParseError, MissingManifest) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FracboundError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
