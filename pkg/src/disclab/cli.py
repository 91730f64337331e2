"""Batch front-end: predict, run experiments, verify oracles.

Every run echoes a resolved manifest line (subcommand plus every effective
parameter, content-hashed) so reports can be traced back to their inputs.
Config files supply defaults under a [defaults] section; explicit flags win.

Exit codes: 0 success, 1 verification failure, 2 bad usage or bad parameter,
3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import os
import sys

from . import bias
from . import harness as hn
from . import ktuples as kt
from . import quadform as qf
from . import sequences as sq
from . import verify as vf
from .errors import (
    ConfigurationError,
    DisclabError,
    DomainError,
    ResourceError,
    UnsupportedError,
)

_KINDS = ("primes", "two_squares", "rough", "quadform", "ktuple")


def _fmt(v) -> str:
    if isinstance(v, float):
        return "%.12g" % v
    return str(v)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="disclab")
    top.add_argument("--config", help="ini file; [defaults] section seeds flag values")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="closed-form bias prediction for one family")
    p.add_argument("--family", choices=("primes", "quadform", "two_squares", "twin", "ktuple", "rough"))
    p.add_argument("--a", type=int)
    p.add_argument("--M", type=float)
    p.add_argument("--x", type=int)
    p.add_argument("--form", help="quadratic form 'alpha,beta,gamma'")
    p.add_argument("--tuple", help="linear forms 'a1,b1;a2,b2;...'")
    p.add_argument("--y", type=int, help="roughness cutoff")

    d = sub.add_parser("discrepancy", help="empirical average of A(x;q,a) minus its model term")
    _kind_flags(d)
    d.add_argument("--a", type=int)
    d.add_argument("--x", type=int)
    d.add_argument("--M", type=float)
    d.add_argument("--mode", choices=("full", "dyadic"))
    d.add_argument("--filter", dest="coprime_filter", choices=("none", "a", "P"))
    d.add_argument("--out", help="report path (.json for json, else csv)")
    d.add_argument("--threads", type=int)

    s = sub.add_parser("s5", help="smoothed/sharp sum combination of the bias expansion")
    _kind_flags(s, tuple_ok=False)
    s.add_argument("--a", type=int)
    s.add_argument("--M", type=float)
    s.add_argument("--R", type=float)
    s.add_argument("--x", type=int)

    q = sub.add_parser("quadform", help="representation counts R_a(q) of a quadratic form")
    q.add_argument("--form", required=True)
    q.add_argument("--a", type=int, required=True)
    q.add_argument("--q", type=int, required=True)
    q.add_argument("--brute", action="store_true", help="also enumerate and compare")

    c = sub.add_parser("sieve-cache", help="sieve a window once and cache it for reuse")
    _kind_flags(c)
    c.add_argument("--x", type=int)
    c.add_argument("--dir", help="cache directory (default $DISCLAB_CACHE_DIR or .)")

    v = sub.add_parser("verify", help="run oracle/identity property suites")
    v.add_argument("suite", nargs="?", default="all",
                   choices=("all", "quadform", "multfn", "ktuples", "identities"))
    v.add_argument("--deep", action="store_true", help="acceptance-scale grids")
    return top


def _kind_flags(p: argparse.ArgumentParser, tuple_ok: bool = True):
    kinds = _KINDS if tuple_ok else tuple(k for k in _KINDS if k != "ktuple")
    p.add_argument("--kind", choices=kinds)
    p.add_argument("--form", help="quadratic form 'alpha,beta,gamma'")
    if tuple_ok:
        p.add_argument("--tuple", help="linear forms 'a1,b1;a2,b2;...'")
    p.add_argument("--y", type=int, help="roughness cutoff")


# per-subcommand resolvable keys: dest -> (caster from config text, default)
_RESOLVE = {
    "predict": {"family": (str, None), "a": (int, None), "M": (float, None),
                "x": (int, None), "form": (str, None), "tuple": (str, None), "y": (int, None)},
    "discrepancy": {"kind": (str, None), "a": (int, None), "x": (int, None),
                    "M": (float, None), "mode": (str, "full"),
                    "coprime_filter": (str, "none"), "out": (str, None),
                    "threads": (int, None), "form": (str, None),
                    "tuple": (str, None), "y": (int, None)},
    "s5": {"kind": (str, None), "a": (int, None), "M": (float, None),
           "R": (float, None), "x": (int, None), "form": (str, None), "y": (int, None)},
    "quadform": {},
    "sieve-cache": {"kind": (str, None), "x": (int, None), "dir": (str, None),
                    "form": (str, None), "tuple": (str, None), "y": (int, None)},
    "verify": {},
}


def _apply_config(args: argparse.Namespace):
    rules = _RESOLVE.get(args.command, {})
    file_vals = {}
    if args.config:
        parser = configparser.ConfigParser()
        read = parser.read(args.config)
        if not read:
            raise ConfigurationError(f"config file {args.config!r} not readable")
        if parser.has_section("defaults"):
            file_vals = dict(parser.items("defaults"))
    for dest, (cast, default) in rules.items():
        if getattr(args, dest, None) is None:
            if dest in file_vals:
                setattr(args, dest, cast(file_vals[dest]))
            else:
                setattr(args, dest, default)


def _manifest(args: argparse.Namespace) -> str:
    keys = sorted(_RESOLVE.get(args.command, {}))
    parts = [f"command={args.command}"]
    for k in keys:
        v = getattr(args, k, None)
        parts.append(f"{k}={'-' if v is None else _fmt(v)}")
    if args.command == "verify":
        parts.append(f"suite={args.suite}")
        parts.append(f"deep={args.deep}")
    parts.append("determinism=seed-free")
    body = " ".join(parts)
    digest = hashlib.sha256(body.encode()).hexdigest()[:12]
    return f"manifest {digest}: {body}"


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise ConfigurationError(f"--{name.replace('_', '-')} is required here")


def _kind_from(args) -> sq.SequenceKind:
    _require(args, "kind")
    k = args.kind
    if k == "primes":
        return sq.PrimesLambda()
    if k == "two_squares":
        return sq.SumTwoSquares()
    if k == "rough":
        _require(args, "y")
        return sq.Rough(args.y)
    if k == "quadform":
        _require(args, "form")
        return sq.QuadFormMult(qf.parse_form(args.form))
    if k == "ktuple":
        _require(args, "tuple")
        return sq.KTupleWeight(kt.parse_tuple(args.tuple))
    raise ConfigurationError(f"unknown kind {k!r}")


def _print_prediction(pred: bias.BiasPrediction):
    print(f"value = {_fmt(pred.leading_value)}")
    print(f"logM_exponent = {pred.logM_exponent}")
    print(f"class = {'bounded' if pred.zero else 'leading'}")
    print(f"normalization = {pred.normalization}")
    print(f"conditional_on = {pred.conditional_on or '-'}")
    print(f"tail_bound = {_fmt(pred.tail_bound)}")


def cmd_predict(args) -> int:
    _require(args, "family", "a", "M")
    form = qf.parse_form(args.form) if args.form else None
    tup = kt.parse_tuple(args.tuple) if args.tuple else None
    pred = bias.predict_example(
        args.family, args.a, args.M, args.x, form=form, tuple=tup, y=args.y
    )
    _print_prediction(pred)
    return 0


def _cache_path(kind: sq.SequenceKind, x: int, directory: str) -> str:
    safe = kind.label().replace(";", "+").replace(",", "_")
    return os.path.join(directory, f"{safe}.x{x}.sieve")


def _window_for(kind: sq.SequenceKind, x: int):
    cache_dir = os.environ.get("DISCLAB_CACHE_DIR")
    if cache_dir:
        path = _cache_path(kind, x, cache_dir)
        if os.path.exists(path):
            win = sq.load_window(path)
            if win.kind_label == kind.label() and win.lo == 1 and win.hi >= x:
                return win
    return sq.sieve(kind, 1, x)


def cmd_discrepancy(args) -> int:
    kind = _kind_from(args)
    _require(args, "a", "x", "M")
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    cfg = hn.ExperimentConfig(
        kind=kind, a=args.a, x=args.x, M=args.M,
        mode=args.mode, coprime_filter=args.coprime_filter, output=args.out,
    )
    report = hn.empirical_average(cfg, window=_window_for(kind, args.x), threads=threads)
    print(f"q_count = {report.q_count}")
    print(f"empirical_sum = {_fmt(report.empirical_sum)}")
    print(f"normalized_avg = {_fmt(report.normalized_avg)}")
    if report.predicted is None:
        print("predicted = - (no closed form for this mode/filter combination)")
    else:
        print(f"predicted = {_fmt(report.predicted.leading_value)}")
        print(f"ratio = {_fmt(report.ratio)}")
        if report.predicted.conditional_on:
            print(f"conditional_on = {report.predicted.conditional_on}")
    if args.out:
        fmt = "json" if args.out.endswith(".json") else "csv"
        hn.compare_and_export(report, args.out, format=fmt)
        print(f"report written: {args.out}")
    return 0


def cmd_s5(args) -> int:
    kind = _kind_from(args)
    _require(args, "a", "M", "R", "x")
    model = hn.model_for(kind)
    if model is None:
        raise UnsupportedError(f"s5 needs a multiplicative model; {kind.label()} has none")
    sums = hn.s5_sums(model, args.a, args.M, args.R, args.x)
    print(f"S_R = {_fmt(sums.S_R)}")
    print(f"S_M = {_fmt(sums.S_M)}")
    print(f"S_tail = {_fmt(sums.S_tail)}")
    print(f"S5 = {_fmt(sums.S5)}")
    pred = bias.mu_k(model, args.a, args.M)
    print(f"mu_over_M = {_fmt(pred.leading_value / args.M)}")
    if pred.leading_value != 0.0:
        print(f"ratio = {_fmt(sums.S5 * args.M / pred.leading_value)}")
    return 0


def cmd_quadform(args) -> int:
    form = qf.parse_form(args.form)
    closed = qf.Ra_closed(form, args.a, args.q)
    print(f"R_a(q) = {closed}")
    print(f"rho_a(q) = {qf.rho_a(form, args.a, args.q)}")
    if args.brute:
        brute = qf.Ra_brute(form, args.a, args.q)
        print(f"brute = {brute}")
        print(f"match = {closed == brute}")
        if closed != brute:
            return 1
    return 0


def cmd_sieve_cache(args) -> int:
    kind = _kind_from(args)
    _require(args, "x")
    directory = args.dir or os.environ.get("DISCLAB_CACHE_DIR") or "."
    os.makedirs(directory, exist_ok=True)
    window = sq.sieve(kind, 1, args.x)
    path = _cache_path(kind, args.x, directory)
    sq.save_window(window, path)
    print(f"cache written: {path} ({len(window.support)} entries)")
    return 0


def cmd_verify(args) -> int:
    names = list(vf.SUITES) if args.suite == "all" else [args.suite]
    depth = 2 if args.deep else 1
    results = vf.run_suites(names, depth=depth)
    bad = 0
    for suite, res in results:
        status = "ok  " if res.ok else "FAIL"
        print(f"{status} {suite}.{res.name}: {res.cases} cases, "
              f"{len(res.failures)} failures ({res.seconds:.2f} s)")
        for text in res.failures:
            print(f"      counterexample: {text}")
        bad += len(res.failures)
    print(f"{len(results)} properties, {bad} failing cases")
    return 0 if bad == 0 else 1


_DISPATCH = {
    "predict": cmd_predict,
    "discrepancy": cmd_discrepancy,
    "s5": cmd_s5,
    "quadform": cmd_quadform,
    "sieve-cache": cmd_sieve_cache,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        print(_manifest(args))
        return _DISPATCH[args.command](args)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DisclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
