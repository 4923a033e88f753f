"""Command-line front end.

    plustrace [--precision BITS] [--output json|csv|text] [--cache FILE] [--workers N] COMMAND ...

Exit status: 0 on success, 1 if any checked inequality failed, 2 on a usage error,
3 on an internal consistency error.
"""

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from . import bounds, kloosterman, modeval, weyl
from .arith import FactoredDiscriminant, as_fraction, factorizations, is_discriminant
from .errors import DomainError, InternalError, UnsupportedParameterError
from .report import _plain, summarize

PRECISION_ENV = "PLUSTRACE_PRECISION"
DEFAULT_PRECISION = 128
MIN_PRECISION, MAX_PRECISION = 64, 4096


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict
    precision_bits: int = DEFAULT_PRECISION
    output: str = "json"
    cache_path: str | None = None
    workers: int = 1


@dataclass
class Result:
    rows: list
    reports: list = field(default_factory=list)
    is_check: bool = False


# ---------------------------------------------------------------------------
# parameter types


def _int(s):
    try:
        return int(s)
    except ValueError:
        raise UsageError(f"not an integer: {s!r}") from None


def _frac(s):
    try:
        return as_fraction(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {s!r}") from None


def _complex(s):
    try:
        return complex(s.replace(" ", ""))
    except ValueError:
        raise UsageError(f"not a complex number: {s!r}") from None


def _choice(*options):
    def conv(s):
        if s not in options:
            raise UsageError(f"expected one of {', '.join(options)}, got {s!r}")
        return s

    return conv


# name -> (converter, default or None if required, help)
COMMANDS = {
    "splus": {
        "k": (_frac, "1/2", "weight, 1/2 or -1/2"),
        "m": (_int, None, ""),
        "n": (_int, None, ""),
        "c": (_int, None, "modulus, a positive multiple of 4"),
    },
    "weyl": {
        "m": (_int, None, ""),
        "D": (_int, None, "negative discriminant"),
        "d": (_int, None, "fundamental discriminant dividing D"),
        "c": (_int, None, "modulus, a positive multiple of 4"),
        "method": (_choice("direct", "kohnen", "both"), "both", ""),
    },
    "trace": {
        "m": (_int, None, ""),
        "D": (_int, None, "negative discriminant"),
        "d": (_int, "1", "fundamental discriminant dividing D"),
    },
    "rect": {
        "m": (_int, None, ""),
        "D": (_int, None, "negative discriminant"),
        "d": (_int, "1", "fundamental discriminant dividing D"),
        "Y": (_frac, None, "rectangle height"),
        "conjugate": (_choice("yes", "no"), "yes", "include the conjugate terms"),
    },
    "zeta": {
        "m": (_int, None, ""),
        "n": (_int, None, ""),
        "s": (_complex, None, "complex s with Re(s) > 3/4"),
        "c_max": (_int, None, "truncation point, a multiple of 4"),
    },
    "check-theorem1": {
        "m": (_int, None, ""),
        "D": (_int, None, "negative discriminant"),
        "d": (_int, "1", "fundamental discriminant dividing D"),
        "delta": (_frac, "1/4", "1/4 or 1/5"),
    },
    "check-theorem2": {
        "m": (_int, None, ""),
        "D": (_int, None, "negative discriminant"),
        "d": (_int, "1", "fundamental discriminant dividing D"),
        "Y": (_frac, None, "rectangle height, 0 < Y <= 1/(2 pi m)"),
        "delta": (_frac, "1/4", "1/4 or 1/5"),
        "strict": (_choice("yes", "no"), "yes", "reject Y > 1/(2 pi m)"),
    },
    "check-theorem51": {
        "m": (_int, None, "positive"),
        "n": (_int, None, "negative"),
        "x_max": (_int, None, "checks every jump point 4 | x <= x_max"),
        "delta": (_frac, "1/4", "1/4 or 1/5"),
    },
    "check-weil": {
        "k": (_frac, "1/2", "weight, 1/2 or -1/2"),
        "m": (_int, None, ""),
        "n": (_int, None, ""),
        "c": (_int, None, "modulus, a positive multiple of 4"),
    },
    "recover": {
        "m": (_int, None, ""),
        "D": (_int, None, "negative discriminant"),
        "d": (_int, "1", "fundamental discriminant dividing D"),
        "Y": (_frac, "1/20", "rectangle height"),
    },
}


def _fd(p):
    return FactoredDiscriminant.of(p["D"], p["d"])


def _policy(precision):
    return modeval.PrecisionPolicy(start_bits=precision, max_bits=MAX_PRECISION)


def _open_cache(path, readonly=False):
    if path is None:
        return None
    return kloosterman.KloostermanCache(path, readonly=readonly)


# ---------------------------------------------------------------------------
# command implementations; each returns a Result


def do_splus(p, precision, cache):
    v = kloosterman.cached_s_plus(cache, p["k"], p["m"], p["n"], p["c"])
    return Result([{"k": v.k, "m": v.m, "n": v.n, "c": v.c, "value": v.value, "err": v.err}])


def do_weyl(p, precision, cache):
    fd = _fd(p)
    row = {"m": p["m"], "D": fd.D, "d": fd.d, "d_prime": fd.d_prime, "c": p["c"]}
    if p["method"] in ("direct", "both"):
        a = weyl.weyl_direct(p["m"], fd, p["c"])
        row["direct"], row["direct_err"] = a.value, a.err
    if p["method"] in ("kohnen", "both"):
        b = weyl.weyl_kohnen(p["m"], fd, p["c"])
        row["kohnen"], row["kohnen_err"] = b.value, b.err
    return Result([row])


def do_trace(p, precision, cache):
    return Result([modeval.trace(p["m"], _fd(p), _policy(precision)).to_dict()])


def do_rect(p, precision, cache):
    fd = _fd(p)
    r = modeval.rectangle_sum(p["m"], fd, p["Y"], p["conjugate"] == "yes")
    row = {"m": p["m"], "D": fd.D, "d": fd.d, "Y": p["Y"], "conjugate": p["conjugate"] == "yes"}
    row.update(value=r.value, err=r.err, count=r.count)
    return Result([row])


def do_zeta(p, precision, cache):
    z = kloosterman.zeta_partial(p["m"], p["n"], p["s"], p["c_max"])
    row = {"m": p["m"], "n": p["n"], "s_re": p["s"].real, "s_im": p["s"].imag, "c_max": p["c_max"]}
    row.update(value_re=z.value.real, value_im=z.value.imag, tail_bound=z.tail_bound, err=z.err)
    return Result([row])


def do_check_theorem1(p, precision, cache):
    r = bounds.check_theorem1(p["m"], _fd(p), p["delta"], _policy(precision))
    return Result([], [r], True)


def do_check_theorem2(p, precision, cache):
    tp = bounds.TheoremParams(p["m"], _fd(p), p["Y"], p["delta"])
    r = bounds.check_theorem2(tp, _policy(precision), strict=p["strict"] == "yes")
    return Result([], [r], True)


def do_check_theorem51(p, precision, cache):
    reps = kloosterman.theorem51_reports([(p["m"], p["n"])], [p["delta"]], p["x_max"], cache)
    return Result([], reps, True)


def do_check_weil(p, precision, cache):
    v = kloosterman.cached_s_plus(cache, p["k"], p["m"], p["n"], p["c"])
    r = kloosterman.BoundReport(
        "weil",
        {"k": v.k, "m": v.m, "n": v.n, "c": v.c},
        abs(v.value),
        kloosterman.weil_rhs(v.m, v.n, v.c),
        err=v.err,
    )
    return Result([], [r], True)


def do_recover(p, precision, cache):
    fd = _fd(p)
    r = bounds.nearest_integer_recovery(p["m"], fd, p["Y"], _policy(precision))
    row = {"m": p["m"], "D": fd.D, "d": fd.d, "Y": r.Y, "candidate": r.candidate, "trace": r.trace}
    row.update(matches=r.matches, approximation=float(r.approximation))
    return Result([row])


HANDLERS = {
    "splus": do_splus,
    "weyl": do_weyl,
    "trace": do_trace,
    "rect": do_rect,
    "zeta": do_zeta,
    "check-theorem1": do_check_theorem1,
    "check-theorem2": do_check_theorem2,
    "check-theorem51": do_check_theorem51,
    "check-weil": do_check_weil,
    "recover": do_recover,
}


def run_one(command, params, precision, cache=None):
    """Execute one command on converted parameters."""
    return HANDLERS[command](params, precision, cache)


# ---------------------------------------------------------------------------
# scan


def parse_range(text, conv=_int):
    """'a:b[:step]' (inclusive, either direction), comma lists of those, or plain value lists."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise UsageError(f"malformed range {text!r}")
        if ":" in part and conv is _int:
            bits = part.split(":")
            if len(bits) not in (2, 3):
                raise UsageError(f"malformed range {text!r}")
            a, b = _int(bits[0]), _int(bits[1])
            step = _int(bits[2]) if len(bits) == 3 else 1
            if step <= 0:
                raise UsageError(f"malformed range {text!r}")
            out.extend(range(a, b + 1, step) if a <= b else range(a, b - 1, -step))
        else:
            out.append(conv(part))
    return out


def _sort_key(v):
    if isinstance(v, complex):
        return (0, v.real, v.imag)
    if isinstance(v, (int, Fraction)):
        return (0, v, 0)
    return (1, v, 0)


def expand_cells(command, raw):
    """Cartesian product of the parameter values, ordered by cell key.

    Values of D that are not discriminants are skipped, and d = 'all' stands for every
    factorization D = d d' of each D.
    """
    spec = COMMANDS[command]
    all_d = "D" in spec and raw.get("d", "").strip() == "all"
    axes = []
    for name, (conv, _, _) in spec.items():
        if all_d and name == "d":
            axes.append([None])
            continue
        vals = parse_range(raw[name], conv)
        if name == "D":
            vals = [D for D in vals if D < 0 and is_discriminant(D)]
        axes.append(sorted(set(vals), key=_sort_key))
    cells = []
    for combo in itertools.product(*axes):
        cell = dict(zip(spec, combo))
        if all_d:
            for fd in factorizations(cell["D"]):
                cells.append({**cell, "d": fd.d})
        else:
            cells.append(cell)
    return cells


_WORKER_CACHE = None


def _init_worker(cache_path):
    global _WORKER_CACHE
    _WORKER_CACHE = _open_cache(cache_path, readonly=True)


def _run_cell(args):
    command, params, precision = args
    return run_one(command, params, precision, _WORKER_CACHE)


def scan(command, raw, precision, cache_path=None, workers=1):
    cells = expand_cells(command, raw)
    jobs = [(command, c, precision) for c in cells]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(cache_path,)) as ex:
            results = list(ex.map(_run_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
        if cache_path is not None and command == "splus":
            with _open_cache(cache_path) as cache:
                for res in results:
                    for row in res.rows:
                        cache.put(kloosterman.PlusKloostermanValue(
                            row["k"], row["m"], row["n"], row["c"], row["value"], row["err"]
                        ))
    else:
        cache = _open_cache(cache_path)
        try:
            results = [run_one(command, c, precision, cache) for c in cells]
        finally:
            if cache is not None:
                cache.close()
    rows, reports = [], []
    for res in results:
        rows.extend(res.rows)
        reports.extend(res.reports)
    return Result(rows, reports, command.startswith("check-"))


# ---------------------------------------------------------------------------
# output


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[prefix + k] = _plain(v)
    return out


def _finite(v):
    """JSON has no inf/nan; those become null."""
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _finite(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_finite(x) for x in v]
    return v


def render(result, output, command, scanning=False):
    if result.is_check:
        rows = [r.to_dict() for r in result.reports]
    else:
        rows = [{k: _plain(v) for k, v in r.items()} for r in result.rows]
    if output == "json":
        if result.is_check:
            doc = {"reports": rows, "summary": summarize(result.reports)}
        elif scanning:
            doc = {"rows": rows}
        else:
            doc = rows[0]
        if scanning:
            doc = {"command": command, **doc}
        return json.dumps(_finite(doc), indent=2, allow_nan=False) + "\n"
    flat = [_flatten(r) for r in rows]
    if output == "csv":
        buf = io.StringIO()
        fields = list(dict.fromkeys(k for r in flat for k in r))
        w = csv.DictWriter(buf, fields, lineterminator="\n")
        w.writeheader()
        w.writerows(flat)
        return buf.getvalue()
    lines = []
    for r in flat:
        lines.append(" ".join(f"{k}={v}" for k, v in r.items()))
    if result.is_check:
        s = summarize(result.reports)
        lines.append(f"total={s['total']} failures={s['failures']}")
    return "\n".join(lines) + "\n"


def schema(name):
    """The JSON schema (as a dict) for the output of ``name``: a command, 'check' or 'scan'."""
    fname = "check.json" if name.startswith("check-") else f"{name}.json"
    text = resources.files("plustrace").joinpath("schemas", fname).read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# argument parsing


def _precision(s):
    p = _int(s)
    if not MIN_PRECISION <= p <= MAX_PRECISION:
        raise argparse.ArgumentTypeError(f"precision must be in [{MIN_PRECISION}, {MAX_PRECISION}]")
    return p


def _workers(s):
    w = _int(s)
    if w < 1:
        raise argparse.ArgumentTypeError("workers must be at least 1")
    return w


def _global_options(parser, suppress):
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--precision", type=_precision, default=dflt(None),
                        help=f"working precision in bits (default ${PRECISION_ENV} or {DEFAULT_PRECISION})")
    parser.add_argument("--output", choices=("json", "csv", "text"), default=dflt("json"))
    parser.add_argument("--cache", default=dflt(None), metavar="FILE",
                        help="Kloosterman sum cache (CSV), read through and written back")
    parser.add_argument("--workers", type=_workers, default=dflt(1), help="processes for scan")


def _add_params(parser, command):
    for name, (_, default, help_) in COMMANDS[command].items():
        flag = "--" + name.replace("_", "-")
        kw = {"dest": name, "help": help_ or None}
        if default is None:
            kw["required"] = True
        else:
            kw["default"] = default
        parser.add_argument(flag, **kw)


def build_parser():
    p = argparse.ArgumentParser(prog="plustrace", description=__doc__.split("\n")[0])
    _global_options(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        _global_options(sp, suppress=True)
        _add_params(sp, cmd)
    scan_p = sub.add_parser("scan", help="run a command over ranges a:b[:step] or lists x,y,z")
    _global_options(scan_p, suppress=True)
    scan_sub = scan_p.add_subparsers(dest="target", required=True)
    for cmd in COMMANDS:
        sp = scan_sub.add_parser(cmd)
        _global_options(sp, suppress=True)
        _add_params(sp, cmd)
    return p


def _resolve_precision(ns):
    if ns.precision is not None:
        return ns.precision
    env = os.environ.get(PRECISION_ENV)
    if env is None:
        return DEFAULT_PRECISION
    try:
        return _precision(env)
    except (UsageError, argparse.ArgumentTypeError) as e:
        raise UsageError(f"{PRECISION_ENV}: {e}") from None


_PARAM_FLAGS = {"--" + n.replace("_", "-") for spec in COMMANDS.values() for n in spec}


def _join_values(argv):
    """Attach values to parameter flags so negative numbers and ranges like -3:-20 parse."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _PARAM_FLAGS and i + 1 < len(argv) and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def config_from_args(argv):
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = build_parser().parse_args(_join_values(argv))
    command = ns.command if ns.command != "scan" else ns.target
    params = {name: getattr(ns, name) for name in COMMANDS[command]}
    cfg = RunConfig(
        command=ns.command if ns.command != "scan" else "scan:" + command,
        params=params,
        precision_bits=_resolve_precision(ns),
        output=ns.output,
        cache_path=ns.cache,
        workers=ns.workers,
    )
    return cfg


def run(cfg, out=None):
    """Execute a RunConfig, write the serialized result, return the exit status."""
    out = out or sys.stdout
    if cfg.command.startswith("scan:"):
        command = cfg.command[5:]
        result = scan(command, cfg.params, cfg.precision_bits, cfg.cache_path, cfg.workers)
        text = render(result, cfg.output, command, scanning=True)
    else:
        command = cfg.command
        params = {k: COMMANDS[command][k][0](v) for k, v in cfg.params.items()}
        cache = _open_cache(cfg.cache_path)
        try:
            result = run_one(command, params, cfg.precision_bits, cache)
        finally:
            if cache is not None:
                cache.close()
        text = render(result, cfg.output, command)
    out.write(text)
    return 1 if any(not r.passed for r in result.reports) else 0


def main(argv=None):
    try:
        cfg = config_from_args(argv)
        return run(cfg)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    except (UsageError, DomainError, UnsupportedParameterError) as e:
        print(f"plustrace: error: {e}", file=sys.stderr)
        return 2
    except InternalError as e:
        print(f"plustrace: internal error: {e}", file=sys.stderr)
        return 3
