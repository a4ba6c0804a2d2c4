"""Command-line front end.

Exit codes: 0 success, 1 validation or input error, 2 a gated experiment row
failed. Errors go to stderr as ``treelab: error[<kind>]: <message>``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from . import asymptotics as asy
from .counting import (CountTable, TableTooSmall, _ctx, build_counts, cache_dir, catalan,
                       load_table, save_table, verify_table)
from .experiments import EXPERIMENTS, run_experiment
from .partition import height_law, partition_function, root_degree_law, w_sum, z_over_w
from .sampler import make_rng, sample_biased_trees
from .tree_core import PlaneTree, stats, to_contour

EXIT_OK, EXIT_INVALID, EXIT_GATE = 0, 1, 2
EXACT_CEILING = 1500
LOG_CEILING = 30000


class CliError(Exception):
    def __init__(self, message: str, kind: str = "validation"):
        super().__init__(message)
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, "usage")


def _log10(lr) -> str:
    if lr.sign == 0:
        return "-inf"
    return _ctx.nstr(lr.log / _ctx.ln10, 17)


def _nonneg(v: str) -> float:
    x = float(v)
    if not math.isfinite(x) or x < 0:
        raise argparse.ArgumentTypeError("must be a finite number >= 0")
    return x


def _pos_int(v: str) -> int:
    x = int(v)
    if x < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return x


def _backend_for(n: int, backend: str | None) -> str:
    if backend is None:
        return "exact" if n <= EXACT_CEILING else "log"
    if backend == "exact" and n > EXACT_CEILING:
        print(f"treelab: warning: exact backend above n={EXACT_CEILING} may be slow",
              file=sys.stderr)
    if backend == "log" and n > LOG_CEILING:
        print(f"treelab: warning: log backend above n={LOG_CEILING} may be slow", file=sys.stderr)
    return backend


def _table(n: int, backend: str | None, m: int | None = None) -> CountTable:
    b = _backend_for(n, backend)
    return build_counts(n, n if m is None else m, backend=b, engine="fast")


# ---------------------------------------------------------------- subcommands

def cmd_count(a, out) -> int:
    if a.verify_tree is not None:
        t = PlaneTree.from_parens(a.verify_tree)
        s = stats(t)
        print(f"size={t.size} height={s.height} width={s.width} root_degree={s.root_degree} "
              f"generations={','.join(map(str, s.generation_sizes))}", file=out)
        return EXIT_OK
    if a.catalan is not None:
        print(f"C({a.catalan})={catalan(a.catalan)}", file=out)
        return EXIT_OK
    if a.build:
        if a.n is None:
            raise CliError("--build needs --n (and optionally --m)")
        m = a.m if a.m is not None else a.n
        table = build_counts(a.n, m, backend=a.backend or "exact",
                             engine="recurrence" if (a.backend or "exact") == "exact" else "auto")
        path = save_table(table, a.cache_dir)
        print(f"saved {path} hash={table.content_hash()}", file=out)
        return EXIT_OK
    if a.n is None:
        raise CliError("count needs --n (with --m or --h), --catalan, --build or --verify-tree")
    if (a.m is None) == (a.h is None):
        raise CliError("give exactly one of --m (height < m) or --h (height exactly h)")
    m = a.m if a.m is not None else a.h + 1
    if m < 0:
        raise CliError("--m/--h must be >= 0")
    table = _table(a.n, a.backend, m)
    label = f"H({a.n},{a.m})" if a.m is not None else f"E({a.n},{a.h})"
    if table.exact:
        v = table.H(a.n, a.m) if a.m is not None else table.E(a.n, a.h)
        print(f"{label}={v}", file=out)
    else:
        if a.m is not None:
            lg = table.log_H(a.n, a.m)
        else:
            hi, lo = table.log_H(a.n, a.h + 1), table.log_H(a.n, a.h)
            lg = hi + math.log(-math.expm1(lo - hi)) if lo < hi else -math.inf
        print(f"{label}~{'0' if lg == -math.inf else '10^' + repr(lg / math.log(10))}", file=out)
    return EXIT_OK


def cmd_law(a, out) -> int:
    table = _table(a.n, a.backend)
    if a.kind == "height":
        law = height_law(a.n, a.mu, table)
        log_pmf = law.log_pmf
    else:
        if not table.exact:
            table = build_counts(a.n, a.n, engine="fast")
        log_pmf = root_degree_law(a.n, a.mu, table).log_pmf
    rows = [(i, float(lp) / math.log(10) if lp > -math.inf else -math.inf, math.exp(lp))
            for i, lp in enumerate(log_pmf)]
    if a.kind == "root-degree":
        rows = rows[1:]
    if a.format == "json":
        doc = {"n": a.n, "mu": a.mu, "kind": a.kind, "backend": table.backend,
               "table_hash": table.content_hash(),
               "law": [{"index": i, "log10_prob": l10 if math.isfinite(l10) else None, "prob": p}
                       for i, l10, p in rows]}
        text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    else:
        lines = ["index,log10_prob,prob"]
        lines += [f"{i},{l10!r},{p!r}" for i, l10, p in rows]
        text = "\n".join(lines) + "\n"
    _emit(text, a.out, out)
    return EXIT_OK


def cmd_zfun(a, out) -> int:
    if a.n < 1:
        raise CliError("--n must be >= 1")
    table = _table(a.n, a.backend) if a.n >= 2 else None
    z = partition_function(a.n, a.mu, table)
    if a.mu == 0:
        print(f"Z={catalan(a.n - 1)}", file=out)
    else:
        print(f"Z={z}", file=out)
    print(f"log10_Z={_log10(z)}", file=out)
    if a.n >= 3:
        w = w_sum(a.n, a.mu, table)
        print(f"W={w}", file=out)
        print(f"log10_W={_log10(w)}", file=out)
        if a.mu > 0:
            print(f"Z/(4^n e^mu (e^mu-1) W)={z_over_w(a.n, a.mu, table)!r}", file=out)
    if a.mu > 0 and a.n >= 2:
        tag, vals = asy.partition_asymptotic(a.n, a.mu)
        print(f"regime={tag}", file=out)
        for r, v in vals.items():
            print(f"Z_asym[{r}]={v} log10={_log10(v)} ratio={float(_ctx.exp(z.log - v.log))!r}",
                  file=out)
    else:
        print("regime=brownian", file=out)
    return EXIT_OK


def cmd_sample(a, out) -> int:
    table = _table(a.n, a.backend) if a.n >= 2 else build_counts(1, 1)
    rng = make_rng(a.seed, a.stream)
    trees = sample_biased_trees(a.n, a.mu, a.count, table, rng)
    lines = [t.to_parens() if a.format == "parens" else to_contour(t).to_string() for t in trees]
    _emit("\n".join(lines) + ("\n" if lines else ""), a.out, out)
    return EXIT_OK


def cmd_asym(a, out) -> int:
    if a.n < 2 or a.mu <= 0:
        raise CliError("asym needs --n >= 2 and --mu > 0")
    p = asy.height_predictions(a.n, a.mu)
    p.regime = asy.classify_regime(a.n, a.mu, a.brownian_cut, a.extreme_cut, tuple(a.band))
    d = p.as_dict()
    if a.json:
        print(json.dumps(d, indent=2), file=out)
    else:
        for k, v in d.items():
            print(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}", file=out)
    return EXIT_OK


def cmd_exp(a, out) -> int:
    if a.list:
        for name in EXPERIMENTS:
            print(name, file=out)
        return EXIT_OK
    if a.name is None:
        raise CliError("exp needs an experiment name (see exp --list)")
    if a.name not in EXPERIMENTS:
        raise CliError(f"unknown experiment {a.name!r}; choose from {', '.join(EXPERIMENTS)}")
    config = {}
    if a.config:
        try:
            config = json.loads(Path(a.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {a.config}: {exc}", "input") from None
        if not isinstance(config, dict):
            raise CliError("config file must hold a JSON object")
    from .experiments import DEFAULTS
    defaults = DEFAULTS[a.name]
    for flag, key, plural in (("n", "n", "ns"), ("mu", "mu", None), ("seed", "seed", None),
                              ("samples", "samples", None)):
        v = getattr(a, flag)
        if v is None:
            continue
        if key in defaults:
            config[key] = v
        elif plural and plural in defaults:
            config[plural] = [v]
        else:
            raise CliError(f"experiment {a.name!r} does not take --{flag}")
    try:
        report = run_experiment(a.name, config, workers=a.workers)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    fmt = a.format or ("json" if a.out and a.out.endswith(".json") else "csv")
    _emit(report.to_json() if fmt == "json" else report.to_csv(), a.out, out)
    print(f"treelab: info: {a.name} runtime={report.runtime:.3f}s", file=sys.stderr)
    if not report.passed:
        for r in report.failures():
            print(f"treelab: gate-failed: {r.experiment} n={r.n} mu={r.mu} {r.quantity} "
                  f"measured={r.measured!r} predicted={r.predicted!r} tolerance={r.tolerance!r}",
                  file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


def cmd_cache(a, out) -> int:
    d = cache_dir(a.cache_dir)
    files = sorted(d.glob("counts-v*.jsonl")) if d.is_dir() else []
    if a.action == "list":
        print(f"cache_dir={d}", file=out)
        for f in files:
            print(f"{f.name} {f.stat().st_size}", file=out)
    elif a.action == "verify":
        bad = 0
        for f in files:
            t = load_table(f)
            problems = verify_table(t) if t.exact else []
            status = "ok" if not problems else "; ".join(problems[:3])
            bad += bool(problems)
            print(f"{f.name} {status}", file=out)
        if bad:
            raise CliError(f"{bad} cache file(s) failed verification", "cache")
    else:
        for f in files:
            f.unlink()
        print(f"removed {len(files)} file(s) from {d}", file=out)
    return EXIT_OK


def _emit(text: str, path: str | None, out):
    if path:
        Path(path).write_text(text)
    else:
        out.write(text)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="treelab", description="Height-biased random plane trees.")
    p.add_argument("--version", action="version", version=f"treelab {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--cache-dir", help="count-table cache directory (overrides TREELAB_CACHE)")
    common.add_argument("--workers", type=_pos_int, default=os.cpu_count() or 1,
                        help="worker processes for Monte Carlo (default: logical cores)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def backend(sp):
        sp.add_argument("--backend", choices=["exact", "log"],
                        help=f"count backend (default exact for n <= {EXACT_CEILING}, else log)")

    c = sub.add_parser("count", parents=[common], help="print C, H or E values, build tables, check trees")
    c.add_argument("--n", type=_pos_int)
    c.add_argument("--m", type=int, help="print H(n,m), trees of height < m")
    c.add_argument("--h", type=int, help="print E(n,h), trees of height exactly h")
    c.add_argument("--catalan", type=int, metavar="K", help="print the Catalan number C_K")
    c.add_argument("--build", action="store_true", help="build the table up to (n, m) and cache it")
    c.add_argument("--verify-tree", metavar="PARENS", help="parse a tree and print its statistics")
    backend(c)

    law = sub.add_parser("law", parents=[common], help="exact height or root-degree law as CSV or JSON")
    law.add_argument("--n", type=_pos_int, required=True)
    law.add_argument("--mu", type=_nonneg, required=True)
    law.add_argument("--kind", choices=["height", "root-degree"], default="height")
    law.add_argument("--format", choices=["csv", "json"], default="csv")
    law.add_argument("--out")
    backend(law)

    z = sub.add_parser("zfun", parents=[common], help="exact Z and W plus partition-function asymptotics")
    z.add_argument("--n", type=_pos_int, required=True)
    z.add_argument("--mu", type=_nonneg, required=True)
    backend(z)

    s = sub.add_parser("sample", parents=[common], help="sample mu-biased trees, one per line")
    s.add_argument("--n", type=_pos_int, required=True)
    s.add_argument("--mu", type=_nonneg, required=True)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--stream", type=int, default=0)
    s.add_argument("--format", choices=["parens", "contour"], default="parens")
    s.add_argument("--out")
    backend(s)

    asym = sub.add_parser("asym", parents=[common], help="closed-form predictions for (n, mu)")
    asym.add_argument("--n", type=int, required=True)
    asym.add_argument("--mu", type=float, required=True)
    asym.add_argument("--json", action="store_true")
    asym.add_argument("--brownian-cut", type=float, default=asy.BROWNIAN_CUT,
                      help="brownian if mu*sqrt(n) <= this")
    asym.add_argument("--extreme-cut", type=float, default=asy.EXTREME_CUT,
                      help="extreme if mu/n >= this")
    asym.add_argument("--band", type=float, nargs=2, default=list(asy.DISCRETE_BAND),
                      metavar=("LO", "HI"), help="discrete sub-regime band for mu/n^(1/4)")

    e = sub.add_parser("exp", parents=[common], help="run a named experiment and write its report")
    e.add_argument("name", nargs="?")
    e.add_argument("--list", action="store_true", help="list experiment names")
    e.add_argument("--config", help="JSON object overriding default config keys")
    e.add_argument("--out", help="report path (.csv or .json)")
    e.add_argument("--format", choices=["csv", "json"])
    e.add_argument("--n", type=_pos_int)
    e.add_argument("--mu", type=_nonneg)
    e.add_argument("--seed", type=int)
    e.add_argument("--samples", type=_pos_int)

    ca = sub.add_parser("cache", parents=[common], help="list, verify or purge cached count tables")
    ca.add_argument("action", choices=["list", "verify", "purge"])
    return p


_COMMANDS = {"count": cmd_count, "law": cmd_law, "zfun": cmd_zfun, "sample": cmd_sample,
             "asym": cmd_asym, "exp": cmd_exp, "cache": cmd_cache}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        a = build_parser().parse_args(argv)
        if a.command is None:
            raise CliError("missing subcommand (count, law, zfun, sample, asym, exp, cache)", "usage")
        return _COMMANDS[a.command](a, out)
    except CliError as exc:
        print(f"treelab: error[{exc.kind}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except TableTooSmall as exc:
        print(f"treelab: error[table]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError) as exc:
        print(f"treelab: error[validation]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MemoryError as exc:
        print(f"treelab: error[memory]: {exc}", file=sys.stderr)
        return EXIT_INVALID
