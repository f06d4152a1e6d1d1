"""Command-line entry point: ``btm-lab <subcommand> ...``.

Resource budgets can be overridden through the ``BTM_LAB_BUDGET`` environment
variable, e.g. ``BTM_LAB_BUDGET='window_sites=40001,spectral_sites=40001'``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .. import __version__
from ..asymptotics import stable_scaling_check
from ..errors import BTMError, ResourceLimit
from ..landscape import Landscape
from ..solver import quenched_pmf
from . import suites as S
from .config import BOUND_SUITES, STATS_N_MAX, ExperimentConfig
from .report import EmptyReport, report
from .runner import RunRecord, _jsonable, atomic_write, run, run_job, table_csv


def parse_seeds(text: str) -> list[int]:
    """``"100"`` -> 0..99, ``"5-9"`` -> 5..9, ``"1,4,7"`` -> those seeds."""
    text = text.strip()
    if "," in text:
        return [int(s) for s in text.split(",") if s.strip()]
    if "-" in text[1:]:
        a, b = text.split("-", 1)
        return list(range(int(a), int(b) + 1))
    return list(range(int(text)))


def parse_times(text: str) -> list[float]:
    """``"1e2,1e3"`` or a log10 grid ``"log:2:6:9"`` (start:stop:count)."""
    if text.startswith("log:"):
        _, a, b, k = text.split(":")
        return [float(v) for v in np.logspace(float(a), float(b), int(k))]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_range(text: str) -> tuple[int, int]:
    a, b = text.split("..")
    return int(a), int(b)


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(Path(out), text)
    else:
        sys.stdout.write(text)


def _envelope(n: int, limit: int, allow: bool, what: str) -> None:
    if n > limit and not allow:
        raise SystemExit(f"error: n={n} is beyond the desk-scale envelope for {what} (n <= {limit}); "
                         "pass --allow-huge to override")


def _landscape(args) -> Landscape:
    if getattr(args, "landscape", None):
        return Landscape.load(args.landscape)
    return Landscape(args.seed, args.alpha)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_landscape(args) -> int:
    land = Landscape(args.seed, args.alpha).materialize(*parse_range(args.range))
    if args.out:
        land.save(args.out)
    else:
        lo, hi = land.range
        sys.stdout.write(land.header() + "\n")
        for x, v in zip(range(lo, hi + 1), land.values(lo, hi)):
            sys.stdout.write(f"{x},{v:.17g}\n")
    return 0


def cmd_scan_events(args) -> int:
    _envelope(args.n_max, STATS_N_MAX, args.allow_huge, "landscape statistics")
    res = S.events_suite(args.alpha, args.eps, args.k, args.n_min, args.n_max, parse_seeds(args.seeds))
    _emit(table_csv("events", res.tables["events"]), args.out)
    return 0 if res.passed else 1


def cmd_pmf(args) -> int:
    land = _landscape(args)
    status = 0
    try:
        res = quenched_pmf(land, args.time, args.tol, start=args.start, window_budget=args.window_budget)
    except ResourceLimit as exc:
        print(f"warning: {exc}", file=sys.stderr)
        res, status = exc.achieved, 2
    table = S.Table(["x", "P"], [[int(x), float(p)] for x, p in zip(res.sites, res.pmf)])
    text = table_csv("pmf", table)
    meta = f"# t={res.t!r} deficit={res.deficit!r} backend={res.backend} window={res.lo}..{res.hi}\n"
    head, rest = text.split("\n", 1)
    _emit(head + "\n" + meta + rest, args.out)
    return status


def cmd_sup_scan(args) -> int:
    land = _landscape(args)
    rows = S.sup_scan_rows(land, parse_times(args.times), args.tol, args.window_budget)
    _emit(table_csv("sup_scan", S.Table(["t", "sup", "argmax", "deficit"], rows)), args.out)
    return 0


def cmd_hitting(args) -> int:
    res = S.hitting_suite(args.instances, args.seed)
    _emit(table_csv("hitting", res.tables["hitting"]), args.out)
    return 0 if res.passed else 1


def _bounds_config(args) -> ExperimentConfig:
    return ExperimentConfig(alpha=args.alpha, epsilon=args.eps, K=args.k, global_seed=args.seed,
                            lemma3_instances=args.instances, corollary_instances=args.instances,
                            deloc_instances=max(1, args.instances // 2), mc_paths=args.mc_paths)


def cmd_verify_bounds(args) -> int:
    cfg = _bounds_config(args)
    names = list(BOUND_SUITES) if args.suite == "all" else [args.suite]
    report_ = {}
    ok = True
    for name in names:
        res = run_job(name, cfg)
        ok &= res.passed
        report_[name] = {"passed": res.passed, "checks": [_jsonable(c.to_dict()) for c in res.checks]}
    _emit(json.dumps(report_, sort_keys=True, indent=1) + "\n", args.out)
    return 0 if ok else 1


def cmd_maxsum(args) -> int:
    res = S.maxsum_suite(parse_seeds(args.seeds), args.alpha, args.n_max, burn_in=args.burn_in,
                         tail_fraction=args.tail_fraction, high=0.9, low=0.1, finite_high=0.05,
                         seed_fraction=0.95)
    _emit(table_csv("maxsum", res.tables["maxsum"]), args.out)
    return 0


def cmd_scaling(args) -> int:
    rep = stable_scaling_check(args.alpha, [int(float(v)) for v in args.n_list.split(",")], args.replicates,
                               args.seed)
    rows = [[n, ks] for n, ks in zip(rep.n_list[1:], rep.ks)]
    _emit(table_csv("scaling", S.Table(["n", "ks"], rows)), args.out)
    return 0


def cmd_report(args) -> int:
    recs = []
    for p in args.records:
        p = Path(p)
        recs.append(RunRecord.load(p / "run.json" if p.is_dir() else p))
    try:
        text, ok = report(recs)
    except EmptyReport as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.out)
    return 0 if ok else 1


def cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.allow_huge:
        cfg.allow_huge = True
    if args.alpha is not None:
        cfg.alpha = args.alpha
        cfg.validate()
    if not cfg.finite_mean_only:
        _envelope(cfg.n_max, STATS_N_MAX, cfg.allow_huge, "landscape statistics")
    rec = run(cfg, jobs=args.jobs, out_dir=args.out)
    text, ok = report([rec])
    sys.stdout.write(text)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="btm-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q, seed=True, alpha=True):
        if seed:
            q.add_argument("--seed", type=int, default=0, help="landscape / RNG seed (default 0)")
        if alpha:
            q.add_argument("--alpha", type=float, default=0.5, help="trap tail exponent (default 0.5)")
        q.add_argument("--out", help="output file (default stdout)")

    q = sub.add_parser("gen-landscape", help="write a landscape cache file")
    common(q)
    q.add_argument("--range", default="-100..100", help="sites l..r, written --range=l..r when l < 0 (default -100..100)")
    q.set_defaults(func=cmd_gen_landscape)

    q = sub.add_parser("scan-events", help="evaluate every event for seeds x n; CSV seed,n,event,holds,M,S,margin")
    common(q, seed=False)
    q.add_argument("--eps", type=float, default=0.3)
    q.add_argument("--k", type=int, default=2, help="grid half-width K (default 2)")
    q.add_argument("--n-min", type=int, default=1)
    q.add_argument("--n-max", type=int, default=3)
    q.add_argument("--seeds", default="100", help="count N (seeds 0..N-1), range a-b, or list a,b,c")
    q.add_argument("--allow-huge", action="store_true", help="permit n beyond the desk-scale envelope")
    q.set_defaults(func=cmd_scan_events)

    q = sub.add_parser("pmf", help="quenched law of X_t from 0; CSV x,P")
    common(q)
    q.add_argument("--time", type=float, required=True)
    q.add_argument("--tol", type=float, default=1e-10, help="target absorbed mass (default 1e-10)")
    q.add_argument("--window-budget", type=int, default=None, help="maximum window sites")
    q.add_argument("--start", type=int, default=0)
    q.add_argument("--landscape", help="landscape cache file (overrides --seed/--alpha)")
    q.set_defaults(func=cmd_pmf)

    q = sub.add_parser("sup-scan", help="sup_x P(X_t = x) over times; CSV t,sup,argmax,deficit")
    common(q)
    q.add_argument("--times", default="log:2:6:9", help="list a,b,c or log10 grid log:start:stop:count")
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--window-budget", type=int, default=None)
    q.add_argument("--landscape", help="landscape cache file (overrides --seed/--alpha)")
    q.set_defaults(func=cmd_sup_scan)

    q = sub.add_parser("hitting", help="closed forms against linear solves; CSV of residuals")
    common(q, alpha=False)
    q.add_argument("--instances", type=int, default=200)
    q.set_defaults(func=cmd_hitting)

    q = sub.add_parser("verify-bounds", help="run bound suites; JSON report of checks")
    common(q)
    q.add_argument("--suite", choices=list(BOUND_SUITES) + ["all"], default="all")
    q.add_argument("--eps", type=float, default=0.2)
    q.add_argument("--k", type=int, default=2)
    q.add_argument("--instances", type=int, default=20)
    q.add_argument("--mc-paths", type=int, default=100_000)
    q.set_defaults(func=cmd_verify_bounds)

    q = sub.add_parser("maxsum", help="M_n/S_n trajectories; CSV seed,n,ratio,min,max")
    common(q, seed=False)
    q.add_argument("--seeds", default="10")
    q.add_argument("--n-max", type=int, default=10**6)
    q.add_argument("--burn-in", type=int, default=100)
    q.add_argument("--tail-fraction", type=float, default=0.1)
    q.set_defaults(func=cmd_maxsum)

    q = sub.add_parser("scaling", help="KS distances between scaled sums; CSV n,ks")
    common(q)
    q.add_argument("--n-list", default="1000,4000,16000,64000")
    q.add_argument("--replicates", type=int, default=10_000)
    q.set_defaults(func=cmd_scaling)

    q = sub.add_parser("report", help="summarize run records (run.json files or run directories)")
    q.add_argument("records", nargs="*")
    q.add_argument("--out")
    q.set_defaults(func=cmd_report)

    q = sub.add_parser("run", help="execute a JSON experiment config end to end")
    q.add_argument("--config", help="JSON config (default: built-in defaults)")
    q.add_argument("--out", help="output directory (default from config)")
    q.add_argument("--jobs", type=int, default=1, help="suites run in parallel (default 1)")
    q.add_argument("--alpha", type=float, default=None, help="override the config's alpha")
    q.add_argument("--allow-huge", action="store_true")
    q.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BTMError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
