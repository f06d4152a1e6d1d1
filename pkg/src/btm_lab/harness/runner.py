"""Run a configuration end to end and persist its artifacts.

Layout of the output directory::

    <table>.csv          one per table, first line ``# schema=btm-lab/<table>/v1``
    <suite>.verdicts.json checks of one suite (sorted keys, no timestamps)
    config.json          the configuration as run
    run.json             the RunRecord (this one carries timestamps)

Data files are written through a temporary file and renamed, so a crashed
suite never leaves a half-written CSV behind.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..budget import ENV_VAR, parse_budget
from . import suites as S
from .config import ExperimentConfig

SCHEMA_VERSION = 1


@dataclass
class RunRecord:
    config_hash: str
    version: str
    started: str
    finished: str
    suites: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(s["passed"] for s in self.suites.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(d["config_hash"], d["version"], d["started"], d["finished"], d.get("suites", {}))

    @classmethod
    def load(cls, path) -> "RunRecord":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# serialization


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else str(v)
    if isinstance(v, (tuple, list)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def table_csv(name: str, table: S.Table) -> str:
    buf = io.StringIO()
    buf.write(f"# schema=btm-lab/{name}/v{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_suite(result: S.SuiteResult, out_dir: Path) -> dict:
    for name, table in result.tables.items():
        atomic_write(out_dir / f"{name}.csv", table_csv(name, table))
    checks = [_jsonable(c.to_dict()) for c in result.checks]
    atomic_write(out_dir / f"{result.name}.verdicts.json", json.dumps(checks, sort_keys=True, indent=1) + "\n")
    return summarize(result)


def summarize(result: S.SuiteResult) -> dict:
    statuses = [c.status for c in result.checks]
    return {
        "passed": result.passed,
        "counts": {k: statuses.count(k) for k in ("pass", "fail", "vacuous", "unasserted")},
        "checks": [
            {"id": c.bound_id, "status": c.status, "margin": _jsonable(c.margin), "lhs": _jsonable(c.lhs),
             "rhs": _jsonable(c.rhs), "relation": c.relation}
            for c in result.checks
        ],
    }


# ---------------------------------------------------------------------------
# suite dispatch


def plan(cfg: ExperimentConfig) -> list[str]:
    """Names of the suite jobs a configuration runs."""
    if cfg.finite_mean_only:
        return ["finite_mean"]
    jobs = []
    if "events" in cfg.suites:
        jobs.append("events")
    if "bounds" in cfg.suites:
        jobs += list(cfg.bound_suites)
    if "pmf" in cfg.suites:
        jobs += ["pmf", "solver"]
    if "hitting" in cfg.suites:
        jobs.append("hitting")
    if "asymptotics" in cfg.suites:
        jobs += ["maxsum", "scaling"]
    return jobs


def landscape_seeds(cfg: ExperimentConfig) -> list[int]:
    return [cfg.seed_for("landscape", i) for i in range(cfg.seeds)]


def run_job(name: str, cfg: ExperimentConfig) -> S.SuiteResult:
    th = cfg.thresholds
    if name == "events":
        return S.events_suite(cfg.alpha, cfg.epsilon, cfg.K, cfg.n_min, cfg.n_max, landscape_seeds(cfg))
    if name == "lemma3":
        return S.lemma3_suite(cfg.lemma3_instances, cfg.seed_for("lemma3"))
    if name == "corollary4":
        search = [cfg.seed_for("corollary-search", i) for i in range(20 * cfg.seeds)]
        return S.corollary_suite(cfg.alpha, 2, [cfg.epsilon], cfg.corollary_instances, search,
                                 cfg.seed_for("corollary") % 2**32)
    if name == "nearbound":
        return S.nearbound_suite(cfg.alpha, 2, cfg.epsilon, cfg.K, cfg.deloc_instances, 2,
                                 cfg.seed_for("deloc") % 2**32, diag_seed=cfg.seed_for("diag"))
    if name == "confinement":
        return S.confinement_suite(cfg.alpha, 2, cfg.epsilon, cfg.K, cfg.deloc_instances, 2,
                                   cfg.seed_for("deloc") % 2**32)
    if name == "laplace":
        return S.laplace_suite(cfg.seed_for("laplace"), mc_sums=cfg.mc_paths)
    if name == "pmf":
        return S.pmf_suite(cfg.seed_for("pmf"), cfg.alpha, cfg.sup_times, cfg.pmf_tol)
    if name == "solver":
        return S.solver_suite(cfg.seed_for("solver"), cases=20, mc_cases=1, mc_paths=cfg.mc_paths)
    if name == "hitting":
        return S.hitting_suite(cfg.hitting_instances, cfg.seed_for("hitting"))
    if name == "maxsum":
        return S.maxsum_suite(landscape_seeds(cfg), cfg.alpha, cfg.maxsum_n_max, burn_in=th.maxsum_burn_in,
                              tail_fraction=th.maxsum_tail_fraction, high=th.maxsum_high, low=th.maxsum_low,
                              finite_high=th.finite_mean_high, seed_fraction=th.seed_fraction)
    if name == "scaling":
        return S.scaling_suite(min(cfg.alpha, 1.0), cfg.scaling_n, cfg.scaling_replicates, cfg.seed_for("scaling"))
    if name == "finite_mean":
        return S.finite_mean_suite(cfg.alpha, cfg.seed_for("finite-mean"), cfg.finite_mean_times,
                                   th.decay_ratio)
    raise ValueError(f"unknown suite {name!r}")


def job_budget(cfg: ExperimentConfig, env_budget: str | None) -> str:
    """Budget string for a suite job: the config's sizes, with any keys from
    the environment variable taking precedence."""
    merged = {"window_sites": cfg.window_sites, "spectral_sites": cfg.spectral_sites}
    merged.update(parse_budget(env_budget or ""))
    return json.dumps(merged, sort_keys=True)


def _job(args):
    name, cfg_json, out_dir, env_budget = args
    cfg = ExperimentConfig.from_json(cfg_json)
    saved = os.environ.get(ENV_VAR)
    os.environ[ENV_VAR] = job_budget(cfg, env_budget)
    try:
        res = run_job(name, cfg)
    finally:
        if saved is None:
            os.environ.pop(ENV_VAR, None)
        else:
            os.environ[ENV_VAR] = saved
    return name, write_suite(res, Path(out_dir))


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def run(cfg: ExperimentConfig, *, jobs: int = 1, out_dir=None) -> RunRecord:
    """Execute every suite the config asks for; artifacts go to ``out_dir``."""
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write(out / "config.json", cfg.to_json() + "\n")
    started = _now()
    names = plan(cfg)
    args = [(n, cfg.to_json(), str(out), os.environ.get(ENV_VAR)) for n in names]
    if jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(names))) as pool:
            results = dict(pool.map(_job, args))
    else:
        results = dict(_job(a) for a in args)
    rec = RunRecord(cfg.hash(), __version__, started, _now(), {n: results[n] for n in names})
    atomic_write(out / "run.json", json.dumps(_jsonable(rec.to_dict()), sort_keys=True, indent=1) + "\n")
    return rec
