import hashlib
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from btm_lab import InvalidParameter, Landscape, sample_trap
from btm_lab.budget import ENV_VAR, current_budget
from btm_lab.harness.cli import main, parse_range, parse_seeds, parse_times
from btm_lab.harness.config import ExperimentConfig, derive_seed
from btm_lab.harness.report import EmptyReport, report
from btm_lab.harness.runner import RunRecord, job_budget, plan, run

SMALL = dict(seeds=5, n_max=2, lemma3_instances=10, corollary_instances=2, deloc_instances=1,
             hitting_instances=5, maxsum_n_max=10**4, mc_paths=20_000, scaling_replicates=1000,
             sup_times=(1e2, 1e3))


def csv_lines(text):
    lines = text.splitlines()
    assert lines[0].startswith("# schema=btm-lab/") and lines[0].endswith("/v1")
    return lines


def test_parsers():
    assert parse_seeds("3") == [0, 1, 2]
    assert parse_seeds("5-7") == [5, 6, 7]
    assert parse_seeds("1,4") == [1, 4]
    assert parse_times("1e2,1e3") == [100.0, 1000.0]
    assert parse_times("log:2:4:3") == pytest.approx([100.0, 1000.0, 10000.0])
    assert parse_range("-3..9") == (-3, 9)


def test_config_round_trip_and_hash():
    cfg = ExperimentConfig(**SMALL)
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg and back.to_json() == cfg.to_json()
    assert back.hash() == cfg.hash()
    moved = ExperimentConfig.from_dict(dict(cfg.to_dict(), output_dir="elsewhere"))
    assert moved.hash() == cfg.hash()
    assert ExperimentConfig(**dict(SMALL, alpha=0.6)).hash() != cfg.hash()


def test_config_validation():
    with pytest.raises(InvalidParameter):
        ExperimentConfig(epsilon=1.0)
    with pytest.raises(InvalidParameter):
        ExperimentConfig(n_max=7)
    assert ExperimentConfig(n_max=7, allow_huge=True).n_max == 7
    with pytest.raises(InvalidParameter):
        ExperimentConfig.from_dict({"alpah": 0.5})
    with pytest.raises(InvalidParameter):
        ExperimentConfig(suites=("nope",))


def test_derive_seed_is_keyed_blake2b():
    digest = hashlib.blake2b(b"2024/lemma3", digest_size=8).digest()
    assert derive_seed(2024, "lemma3") == int.from_bytes(digest, "little")
    assert derive_seed(2024, "landscape", 0) != derive_seed(2024, "landscape", 1)
    assert derive_seed(2024, "a") != derive_seed(2025, "a")


def test_plan_dispatch():
    assert plan(ExperimentConfig(alpha=1.5)) == ["finite_mean"]
    full = plan(ExperimentConfig())
    assert full[0] == "events" and "finite_mean" not in full
    assert plan(ExperimentConfig(suites=("hitting",))) == ["hitting"]


def test_budget_env(monkeypatch):
    monkeypatch.setenv(ENV_VAR, "window_sites=101,spectral_sites=333")
    assert current_budget().window_sites == 101 and current_budget().spectral_sites == 333
    monkeypatch.setenv(ENV_VAR, '{"mc_paths": 7}')
    assert current_budget().mc_paths == 7
    monkeypatch.setenv(ENV_VAR, "bogus=1")
    with pytest.raises(InvalidParameter):
        current_budget()


def test_job_budget_merges_config_and_env():
    cfg = ExperimentConfig(window_sites=501)
    assert json.loads(job_budget(cfg, None)) == {"window_sites": 501, "spectral_sites": 20001}
    assert json.loads(job_budget(cfg, "window_sites=77"))["window_sites"] == "77"


def test_cli_gen_landscape(capsys, tmp_path):
    assert main(["gen-landscape", "--seed", "4", "--range=-2..2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("btm-landscape v1 seed=4")
    xs = [int(line.split(",")[0]) for line in lines[1:]]
    vals = [float(line.split(",")[1]) for line in lines[1:]]
    assert xs == [-2, -1, 0, 1, 2]
    assert vals == [sample_trap(4, 0.5, x) for x in xs]
    path = tmp_path / "land.csv"
    assert main(["gen-landscape", "--seed", "4", "--range=-300..300", "--out", str(path)]) == 0
    assert Landscape.load(path).values(-2, 2).tolist() == vals


def test_cli_pmf(capsys, tmp_path):
    assert main(["pmf", "--seed", "1", "--time", "50"]) == 0
    lines = csv_lines(capsys.readouterr().out)
    assert lines[1].startswith("# t=50.0 deficit=")
    assert lines[2] == "x,P"
    deficit = float(lines[1].split("deficit=")[1].split()[0])
    total = sum(float(line.split(",")[1]) for line in lines[3:])
    assert abs(total + deficit - 1) < 1e-10
    assert main(["pmf", "--seed", "1", "--time", "1e5", "--window-budget", "41"]) == 2
    captured = capsys.readouterr()
    assert "warning" in captured.err and captured.out.startswith("# schema=btm-lab/pmf/v1")


def test_cli_pmf_env_budget(capsys, monkeypatch):
    monkeypatch.setenv(ENV_VAR, "window_sites=41")
    assert main(["pmf", "--seed", "1", "--time", "1e5"]) == 2
    monkeypatch.setenv(ENV_VAR, "nonsense=3")
    assert main(["pmf", "--seed", "1", "--time", "10"]) == 2
    assert "InvalidParameter" in capsys.readouterr().err


def test_cli_scan_events(capsys):
    assert main(["scan-events", "--seeds", "3", "--n-max", "2"]) == 0
    lines = csv_lines(capsys.readouterr().out)
    assert lines[1] == "seed,n,event,holds,M,S,margin"
    assert len(lines) > 2
    with pytest.raises(SystemExit):
        main(["scan-events", "--n-max", "9"])


def test_cli_sup_scan_and_hitting(capsys):
    assert main(["sup-scan", "--seed", "2", "--times", "1e2,1e3"]) == 0
    lines = csv_lines(capsys.readouterr().out)
    assert lines[1] == "t,sup,argmax,deficit" and len(lines) == 4
    assert main(["hitting", "--seed", "3", "--instances", "5"]) == 0
    csv_lines(capsys.readouterr().out)


def test_cli_verify_bounds(capsys):
    assert main(["verify-bounds", "--suite", "lemma3", "--instances", "5"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["lemma3"]["passed"]
    assert all(c["status"] in ("pass", "vacuous") for c in rep["lemma3"]["checks"])


def test_cli_maxsum_and_scaling(capsys):
    assert main(["maxsum", "--seeds", "2", "--n-max", "1000"]) == 0
    lines = csv_lines(capsys.readouterr().out)
    assert lines[1].startswith("seed,n,ratio,min,max")
    assert main(["scaling", "--n-list", "100,200", "--replicates", "1000"]) == 0
    lines = csv_lines(capsys.readouterr().out)
    assert lines[1] == "n,ks" and len(lines) == 3


def test_report_rules(tmp_path, capsys):
    with pytest.raises(EmptyReport):
        report([])
    with pytest.raises(EmptyReport):
        report([RunRecord("h", "v", "s", "f", {})])
    assert main(["report"]) == 2
    cfg = ExperimentConfig(**dict(SMALL, suites=("hitting", "bounds"), bound_suites=("lemma3",)))
    rec = run(cfg, out_dir=tmp_path)
    text, ok = report([rec])
    assert ok
    head, vacuous = text.split("vacuous (reported, not counted as passes):")
    assert "local_lower_bound                  pass" in head
    assert "local_lower_bound                  vacuous" in vacuous
    capsys.readouterr()
    assert main(["report", str(tmp_path)]) == 0


def test_run_routes_finite_mean(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(ExperimentConfig(alpha=1.5).to_json())
    status = main(["run", "--config", str(path), "--out", str(tmp_path / "out")])
    rec = RunRecord.load(tmp_path / "out" / "run.json")
    assert list(rec.suites) == ["finite_mean"]
    assert status == (0 if rec.verdict else 1)


def test_run_artifacts_and_exit_status(tmp_path):
    rec = run(ExperimentConfig(**SMALL), jobs=4, out_dir=tmp_path)
    assert not rec.verdict  # the max/sum proxy misses its thresholds at this n
    for p in tmp_path.glob("*.csv"):
        csv_lines(p.read_text())
    assert json.loads((tmp_path / "config.json").read_text()) == ExperimentConfig(**SMALL).to_dict()
    assert not list(tmp_path.glob(".*"))  # no temporary leftovers from atomic writes


def _cli_run(cfg_path, out, jobs):
    env = dict(os.environ)
    env.pop(ENV_VAR, None)
    subprocess.run([sys.executable, "-m", "btm_lab", "run", "--config", str(cfg_path), "--out", str(out),
                    "--jobs", str(jobs)], env=env, check=False, capture_output=True)
    return {p.name: p.read_bytes() for p in sorted(Path(out).glob("*.csv"))}


def test_determinism_across_processes(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(ExperimentConfig(**SMALL).to_json())
    a = _cli_run(cfg_path, tmp_path / "a", 1)
    b = _cli_run(cfg_path, tmp_path / "b", 4)
    assert a and a == b
    va = {p.name: p.read_bytes() for p in (tmp_path / "a").glob("*.verdicts.json")}
    vb = {p.name: p.read_bytes() for p in (tmp_path / "b").glob("*.verdicts.json")}
    assert va == vb
