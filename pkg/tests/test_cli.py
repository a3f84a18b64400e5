import csv
import io
import json

import pytest

from speedscale import fileio
from speedscale.cli import (
    EXIT_CHECKSUM, EXIT_FORMAT, EXIT_INFEASIBLE, EXIT_OK, EXIT_VIOLATIONS, run,
)
from speedscale.model import is_agreeable, nested_pairs


def _gen(tmp_path, name, *args):
    path = tmp_path / name
    assert run(["gen", *args, "-o", str(path)]) == EXIT_OK
    return path


def test_gen_is_deterministic(tmp_path):
    a = _gen(tmp_path, "a.json", "agreeable", "-n", "5", "--seed", "1")
    b = _gen(tmp_path, "b.json", "agreeable", "-n", "5", "--seed", "1")
    assert a.read_bytes() == b.read_bytes()
    assert is_agreeable(fileio.loads_instance(a.read_text()))


def test_gen_equal_work_and_nested(tmp_path):
    inst = fileio.loads_instance(_gen(tmp_path, "e.json", "equal-work", "-n", "6", "-m", "3",
                                      "--seed", "2").read_text())
    for p in inst.processors.ids:
        assert len({j.works[p] for j in inst.jobs_on(p)}) <= 1
    nested = fileio.loads_instance(_gen(tmp_path, "n.json", "nested", "-n", "3").read_text())
    assert nested_pairs([(j.release, j.deadline) for j in nested.jobs])


def test_gen_usage_error(tmp_path, capsys):
    assert run(["gen", "nested", "-n", "1"]) == EXIT_FORMAT
    assert run(["gen", "unknown", "-n", "3"]) == EXIT_FORMAT


def test_solve_then_verify(tmp_path, capsys):
    inst = _gen(tmp_path, "i.json", "random", "-n", "5", "--seed", "3")
    out = tmp_path / "s.json"
    assert run(["solve", str(inst), "--slot-cap", "6", "--trials", "4", "-o", str(out)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "lp_objective" in printed and "single_eps_pow_alpha " in printed
    meta = json.loads(out.read_text())["metadata"]
    assert {"lp_objective", "seed", "epsilon", "slot_cap", "trials", "backend", "bound_report"} <= meta.keys()
    assert run(["verify", str(inst), str(out)]) == EXIT_OK


def test_single_job_ratio_is_one(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({"version": 1, "mode": "single", "alpha": 2,
                                "jobs": [{"id": 0, "work": "3/1", "release": "0/1", "deadline": "2/1"}]}))
    assert run(["solve", str(path), "-o", str(tmp_path / "s.json")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "ratio         1\n" in out


def test_same_seed_same_schedule(tmp_path):
    inst = _gen(tmp_path, "i.json", "nested", "-n", "5", "--seed", "4")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run(["solve", str(inst), "--seed", "7", "--slot-cap", "5", "-o", str(out)]) == EXIT_OK
    assert a.read_text() == b.read_text()


def test_multi_equal_work_prints_32(tmp_path, capsys):
    inst = _gen(tmp_path, "m.json", "equal-work", "-n", "4", "-m", "2", "--seed", "1")
    out = tmp_path / "s.csv"
    assert run(["solve", str(inst), "--slot-cap", "5", "--trials", "4", "--format", "csv",
                "-o", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    line = [l for l in text.splitlines() if l.startswith("bound equal_work")][0]
    assert float(line.split()[-1]) == pytest.approx(32.0)
    assert run(["verify", str(inst), str(out)]) == EXIT_OK


def test_verify_reports_violation(tmp_path, capsys):
    inst = _gen(tmp_path, "i.json", "random", "-n", "4", "--seed", "5")
    out = tmp_path / "s.json"
    assert run(["solve", str(inst), "--slot-cap", "4", "-o", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    seg = doc["segments"][0]
    job = [j for j in json.loads(inst.read_text())["jobs"] if j["id"] == seg["job"]][0]
    seg["end"] = job["deadline"].split("/")[0] + "1/1"  # push the end far past the deadline
    out.write_text(json.dumps(doc))
    capsys.readouterr()
    assert run(["verify", str(inst), str(out)]) == EXIT_VIOLATIONS
    assert "life interval" in capsys.readouterr().out


def test_verify_wrong_instance(tmp_path):
    a = _gen(tmp_path, "a.json", "random", "-n", "4", "--seed", "1")
    b = _gen(tmp_path, "b.json", "random", "-n", "4", "--seed", "2")
    out = tmp_path / "s.json"
    assert run(["solve", str(a), "--slot-cap", "4", "-o", str(out)]) == EXIT_OK
    assert run(["verify", str(b), str(out)]) == EXIT_CHECKSUM


def test_io_and_format_errors(tmp_path):
    assert run(["solve", str(tmp_path / "missing.json")]) == EXIT_FORMAT
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "mode": "single"}')
    assert run(["solve", str(bad)]) == EXIT_FORMAT


def test_infeasible_granularity(tmp_path, capsys):
    path = tmp_path / "same.json"
    jobs = [{"id": k, "work": "1/1", "release": "0/1", "deadline": "1/1"} for k in range(2)]
    path.write_text(json.dumps({"version": 1, "mode": "single", "alpha": 2, "jobs": jobs}))
    assert run(["solve", str(path), "--slot-cap", "1"]) == EXIT_INFEASIBLE
    assert "epsilon" in capsys.readouterr().err


def test_env_var_and_flag_precedence(tmp_path, monkeypatch):
    inst = _gen(tmp_path, "i.json", "random", "-n", "4", "--seed", "1")
    monkeypatch.setenv("SPEEDSCALE_SOLVE_SEED", "9")
    monkeypatch.setenv("SPEEDSCALE_SOLVE_SLOT_CAP", "4")
    out = tmp_path / "s.json"
    assert run(["solve", str(inst), "-o", str(out)]) == EXIT_OK
    meta = json.loads(out.read_text())["metadata"]
    assert (meta["seed"], meta["slot_cap"]) == (9, 4)
    assert run(["solve", str(inst), "--seed", "2", "-o", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["metadata"]["seed"] == 2


def test_dump_lp(tmp_path):
    inst = _gen(tmp_path, "i.json", "random", "-n", "3", "--seed", "1")
    lp = tmp_path / "model.lp"
    assert run(["solve", str(inst), "--slot-cap", "3", "--dump-lp", str(lp),
                "-o", str(tmp_path / "s.json")]) == EXIT_OK
    assert "Subject To" in lp.read_text()


def test_oracle_command(tmp_path, capsys):
    inst = _gen(tmp_path, "i.json", "random", "-n", "3", "--seed", "1")
    assert run(["oracle", str(inst), "--slot-cap", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "yds_energy" in out and "slot_optimum" in out


def test_experiment_bell(tmp_path):
    out = tmp_path / "bell.csv"
    assert run(["experiment", "bell", "--alphas", "1,2,3,4", "-o", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [float(r["value"]) for r in rows] == pytest.approx([1, 2, 5, 15], abs=1e-6)


def test_experiment_table1_is_deterministic(tmp_path):
    args = ["experiment", "table1", "--alphas", "2", "--epsilons", "1", "--wratios", "2",
            "--count", "1", "-n", "3", "--trials", "2", "--slot-cap", "3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(args + ["-o", str(a)]) == EXIT_OK
    assert run(args + ["-o", str(b)]) == EXIT_OK
    assert a.read_text() == b.read_text()
    (row,) = list(csv.DictReader(io.StringIO(a.read_text())))
    assert float(row["heterogeneous_ours"]) == pytest.approx(72.0, abs=1e-6)
    assert float(row["single_ratio_max"]) > 0
