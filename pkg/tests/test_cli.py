import json
import random
import subprocess
import sys

import numpy as np
import pytest

from netfiber.cli import main


@pytest.fixture
def data_dir(tmp_path):
    rng = random.Random(42)
    rows = ["author_id,paper_id,area,journal"]
    for p in range(60):
        for a in rng.sample(range(25), rng.randint(1, 4)):
            rows.append(f"a{a},p{p},area{p % 3},J{p % 2}")
    (tmp_path / "authorship.csv").write_text("\n".join(rows) + "\n")
    cites = {(rng.randrange(60), rng.randrange(60)) for _ in range(150)}
    lines = ["citing_paper,cited_paper"] + [f"p{s},p{t}" for s, t in sorted(cites) if s != t]
    (tmp_path / "citations.csv").write_text("\n".join(lines) + "\n")
    return tmp_path


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_threshold_zero_is_usage_error(capsys, data_dir):
    code, _, err = run_cli(capsys, "threshold", "--data", data_dir, "--c", "0")
    assert code == 1
    assert "threshold must be ≥ 1" in err


def test_unknown_flag_and_missing_file(capsys, data_dir, tmp_path):
    assert run_cli(capsys, "ingest", "--data", data_dir, "--bogus")[0] == 1
    code, _, err = run_cli(capsys, "ingest", "--authors", tmp_path / "nope.csv")
    assert code == 2 and "error" in err


def test_malformed_input_is_data_error(capsys, tmp_path):
    (tmp_path / "bad.csv").write_text("a,p1\nbroken\n")
    code, _, err = run_cli(capsys, "ingest", "--authors", tmp_path / "bad.csv")
    assert code == 2 and "line 2" in err


def test_ingest_report(capsys, data_dir):
    code, out, _ = run_cli(capsys, "ingest", "--data", data_dir)
    assert code == 0
    rep = json.loads(out)
    assert rep["manifest"]["command"] == "ingest"
    assert all(len(i["sha256"]) == 64 for i in rep["manifest"]["inputs"])
    assert rep["manifest"]["wall_clock_seconds"] is None


@pytest.mark.parametrize("argv", [
    ["threshold", "--c", "2", "--network", "coauthor", "--lcc", "--edges"],
    ["cores", "--mode", "undirected"],
    ["cores", "--mode", "directed-in", "--top", "3"],
    ["degrees", "--network", "citation"],
    ["hyper", "--min-size", "3", "--min-size", "4"],
    ["fit-beta", "--c", "1"],
    ["fit-p1", "--rho", "constant"],
])
def test_subcommands_emit_json(capsys, data_dir, argv):
    code, out, _ = run_cli(capsys, *argv, "--data", data_dir)
    assert code == 0
    rep = json.loads(out)
    assert set(rep) == {"manifest", "result"}


def test_gof_is_byte_identical(capsys, data_dir):
    argv = ["gof", "--model", "p1", "--rho", "dyadic", "--steps", "1000", "--seed", "7",
            "--data", data_dir]
    code1, first, _ = run_cli(capsys, *argv)
    code2, second, _ = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    assert first == second
    rep = json.loads(first)
    assert rep["manifest"]["seed"] == 7
    assert 0 < rep["result"]["test"]["p_value"] <= 1


def test_seed_from_environment(capsys, data_dir, monkeypatch):
    argv = ["gof", "--model", "beta", "--c", "1", "--steps", "500", "--data", data_dir]
    monkeypatch.setenv("NETFIBER_SEED", "5")
    _, env_out, _ = run_cli(capsys, *argv)
    monkeypatch.delenv("NETFIBER_SEED")
    _, flag_out, _ = run_cli(capsys, *argv, "--seed", "5")
    assert json.loads(env_out)["manifest"]["seed"] == 5
    assert env_out == flag_out
    monkeypatch.setenv("NETFIBER_SEED", "abc")
    assert run_cli(capsys, *argv)[0] == 1


def test_dump_samples_and_out(capsys, data_dir, tmp_path):
    dump = tmp_path / "s.bin"
    out = tmp_path / "r.json"
    code, _, _ = run_cli(capsys, "gof", "--model", "beta", "--c", "1", "--steps", "400",
                         "--burn-in", "100", "--dump-samples", dump, "--out", out,
                         "--data", data_dir)
    assert code == 0
    rep = json.loads(out.read_text())
    assert len(np.fromfile(dump, dtype="<f8")) == rep["result"]["test"]["n_samples"] == 300


def test_record_time(capsys, data_dir):
    _, out, _ = run_cli(capsys, "ingest", "--data", data_dir, "--record-time")
    assert isinstance(json.loads(out)["manifest"]["wall_clock_seconds"], float)


@pytest.mark.parametrize("what", ["core", "hypergraph"])
def test_export_dot(capsys, data_dir, what):
    code, out, _ = run_cli(capsys, "export-dot", "--what", what, "--data", data_dir)
    assert code == 0
    header, body = out.split("\n", 1)
    assert header.startswith("// manifest: ")
    json.loads(header[len("// manifest: "):])
    assert body.lstrip().startswith(("graph", "digraph"))
    assert body.rstrip().endswith("}")


def test_help_runs_as_module():
    r = subprocess.run([sys.executable, "-m", "netfiber", "--help"], capture_output=True,
                       text=True)
    assert r.returncode == 0
    assert "gof" in r.stdout
