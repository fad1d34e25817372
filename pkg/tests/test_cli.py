import json

import pytest

from randcok.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def matrix_file(tmp_path):
    f = tmp_path / "m.txt"
    f.write_text("2 2\n2 4\n6 8\n")
    return str(f)


def test_snf_and_cokernel(capsys, matrix_file, tmp_path):
    assert run(capsys, "snf", matrix_file)[:2] == (0, "2 4\n")
    code, out, _ = run(capsys, "snf", matrix_file, "--format", "json")
    assert code == 0 and json.loads(out)["invariant_factors"] == [2, 4]
    assert run(capsys, "cokernel", matrix_file)[1].strip() == "Z/2 x Z/4"
    j = tmp_path / "sing.json"
    j.write_text("[[1, 2], [2, 4]]")
    assert json.loads(run(capsys, "cokernel", str(j), "--format", "json")[1])["free_rank"] == 1


def test_bad_input_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 2\n1 x\n")
    code, _, err = run(capsys, "snf", str(bad))
    assert code == 2 and "bad matrix" in err
    assert run(capsys, "snf", str(tmp_path / "missing"))[0] == 2
    assert run(capsys, "nosuchcommand")[0] == 2
    assert run(capsys, "simulate", "--model", "symmetric", "--n", "4")[0] == 2
    assert run(capsys, "theory", "nonsense")[0] == 2


def test_sandpile_and_trees(capsys):
    assert run(capsys, "sandpile", "--edges", "0 1,1 2,2 3,3 0")[1].strip() == "Z/4"
    code, out, _ = run(capsys, "sandpile", "--edges", "0 1,0 2,0 3,1 2,1 3,2 3", "--format", "json")
    assert json.loads(out)["torsion"] == [4, 4]
    assert run(capsys, "spanning-trees", "--edges", "0 1,1 2,2 0")[1].strip() == "3"
    assert run(capsys, "sandpile")[0] == 2


def test_theory(capsys):
    code, out, _ = run(capsys, "theory", "cyclic-sym")
    assert code == 0 and round(json.loads(out)["value"], 4) == 0.7935
    code, out, _ = run(capsys, "theory", "mu-sym", "--prime", "2", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "k,prob"
    code, out, _ = run(capsys, "theory", "mu-alt-even", "--prime", "2", "--n", "2")
    assert code == 0 and json.loads(out)["probs"] == {"0": 0.5, "1": 0.0, "2": 0.5}
    assert run(capsys, "theory", "mu-sym")[0] == 2


def test_simulate_writes_out_file(capsys, tmp_path):
    out = tmp_path / "res.json"
    code, stdout, _ = run(capsys, "simulate", "--model", "symmetric", "--n", "6", "--statistic", "is_cyclic",
                          "--trials", "200", "--seed", "3", "--target", "cyclic-sym", "--out", str(out))
    assert code == 0 and stdout == ""
    res = json.loads(out.read_text())
    assert res["spec"]["seed"] == 3 and res["verdict"] in ("PASS", "FAIL")
    assert sum(res["counts"].values()) == 200 and "wilson_ci" in res


def test_seed_from_environment(capsys, monkeypatch):
    args = ["simulate", "--model", "iid", "--n", "5", "--statistic", "corank_mod_p", "--prime", "2",
            "--trials", "100"]
    monkeypatch.setenv("RANDCOK_SEED", "11")
    env = json.loads(run(capsys, *args)[1])
    assert env["seed"] == 11
    # an explicit flag wins over the environment
    flag = json.loads(run(capsys, *args, "--seed", "12")[1])
    assert flag["seed"] == 12
    monkeypatch.delenv("RANDCOK_SEED")
    assert json.loads(run(capsys, *args)[1])["seed"] == 0
    monkeypatch.setenv("RANDCOK_SEED", "eleven")
    assert run(capsys, *args)[0] == 2


def test_spec_file_with_overrides(capsys, tmp_path):
    spec = {"model": {"kind": "skew", "n": 4}, "statistic": "corank_mod_p", "primes": [3], "trials": 50, "seed": 9}
    f = tmp_path / "spec.json"
    f.write_text(json.dumps(spec))
    res = json.loads(run(capsys, "simulate", str(f))[1])
    assert res["spec"]["seed"] == 9 and res["spec"]["trials"] == 50
    res = json.loads(run(capsys, "simulate", str(f), "--trials", "70")[1])
    assert res["spec"]["trials"] == 70
    again = json.loads(run(capsys, "simulate", str(f), "--trials", "70")[1])
    res.pop("elapsed_ms"), again.pop("elapsed_ms")
    assert res == again


def test_exhaustive(capsys):
    code, out, _ = run(capsys, "exhaustive", "--model", "laplacian_er", "--n", "2", "--statistic", "is_cyclic")
    assert code == 0 and json.loads(out)["law"] == {"false": "1/8", "true": "7/8"}
    code, out, _ = run(capsys, "exhaustive", "--model", "iid", "--n", "6", "--statistic", "is_cyclic")
    assert code == 2


def test_rank_chain(capsys):
    code, out, _ = run(capsys, "rank-chain", "--model", "skew", "--n", "8", "--prime", "3", "--n0", "2",
                       "--chains", "5", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "corank,rank_increment,count"
    assert run(capsys, "rank-chain", "--model", "skew", "--n", "8")[0] == 2


def test_rho(capsys):
    code, out, _ = run(capsys, "rho", "--vector", "0,0,0", "--prime", "7")
    assert code == 0 and json.loads(out)["rho"] == pytest.approx(6 / 7)
    code, out, _ = run(capsys, "rho", "--vector", "1,1,1,1", "--prime", "101", "--n-prime", "2")
    assert code == 0 and "gap" in json.loads(out)
    code, out, _ = run(capsys, "rho", "--vector", "1,2", "--prime", "65521", "--mode", "sampled",
                       "--samples", "1000", "--seed", "1")
    assert code == 0 and json.loads(out)["stderr"] > 0
    assert run(capsys, "rho", "--vector", "1,2", "--prime", "4")[0] == 2


def test_reproduce_small(capsys):
    code, out, _ = run(capsys, "reproduce", "table1", "--n", "8", "--q", "0.5", "--trials", "40", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,q,estimate,lo,hi" and lines[1].startswith("8,0.5,")
