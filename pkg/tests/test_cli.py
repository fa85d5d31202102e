"""CLI: report schema, formats, exit codes."""

import csv
import io
import json

from orthosum.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def spec_file(tmp_path, **kw):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(kw))
    return str(path)


def test_mobius_report_schema(capsys):
    code, out, _ = run(capsys, "mobius", "--m", "4")
    assert code == 0
    report = json.loads(out)
    assert set(report) == {"command", "params", "seed", "results", "assertions"}
    assert report["command"] == "mobius"
    assert report["results"]["abs_sum"] == 24
    assert all(a["ok"] for a in report["assertions"])


def test_mobius_size_limit_exits_2(capsys):
    code, out, err = run(capsys, "mobius", "--m", "11")
    assert code == 2
    assert "size limit" in err


def test_dissociate_canonical(capsys):
    code, out, _ = run(capsys, "dissociate", "--family", "canonical:2,2", "--p", "4")
    assert code == 0
    report = json.loads(out)
    assert report["results"]["ok"] is True


def test_dissociate_witness_on_failure(tmp_path, capsys):
    path = tmp_path / "words.json"
    path.write_text(json.dumps({"1": "g1", "2": "g1"}))
    code, out, _ = run(capsys, "dissociate", "--family", str(path), "--p", "2")
    assert code == 1
    report = json.loads(out)
    (assertion,) = report["assertions"]
    assert assertion["ok"] is False
    assert assertion["witness"] == [[1], [2]]


def test_ortho_pass_and_fail(tmp_path, capsys):
    good = spec_file(
        tmp_path, kind="rademacher", n=2, d=2, p=4, dim=1, seed=3
    )
    code, out, _ = run(capsys, "ortho", "--spec", good)
    assert code == 0
    report = json.loads(out)
    assert report["seed"] == 3
    assert report["results"]["max_abs_violation"] <= 1e-12

    bad = spec_file(tmp_path, kind="random_matrix", n=2, d=1, p=2, dim=2, seed=7)
    code, out, _ = run(capsys, "ortho", "--spec", bad)
    assert code == 1
    report = json.loads(out)
    assert report["assertions"][0]["ok"] is False
    assert report["assertions"][0]["witness"]


def test_ortho_seed_override(tmp_path, capsys):
    spec = spec_file(tmp_path, kind="rademacher", n=2, d=1, p=4, dim=1, seed=3)
    code, out, _ = run(capsys, "ortho", "--spec", spec, "--seed", "99")
    assert code == 0
    assert json.loads(out)["seed"] == 99


def test_decompose(tmp_path, capsys):
    spec = spec_file(tmp_path, kind="random_matrix", n=2, d=2, p=4, dim=2, seed=11)
    code, out, _ = run(capsys, "decompose", "--spec", spec)
    assert code == 0
    report = json.loads(out)
    assert report["results"]["abs_err"] <= 1e-8 * report["results"]["scale"]
    assert {"real", "imag"} == set(report["results"]["lhs"])


def test_factorize_all_tuples_small(tmp_path, capsys):
    spec = spec_file(tmp_path, kind="random_matrix", n=2, d=1, p=2, dim=2, seed=13)
    code, out, _ = run(capsys, "factorize", "--spec", spec)
    assert code == 0
    report = json.loads(out)
    assert report["results"]["tuples_checked"] == 1  # only the two-element block
    names = {a["name"] for a in report["assertions"]}
    assert names == {
        "factorization_identity",
        "common_singleton_norm_equality",
        "holder_bound",
    }


def test_factorize_with_sigmas_file(tmp_path, capsys):
    spec = spec_file(tmp_path, kind="random_matrix", n=2, d=2, p=4, dim=2, seed=13)
    sig = tmp_path / "sigmas.json"
    sig.write_text(json.dumps(["1,2|3,4", "1,3|2,4"]))
    code, out, _ = run(capsys, "factorize", "--spec", spec, "--sigmas", str(sig))
    assert code == 0
    assert json.loads(out)["results"]["tuples_checked"] == 1


def test_factorize_rejects_group_algebra_specs(tmp_path, capsys):
    spec = spec_file(tmp_path, kind="free_generators", n=2, d=1, p=2)
    code, _, err = run(capsys, "factorize", "--spec", spec)
    assert code == 2
    assert "matrix" in err


def test_inequality_pass(tmp_path, capsys):
    spec = spec_file(
        tmp_path, kind="martingale_rademacher", n=4, d=1, p=4, dim=2, seed=17
    )
    code, out, _ = run(capsys, "inequality", "--spec", spec)
    assert code == 0
    report = json.loads(out)
    for key in ("A", "B", "C", "D", "ratio", "pisier_ok"):
        assert key in report["results"]
    names = {a["name"] for a in report["assertions"]}
    assert "pisier_bound" in names


def test_inequality_precondition_failure(tmp_path, capsys):
    spec = spec_file(tmp_path, kind="random_matrix", n=2, d=1, p=2, dim=2, seed=19)
    code, out, _ = run(capsys, "inequality", "--spec", spec)
    assert code == 1
    report = json.loads(out)
    (assertion,) = report["assertions"]
    assert assertion["name"] == "p_orthogonal_precondition"
    assert assertion["ok"] is False


def test_khintchine(tmp_path, capsys):
    spec = spec_file(tmp_path, kind="random_matrix", n=2, d=2, p=4, dim=2, seed=23)
    code, out, _ = run(capsys, "khintchine", "--spec", spec)
    assert code == 0
    report = json.loads(out)
    assert report["results"]["S_norm"] > 0
    assert all(a["ok"] for a in report["assertions"])


def test_sublemma(capsys):
    code, out, _ = run(capsys, "sublemma", "--p", "4", "--D", "1.0")
    assert code == 0
    report = json.loads(out)
    assert report["results"]["root"] <= report["results"]["bound"]


def test_csv_format(capsys):
    code, out, _ = run(capsys, "sublemma", "--p", "2", "--D", "1.0", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["section", "name", "value"]
    sections = {r[0] for r in rows[1:]}
    assert {"meta", "param", "result", "assertion"} <= sections
    assertion_rows = [r for r in rows if r[0] == "assertion"]
    assert assertion_rows == [["assertion", "root_bound", "true"]]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "mobius", "--m", "3", "--out", str(target))
    assert code == 0
    assert out == ""
    report = json.loads(target.read_text())
    assert report["results"]["abs_sum"] == 6


def test_missing_spec_file_exits_2(capsys):
    code, _, err = run(capsys, "ortho", "--spec", "/nonexistent.json")
    assert code == 2
    assert "error" in err


def test_budget_flag_threads_through(tmp_path, capsys):
    spec = spec_file(tmp_path, kind="rademacher", n=2, d=2, p=4, dim=1, seed=3)
    code, _, err = run(capsys, "ortho", "--spec", spec, "--budget", "10")
    assert code == 2
    assert "size limit" in err
