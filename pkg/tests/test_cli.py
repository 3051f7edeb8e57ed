import csv
import json

import pytest

from rskpoisson.cli import (EXIT_PASS, EXIT_REJECT, EXIT_USAGE, CampaignConfig, RunManifest,
                            block_rng, main, parse_letters)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_rsk_from_file(tmp_path, capsys):
    f = tmp_path / "w.txt"
    f.write_text("3 1 2\n")
    code, out, _ = run(["rsk", str(f)], capsys)
    doc = json.loads(out)
    assert code == EXIT_PASS and doc["shape"] == [2, 1]
    assert doc["P"] == [[1, 2], [3]] and doc["Q"] == [[1, 3], [2]]


def test_rsk_empty_and_duplicates(tmp_path, capsys):
    f = tmp_path / "empty.txt"
    f.write_text("")
    code, out, _ = run(["rsk", str(f)], capsys)
    assert code == 0 and json.loads(out)["shape"] == []
    f.write_text("0.5 0.25 0.5")
    code, _, err = run(["rsk", str(f)], capsys)
    assert code == EXIT_USAGE and "distinct" in err
    f.write_text("1 x")
    assert run(["rsk", str(f)], capsys)[0] == EXIT_USAGE


def test_rsk_generated_and_truncated(capsys):
    code, out, _ = run(["rsk", "--n", "50", "--k", "1", "--seed", "3"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["P"]) == 2 and sum(doc["shape"]) == 50


def test_parse_letters():
    assert parse_letters("3 1.5\n-2") == [3, 1.5, -2]


def test_usage_errors(tmp_path, capsys):
    assert run(["verify", "s_table", "--nmax", "60", "--out", str(tmp_path)], capsys)[0] == EXIT_USAGE
    assert run(["verify", "localP", "--w", "1.5", "--out", str(tmp_path)], capsys)[0] == EXIT_USAGE
    assert run(["verify", "tvd", "--reps", "100", "--out", str(tmp_path)], capsys)[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2
    assert run(["calibrate", "poisson", "--alpha", "2", "--out", str(tmp_path)], capsys)[0] == EXIT_USAGE


def test_verify_s_table_outputs(tmp_path, capsys):
    out = tmp_path / "s"
    code, text, _ = run(["verify", "s_table", "--K", "1", "--nmax", "40", "--out", str(out)], capsys)
    assert code == EXIT_PASS and "PASS K1_bound" in text
    report = json.loads((out / "report.json").read_text())
    manifest = RunManifest.read(out / "manifest.json")
    assert report["config_hash"] == manifest.config_hash
    with open(out / "tables" / "s_table.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 80
    assert all(r["config_hash"] == manifest.config_hash and r["seed"] == "0" for r in rows)
    assert set(manifest.files) == {"report.json", "tables/s_table.csv", "tables/row_growth.csv",
                                   "manifest.json"}


def test_verify_hammersley_equiv(tmp_path, capsys):
    code, text, _ = run(["verify", "hammersley_equiv", "--words", "100", "--len", "80", "--k", "3",
                         "--out", str(tmp_path)], capsys)
    assert code == EXIT_PASS and "PASS all_words_equivalent" in text


def test_deterministic_alternative_is_rejected(tmp_path, capsys):
    # exp_tail calibration: constant input must be rejected, Exp(1) samples not
    code, text, _ = run(["calibrate", "exp_tail", "--campaigns", "20", "--reps", "500",
                         "--out", str(tmp_path)], capsys)
    assert code == EXIT_PASS and "PASS alternative_power" in text


def _report(path):
    return (path / "report.json").read_bytes()


def test_reports_do_not_depend_on_jobs(tmp_path, capsys):
    args = ["verify", "poisson", "--n", "900", "--k", "1", "--c", "3", "--reps", "300",
            "--block-size", "70"]
    run(args + ["--jobs", "1", "--out", str(tmp_path / "a")], capsys)
    run(args + ["--jobs", "2", "--out", str(tmp_path / "b")], capsys)
    assert _report(tmp_path / "a") == _report(tmp_path / "b")
    for name in ("rows.csv", "covariances.csv", "paths_mean.csv"):
        assert (tmp_path / "a" / "tables" / name).read_bytes() == \
            (tmp_path / "b" / "tables" / name).read_bytes()
    run(args + ["--seed", "1", "--out", str(tmp_path / "c")], capsys)
    assert _report(tmp_path / "a") != _report(tmp_path / "c")


def test_manifest_roundtrip_and_rerun(tmp_path, capsys):
    a = tmp_path / "a"
    run(["verify", "exp_tail", "--n", "400", "--reps", "300", "--seed", "5", "--out", str(a)], capsys)
    m = RunManifest.read(a / "manifest.json")
    m.write(tmp_path / "copy.json")
    assert RunManifest.read(tmp_path / "copy.json") == m
    assert m.streams == {"main/0": [300]}
    b = tmp_path / "b"
    run(["verify", "exp_tail", "--from-manifest", str(a / "manifest.json"), "--out", str(b)], capsys)
    assert _report(a) == _report(b)
    assert (a / "tables" / "samples.csv").read_bytes() == (b / "tables" / "samples.csv").read_bytes()


def test_config_hash_ignores_out_and_jobs():
    a = CampaignConfig("verify", "tvd", out="x", jobs=1)
    b = CampaignConfig("verify", "tvd", out="y", jobs=4)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != CampaignConfig("verify", "tvd", seed=1).config_hash()


def test_block_streams_are_independent_of_order():
    x = block_rng(7, "main", 0, 3).random(3)
    y = block_rng(7, "main", 0, 3).random(3)
    z = block_rng(7, "main", 0, 4).random(3)
    assert (x == y).all() and not (x == z).all()


def test_grow_and_hammersley_commands(tmp_path, capsys):
    code, out, _ = run(["grow", "--n", "400", "--ell", "3", "--k", "1", "--reps", "50",
                        "--out", str(tmp_path / "g")], capsys)
    assert code == 0
    with open(tmp_path / "g" / "tables" / "labels.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 150 and {r["label"] for r in rows} <= {"0", "1", "inf"}
    code, out, _ = run(["grow", "--n", "400", "--ell", "3", "--k", "1", "--reps", "50",
                        "--independent", "--out", str(tmp_path / "v")], capsys)
    assert code == 0
    pts = tmp_path / "pts.csv"
    pts.write_text("x,t\n3,1\n1,2\n2,3\n")
    code, out, _ = run(["hammersley", "--points", str(pts), "--k", "1", "--out", str(tmp_path / "h")],
                       capsys)
    assert code == 0 and json.loads(out.splitlines()[0])["lines"] == [[1.0, 2.0], [3.0]]
    with open(tmp_path / "h" / "tables" / "trace.csv") as fh:
        header = next(csv.reader(fh))
    assert header[:5] == ["line", "t", "kind", "x_old", "x_new"]


def test_statistical_rejection_exit_code(tmp_path, capsys):
    # localP at a tiny n with an absurd alpha: the gap tests reject
    code, _, _ = run(["verify", "localP", "--n", "400", "--reps", "200", "--alpha", "0.999",
                      "--out", str(tmp_path)], capsys)
    assert code == EXIT_REJECT
