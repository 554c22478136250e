import csv
import json

import numpy as np
import pytest

from d2fa_compress import generate_clustered_dfa, read_d2fa, read_dfa, write_d2fa, write_dfa
from d2fa_compress.cli import CSV_HEADER, main, parse_synthetic
from d2fa_compress.d2fa import D2fa

from conftest import make_t1


@pytest.fixture
def t1_file(tmp_path):
    p = tmp_path / "t1.dfa"
    write_dfa(make_t1(), p)
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compile_round_trip(tmp_path, capsys):
    rules = tmp_path / "a.rules"
    rules.write_text("# one rule\n.*ab\n")
    code, out, _ = run(capsys, "compile", "--rules", rules, "--out", tmp_path / "a.dfa")
    assert code == 0 and "states 3" in out
    assert read_dfa(tmp_path / "a.dfa").state_count == 3


def test_compile_empty_rules_is_sink(tmp_path, capsys):
    rules = tmp_path / "e.rules"
    rules.write_text("")
    assert run(capsys, "compile", "--rules", rules, "--out", tmp_path / "e.dfa")[0] == 0
    dfa = read_dfa(tmp_path / "e.dfa")
    assert dfa.state_count == 1 and not dfa.accepting


def test_compile_reports_line_of_bad_rule(tmp_path, capsys):
    rules = tmp_path / "b.rules"
    rules.write_text("ab\n\n# note\na(b\n")
    code, _, err = run(capsys, "compile", "--rules", rules, "--out", tmp_path / "b.dfa")
    assert code == 1 and "b.rules:4:" in err and "offset 1" in err
    assert not (tmp_path / "b.dfa").exists()


def test_compile_restricted_alphabet(tmp_path, capsys):
    rules = tmp_path / "f.rules"
    rules.write_text(".*((ab+c+)|(cd+)|(bd+e))\n")
    code, out, _ = run(capsys, "compile", "--rules", rules, "--alphabet", 5, "--symbols", "abcde",
                       "--out", tmp_path / "f.dfa")
    assert code == 0 and "states 9" in out


def test_compress_t1_stats(tmp_path, capsys, t1_file):
    stats = tmp_path / "s.json"
    code, out, _ = run(capsys, "compress", "--dfa", t1_file, "--algo", "orig", "--out",
                       tmp_path / "t1.d2fa", "--stats", stats)
    assert code == 0
    rec = json.loads(stats.read_text())
    assert rec["total_after"] == 7 and rec["compression_ratio"] == 0.875
    assert rec["verified"] is True
    assert set(rec["elapsed_ms"]) == {"graph", "forest", "build", "total"}
    assert "total_after=7" in out


def test_compress_cut_sp_delay_and_determinism(tmp_path, capsys):
    write_dfa(generate_clustered_dfa(300, 32, 8, 0.1, 2), tmp_path / "c.dfa")
    outs = []
    for name in ("x", "y"):
        code, _, _ = run(capsys, "compress", "--dfa", tmp_path / "c.dfa", "--algo", "cut-sp", "--L", 2,
                         "--k", 4, "--r", 32, "--seed", 9, "--out", tmp_path / f"{name}.d2fa",
                         "--stats", tmp_path / f"{name}.json")
        assert code == 0
        assert json.loads((tmp_path / f"{name}.json").read_text())["longest_delay"] <= 2
        outs.append((tmp_path / f"{name}.d2fa").read_bytes())
    assert outs[0] == outs[1]


def test_compress_unknown_algo(tmp_path, capsys, t1_file):
    code, _, err = run(capsys, "compress", "--dfa", t1_file, "--algo", "nope", "--out", tmp_path / "o")
    assert code == 1 and "invalid choice" in err


def test_compress_dense_cap(tmp_path, capsys, t1_file):
    code, _, err = run(capsys, "compress", "--dfa", t1_file, "--algo", "orig", "--dense-cap", 2,
                       "--out", tmp_path / "o")
    assert code == 1 and "cap" in err


def test_compress_missing_file(tmp_path, capsys):
    code, _, _ = run(capsys, "compress", "--dfa", tmp_path / "none.dfa", "--algo", "orig",
                     "--out", tmp_path / "o")
    assert code == 1


@pytest.fixture
def t1_d2fa(tmp_path, capsys, t1_file):
    out = tmp_path / "t1.d2fa"
    assert run(capsys, "compress", "--dfa", t1_file, "--algo", "orig", "--out", out)[0] == 0
    return out


def test_match_t1(tmp_path, capsys, t1_d2fa):
    inp = tmp_path / "in.txt"
    inp.write_bytes(b"abb")
    code, out, _ = run(capsys, "match", "--d2fa", t1_d2fa, "--input", inp, "--symbols", "ab", "--report")
    assert code == 0
    lines = out.splitlines()
    assert "accept 3" in lines and "bytes 3" in lines
    rep = json.loads(lines[-1])
    assert rep["accepted"] and rep["end_state"] == 3


def test_match_empty_input(tmp_path, capsys, t1_d2fa):
    inp = tmp_path / "empty"
    inp.write_bytes(b"")
    code, out, _ = run(capsys, "match", "--d2fa", t1_d2fa, "--input", inp, "--symbols", "ab", "--report")
    assert code == 0 and "matching_delay 0" in out
    assert json.loads(out.splitlines()[-1])["accepted"] is False


def test_match_outside_alphabet(tmp_path, capsys, t1_d2fa):
    inp = tmp_path / "bad"
    inp.write_bytes(b"abz")
    code, _, err = run(capsys, "match", "--d2fa", t1_d2fa, "--input", inp, "--symbols", "ab")
    assert code == 1 and "offset 2" in err


def test_match_unresolvable_is_integrity_failure(tmp_path, capsys):
    p = tmp_path / "broken.d2fa"
    write_d2fa(D2fa.from_rows(2, [{0: 0}, {1: 0}], [None, 0]), p)
    inp = tmp_path / "in"
    inp.write_bytes(bytes([1]))
    assert run(capsys, "match", "--d2fa", p, "--input", inp)[0] == 2


def test_match_adfa_delay_per_byte(tmp_path, capsys):
    write_dfa(generate_clustered_dfa(200, 256, 10, 0.2, 1), tmp_path / "g.dfa")
    assert run(capsys, "compress", "--dfa", tmp_path / "g.dfa", "--algo", "adfa",
               "--out", tmp_path / "g.d2fa")[0] == 0
    inp = tmp_path / "in"
    inp.write_bytes(np.random.default_rng(0).integers(0, 256, 5000, dtype=np.uint8).tobytes())
    code, out, _ = run(capsys, "match", "--d2fa", tmp_path / "g.d2fa", "--input", inp, "--report")
    assert code == 0
    assert json.loads(out.splitlines()[-1])["delay_per_byte"] <= 1


def test_verify_paths(tmp_path, capsys, t1_file, t1_d2fa):
    code, out, _ = run(capsys, "verify", "--dfa", t1_file, "--d2fa", t1_d2fa)
    assert code == 0 and out.startswith("equivalent")
    # planted defect: state 2 on b goes to 0 instead of 3
    d = read_d2fa(t1_d2fa)
    rows = [d.labeled(u) for u in range(4)]
    rows[2][1] = 0
    bad = tmp_path / "bad.d2fa"
    write_d2fa(D2fa.from_rows(2, rows, [d.default_of(u) for u in range(4)], 0, {3}), bad)
    code, out, _ = run(capsys, "verify", "--dfa", t1_file, "--d2fa", bad)
    assert code == 2 and "state 2, character 1: expected 3, got 0" in out
    other = tmp_path / "o.dfa"
    write_dfa(generate_clustered_dfa(5, 2, 1, 0.0, 0), other)
    code, _, err = run(capsys, "verify", "--dfa", other, "--d2fa", t1_d2fa)
    assert code == 1 and "shape mismatch" in err


def test_no_verify_output_still_verifies(tmp_path, capsys):
    for seed in range(3):
        write_dfa(generate_clustered_dfa(120, 16, 6, 0.2, seed), tmp_path / "x.dfa")
        for algo in ("orig-sp", "refined", "cut-sp", "adfa-sp"):
            assert run(capsys, "compress", "--dfa", tmp_path / "x.dfa", "--algo", algo, "--r", 8,
                       "--no-verify", "--out", tmp_path / "x.d2fa")[0] == 0
            assert run(capsys, "verify", "--dfa", tmp_path / "x.dfa", "--d2fa", tmp_path / "x.d2fa")[0] == 0


def test_bench_row_accounting(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, stdout, _ = run(capsys, "bench", "--synthetic", "clustered:n=64/128/256/512,per_cluster=16",
                          "--algos", "orig,orig-sp", "--seeds", "0,1", "--r", 16, "--csv", out)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert len(rows) == 16
    assert all(0 < float(r["ratio"]) <= 1 for r in rows)
    assert "sparse vs dense" in stdout
    # appending keeps a single header
    run(capsys, "bench", "--synthetic", "clustered:n=64", "--algos", "adfa", "--csv", out)
    text = out.read_text().splitlines()
    assert len(text) == 18 and text.count(",".join(CSV_HEADER)) == 1


def test_bench_failures_are_recorded(tmp_path, capsys):
    out = tmp_path / "f.csv"
    code, _, err = run(capsys, "bench", "--synthetic", "clustered:n=64/128", "--algos", "orig,orig-sp",
                       "--dense-cap", 100, "--r", 4, "--csv", out)
    assert code == 0 and "GraphTooLarge" in err
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4
    failed = [r for r in rows if r["algo"] == "orig" and r["n"] == "128"]
    assert failed[0]["ratio"] == ""


def test_bench_rules_dir(tmp_path, capsys):
    d = tmp_path / "rules"
    d.mkdir()
    (d / "one.rules").write_text(".*ab\n.*cd+e\n")
    (d / "two.rules").write_text(".*x[yz]{2}\n")
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "bench", "--rules-dir", d, "--algos", "orig,adfa,cut-sp", "--r", 8,
                     "--csv", out)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["dataset"] for r in rows] == ["one"] * 3 + ["two"] * 3


def test_bench_rejects_bad_input(tmp_path, capsys):
    assert run(capsys, "bench", "--synthetic", "clustered:n=64", "--algos", "fast", "--csv",
               tmp_path / "x.csv")[0] == 1
    assert run(capsys, "bench", "--synthetic", "weird:n=4", "--csv", tmp_path / "x.csv")[0] == 1


def test_parse_synthetic():
    assert parse_synthetic("clustered:n=1/2,m=4") == ("clustered", [1, 2], {"m": "4"})
    with pytest.raises(ValueError):
        parse_synthetic("clustered:bogus=1")


def test_usage_error_exit_code(capsys):
    assert run(capsys, "compress")[0] == 1
