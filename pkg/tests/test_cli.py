import json
import math
import subprocess
import sys

import pytest

from asymdiv.cli import EXIT_CONFIG, EXIT_INAPPLICABLE, EXIT_NUMERIC, main


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def error_obj(err):
    return json.loads(err.strip().splitlines()[-1])["error"]


def test_exponents_234(capsys, tmp_path):
    code, out, _ = run(capsys, "exponents", "--a", "2,3,4", "--out", str(tmp_path))
    assert code == 0
    d = json.loads(out)
    assert d["schema"] == "asymdiv/1"
    assert d["sigma_star"]["value"] == {"num": 7, "den": 8}
    assert d["sigma_star"]["method"] == "lemma7-case3or4"
    assert d["eta3"] == {"value": {"num": 1, "den": 288}, "case": "case3"}
    assert json.loads((tmp_path / "exponents.json").read_text())["eta"] == {"num": 1, "den": 288}


def test_exponents_inapplicable(capsys, tmp_path):
    code, out, _ = run(capsys, "exponents", "--a", "1,2,10", "--out", str(tmp_path))
    assert code == 0
    app = json.loads(out)["applicability"]
    assert app["applicable"] is False
    assert "(k-2)a_k >= a_1+...+a_{k-1}" in app["reasons"][0]


def test_require_applicable_exit_and_rollback(capsys, tmp_path):
    code, out, err = run(capsys, "exponents", "--a", "1,2,10", "--out", str(tmp_path), "--require-applicable")
    assert code == EXIT_INAPPLICABLE
    assert error_obj(err)["type"] == "inapplicable"
    assert out == ""
    assert not (tmp_path / "exponents.json").exists()


@pytest.mark.parametrize(
    "args, key",
    [
        (["--a", "1,1", "--N", "1000", "--T", "2000"], "T"),
        (["--a", "1,x"], "a"),
        (["--a", "1,1", "--N", "abc"], "N"),
        (["--a", "1,1", "--N", "-5"], "N"),
        (["--a", "1,1", "--quad-order", "30"], "quad_order"),
        (["--a", "1,1", "--window", "5"], "window"),
        (["--N", "100"], "a"),
    ],
)
def test_config_errors_name_key(capsys, tmp_path, args, key):
    code, _, err = run(capsys, "sieve", "--out", str(tmp_path), *args)
    assert code == EXIT_CONFIG
    e = error_obj(err)
    assert e["type"] == "config" and e["message"].startswith(key + ":")


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment\na = 1,2\nN = 2000\nprecision = 30\n")
    code, out, _ = run(capsys, "sieve", "--config", str(cfg), "--out", str(tmp_path), "--N", "3000")
    assert code == 0
    d = json.loads(out)
    assert d["a"] == [1, 2] and d["table"]["N"] == 3000


def test_config_file_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("a = 1,1\nfoo = 3\n")
    code, _, err = run(capsys, "sieve", "--config", str(cfg), "--out", str(tmp_path))
    assert code == EXIT_CONFIG
    assert error_obj(err)["message"].startswith("foo:")


def test_numeric_error_exit(capsys, tmp_path):
    code, _, err = run(capsys, "sieve", "--a", "40", "--N", str(2**40), "--out", str(tmp_path))
    assert code == EXIT_NUMERIC
    assert error_obj(err)["type"] == "numeric"
    assert not list(tmp_path.iterdir())


def test_main_term_json(capsys, tmp_path):
    code, out, _ = run(capsys, "main-term", "--a", "1,1", "--precision", "45", "--out", str(tmp_path))
    assert code == 0
    terms = json.loads(out)["main_term"]["terms"]
    assert terms[0]["exponent"] == {"num": 1, "den": 1}
    assert terms[0]["logpoly"][0].startswith("0.15443132980306572121")


def test_delta_csv(capsys, tmp_path):
    code, _, _ = run(capsys, "delta", "--a", "1,1", "--N", "500", "--grid", "1.5,100.5,1", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "delta.csv").read_text().splitlines()
    assert lines[0] == "x,delta" and len(lines) == 101


def test_meansquare_slope_and_determinism(capsys, tmp_path):
    args = ["meansquare", "--a", "1,1", "--T", "1e6", "--out", str(tmp_path / "o"),
            "--cache", str(tmp_path / "c"), "--deterministic"]
    code, out, _ = run(capsys, *args)
    assert code == 0
    d = json.loads(out)
    assert abs(d["fit"]["slope"] - 1.5) < 0.03
    first = (tmp_path / "o" / "meansquare.json").read_bytes()
    assert b"generated_at" not in first
    # warm cache
    run(capsys, *args)
    assert (tmp_path / "o" / "meansquare.json").read_bytes() == first
    # cold cache
    for f in (tmp_path / "c").iterdir():
        f.unlink()
    run(capsys, *args)
    assert (tmp_path / "o" / "meansquare.json").read_bytes() == first
    assert (tmp_path / "o" / "meansquare.csv").exists()
    assert (tmp_path / "o" / "meansquare_loglog.dat").exists()


def test_timestamp_without_deterministic(capsys, tmp_path):
    _, out, _ = run(capsys, "exponents", "--a", "1,1", "--out", str(tmp_path))
    assert "generated_at" in json.loads(out)


def test_voronoi_command(capsys, tmp_path):
    code, out, _ = run(capsys, "voronoi", "--a", "1,1", "--N", "30000", "--M-prime", "200",
                       "--window", "10000,20000", "--samples", "4000", "--out", str(tmp_path))
    assert code == 0
    p = json.loads(out)["calibration"]["params"]
    assert p["omega"] == pytest.approx(4 * math.pi, rel=0.01)
    assert (tmp_path / "voronoi_overlay.csv").exists()


def test_report_small(capsys, tmp_path):
    code, out, _ = run(capsys, "report", "--a", "1,2", "--N", "1e5", "--M-prime", "100",
                       "--samples", "2000", "--out", str(tmp_path), "--deterministic")
    assert code == 0
    d = json.loads(out)
    names = {c["check"] for c in d["checks"]}
    assert {"delta_ratio", "slope"} <= names
    assert {"exponents", "table", "main_term", "meansquare", "voronoi"} <= set(d)


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "asymdiv", "exponents", "--a", "1,5", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["sigma_star"]["method"] == "k2-exact"
