"""Command line front end."""
import csv
import io
import json

import pytest

from sphere_interp.cli import load_config, main
from sphere_interp.cli import ConfigError


def _cfg(tmp_path, doc):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return str(path)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_coeffs_default_p8(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["coeffs", "--out", str(out)]) == 0
    rows = _rows(out)
    cont = [r for r in rows if r["method"] == "contour"]
    clo = [r for r in rows if r["method"] == "closed_form"]
    assert len(cont) == len(clo) == 5
    for a, b in zip(cont, clo):
        assert (a["p"], a["n"], a["r"]) == (b["p"], b["n"], b["r"])
        assert abs(float(a["re"]) - float(b["re"])) < 1e-6 * (1 + abs(float(b["re"])))
    assert float(clo[1]["re"]) == pytest.approx(16.0, abs=1e-3)


def test_coeffs_deterministic(tmp_path):
    cfg = _cfg(tmp_path, {"p": [6, 9], "n": [1, 2], "r": [0.0, 1.3], "tilde": True, "c_max": 24})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["coeffs", "--config", cfg, "--out", str(a)]) == 0
    assert main(["coeffs", "--config", cfg, "--out", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header == "p,n,r,method,re,im,error_estimate,c_max,flagged,truncation_error,note"
    # 17 significant digits
    assert len(_rows(a)[0]["error_estimate"].replace("-", "").split("e")[0].replace(".", "")) <= 17


def test_coeffs_vanishing_rows(tmp_path):
    out = tmp_path / "v.csv"
    cfg = _cfg(tmp_path, {"p": [5], "n": [-1, 1], "r": [1.0]})
    assert main(["coeffs", "--config", cfg, "--out", str(out)]) == 0
    rows = _rows(out)
    zero = [r for r in rows if int(r["n"]) <= 0]
    assert len(zero) == 4
    for r in zero:
        assert abs(float(r["re"])) < 1e-8 and "vanishing" in r["note"]


def test_coeffs_flagged_exit(tmp_path):
    cfg = _cfg(tmp_path, {"p": [6], "n": 3, "r": [1.0], "tol": 1e-18, "methods": ["contour"]})
    assert main(["coeffs", "--config", cfg, "--out", str(tmp_path / "f.csv")]) == 1
    assert _rows(tmp_path / "f.csv")[0]["flagged"] == "1"


@pytest.mark.parametrize("doc,needle", [
    ({"n": [3, 2]}, "empty range"),
    ({"bogus": 1}, "unknown key"),
    ({"p": [4]}, "p:"),
    ({"r": [-1.0]}, "r:"),
    ({"tol": 0}, "tol"),
    ({"methods": ["guess"]}, "methods"),
])
def test_coeffs_usage_errors(tmp_path, capsys, doc, needle):
    assert main(["coeffs", "--config", _cfg(tmp_path, doc)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert any(needle in e for e in err["errors"])


def test_parser_errors(capsys):
    assert main(["explode"]) == 2
    assert main(["coeffs", "--only", "words"]) == 2
    assert main(["coeffs", "--config", "/nonexistent.json"]) == 2
    assert main(["verify", "--only", "nope"]) == 2
    assert "errors" in json.loads(capsys.readouterr().err.splitlines()[-1])


def test_verify_only(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--only", "functional_equation", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [c["name"] for c in doc["checks"]] == ["functional_equation"]
    part = doc["checks"][0]["parts"][0]
    assert part["value"] < part["threshold"] and "runtime_s" in doc["checks"][0]


def test_verify_tightened_threshold_reports_failure(tmp_path):
    cfg = _cfg(tmp_path, {"thresholds": {"modular.cocycle": 1e-12, "modular.gauss": 1e-12}})
    out = tmp_path / "v.json"
    assert main(["verify", "--only", "modular,words", "--config", cfg, "--out", str(out)]) == 1
    doc = json.loads(out.read_text())
    assert not doc["passed"]
    modular = doc["checks"][0]
    failed = [p for p in modular["parts"] if not p["passed"]]
    assert [p["name"] for p in failed] == ["cocycle"]
    assert failed[0]["value"] > 1e-12
    assert doc["checks"][1]["passed"]


def test_verify_unknown_threshold(tmp_path):
    cfg = _cfg(tmp_path, {"thresholds": {"nonsense": 1.0}})
    assert main(["verify", "--config", cfg]) == 2


def test_plotdata(tmp_path):
    out = tmp_path / "plot.csv"
    cfg = _cfg(tmp_path, {"kernel": {"m_max": 2, "t_points": 5}})
    code = main(["plotdata", "--config", cfg, "--profile", "fast", "--out", str(out)])
    rows = _rows(out)
    assert len(rows) == 81
    assert float(rows[0]["re"]) == pytest.approx(4.0, abs=1e-4)
    assert float(rows[-1]["r"]) == pytest.approx(4.0)
    flagged = [r for r in rows if r["flagged"] == "1"]
    assert code == (1 if flagged else 0)
    assert all(r["error_estimate"] for r in rows)
    kernel = _rows(tmp_path / "plot_kernel.csv")
    assert len(kernel) == 3 * 5
    small = tmp_path / "k.csv"
    cfg2 = _cfg(tmp_path, {"kernel": {"m_max": 4, "t_points": 5}, "r_grid": [0.0, 0.1, 0.05]})
    main(["plotdata", "--config", cfg2, "--profile", "fast", "--out", str(small)])
    assert (tmp_path / "k_kernel.csv").stat().st_size > (tmp_path / "plot_kernel.csv").stat().st_size


def test_load_config_merges_overrides():
    cfg = load_config("verify", None, {"profile": "deep", "threads": 3, "only": "words"})
    assert cfg["profile"] == "deep" and cfg["threads"] == 3 and cfg["only"] == ["words"]
    with pytest.raises(ConfigError):
        load_config("verify", None, {"threads": 0})
