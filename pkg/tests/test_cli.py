import json

import pytest

from freethin.cli import main
from freethin.config import Config
from freethin.errors import PreconditionError
from freethin.nc_lattice import lattice


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_nc_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "--out", str(tmp_path), "nc", "enum", "--n", "4")
    assert code == 0 and json.loads(out) == {"n": 4, "count": 14}
    code, out, _ = run(capsys, "nc", "enum", "--n", "3", "--format", "text")
    assert code == 0 and len(out.splitlines()) == 5
    code, out, _ = run(capsys, "nc", "kreweras", "--n", "3", "--pi", "1,2|3")
    assert json.loads(out)["kreweras"] == "1|2,3"
    code, out, _ = run(capsys, "nc", "moebius", "--pi", "1|2|3", "--sigma", "1,2,3")
    assert json.loads(out)["moebius"] == 2


def test_exit_codes(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and "usage" in err
    code, _, err = run(capsys, "nc", "enum", "--n", "13")
    assert code == 3 and json.loads(err.splitlines()[-1])["error"] == "resource_bound"
    code, _, err = run(capsys, "nc", "kreweras", "--pi", "1,3|2,4")
    assert code == 2
    code, _, err = run(capsys, "thin", "reconstruct", "--z", "(1+sqrt(-7))/2", "--order", "6")
    assert code == 1 and json.loads(err.splitlines()[-1])["step"] == 4
    code, _, _ = run(capsys, "thin", "verify", "--rate", "2", "--p", "1/2", "--order", "3", "--expect-free")
    assert code == 1


def test_cumulant_commands(capsys):
    code, out, _ = run(capsys, "cumulants", "m2k", "--values", "0,1,0,2")
    assert code == 0 and json.loads(out)["cumulants"] == ["0", "1", "0", "0"]
    code, out, _ = run(capsys, "cumulants", "k2m", "--values", "1/2,1/2")
    assert json.loads(out)["moments"] == ["1/2", "3/4"]


def test_model_word_moment(capsys, tmp_path):
    spec = {"families": [{"id": "P", "type": "free_poisson", "rate": "1", "jump": "1"},
                         {"id": "B", "type": "free_bernoulli", "p": "3/10"}]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "model", "word-moment", "--spec", str(path), "--word", "P,B")
    assert code == 0 and json.loads(out)["moment"] == "3/10"
    code, out, _ = run(capsys, "model", "word-moment", "--spec", json.dumps(spec), "--word", "P,1-B,P,1-B")
    # (p(1-b))^2 is a free Poisson of rate 7/10 squared: 7/10 + 49/100
    assert json.loads(out)["moment"] == "119/100"


def test_thin_commands(capsys):
    code, out, _ = run(capsys, "thin", "verify", "--p", "1/2", "--order", "6", "--expect-free")
    d = json.loads(out)
    assert code == 0 and d["free"] and d["max_abs_mixed_cumulant"] == 0
    code, out, _ = run(capsys, "thin", "verify", "--rate", "2", "--p", "1/2", "--order", "3")
    assert code == 0 and json.loads(out)["kappa2_defect"] == "1"
    code, out, _ = run(capsys, "thin", "reconstruct", "--p", "3/10", "--order", "12")
    assert json.loads(out)["kappas"] == ["1"] * 12
    code, out, _ = run(capsys, "thin", "reconstruct", "--marginal", "--p", "1/3", "--jump", "1/2", "--order", "4")
    assert json.loads(out)["kappas"] == ["1/2", "1/4", "1/8", "1/16"]
    code, out, _ = run(capsys, "thin", "categorical", "--probs", "1/2,1/3,1/6", "--order", "4", "--expect-free")
    assert code == 0 and json.loads(out)["free"]


def test_roots_figure1_writes_files_and_manifest(capsys, tmp_path):
    code, out, _ = run(capsys, "--out", str(tmp_path), "roots", "figure1", "--nmax", "10")
    assert code == 0
    csv_text = (tmp_path / "figure1.csv").read_text()
    assert csv_text.startswith("n,re,im,residual")
    assert (tmp_path / "figure1.svg").exists()
    manifest = json.loads((tmp_path / "manifest-roots.json").read_text())
    names = {p.split("/")[-1] for p in manifest["outputs"]}
    assert names == {"figure1.csv", "figure1.svg"}
    first = csv_text
    run(capsys, "--out", str(tmp_path), "roots", "figure1", "--nmax", "10")
    assert (tmp_path / "figure1.csv").read_text() == first


def test_roots_check(capsys):
    code, out, _ = run(capsys, "roots", "check", "--nmax", "12")
    d = json.loads(out)
    assert code == 0 and d["ok"] and len(d["rows"]) == 11
    code, _, _ = run(capsys, "roots", "check", "--nmax", "70")
    assert code == 2


def test_rmt_json_is_byte_identical(capsys, tmp_path):
    args = ["--out", str(tmp_path), "rmt", "run", "--n", "40", "--m", "40", "--trials", "5", "--K", "2", "--seed", "3"]
    run(capsys, *args, "--json", "a.json")
    run(capsys, *args, "--workers", "3", "--json", "b.json")
    a = (tmp_path / "a.json").read_bytes()
    b = (tmp_path / "b.json").read_bytes()
    assert json.loads(a)["empirical"] == json.loads(b)["empirical"]
    run(capsys, *args, "--json", "c.json")
    assert (tmp_path / "c.json").read_bytes() == a
    code, _, _ = run(capsys, "rmt", "run", "--n", "5000", "--m", "5000")
    assert code == 3


def test_rmt_sweep(capsys):
    code, out, _ = run(capsys, "rmt", "sweep", "--spectrum", "0:0.35,0.5:0.3,1:0.35", "--sizes", "40",
                       "--trials", "4", "--K", "2")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 1 and rows[0]["n"] == 40


def test_classical_commands(capsys):
    code, out, _ = run(capsys, "classical", "split", "--dist", "poisson:2", "--p", "0.3", "--cutoff", "60")
    d = json.loads(out)
    assert code == 0 and d["defect"] < 1e-12 and d["conclusive"]
    code, out, _ = run(capsys, "classical", "split", "--dist", "geometric:0.5", "--p", "0.3", "--cutoff", "80")
    assert json.loads(out)["defect"] > 1e-3
    code, out, _ = run(capsys, "classical", "compound", "--dist", "poisson:2", "--x", "0:0.5,2:0.5", "--cutoff", "80")
    assert json.loads(out)["defect"] > 1e-3
    code, out, _ = run(capsys, "classical", "split", "--dist", "poisson:3", "--p", "0.5,0.3,0.2", "--cutoff", "40")
    assert json.loads(out)["k"] == 3


def test_config_file_env_and_flags(tmp_path, capsys):
    cfg = tmp_path / "freethin.cfg"
    cfg.write_text("# defaults\ncap = 10\norder = 6\nseed = 11\n")
    c = Config.load(str(cfg), env={})
    assert (c.cap, c.order, c.seed) == (10, 6, 11)
    c = Config.load(str(cfg), env={"FREETHIN_SEED": "99"})
    assert c.seed == 99
    c = Config.load(str(cfg), env={"FREETHIN_SEED": "99"}, seed=5)
    assert c.seed == 5
    with pytest.raises(PreconditionError):
        Config.load(None, env={"FREETHIN_ORDER": "20"})
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    with pytest.raises(PreconditionError):
        Config.load(str(bad), env={})
    code, _, _ = run(capsys, "--config", str(cfg), "nc", "enum", "--n", "11")
    assert code == 3
    code, _, _ = run(capsys, "--config", str(tmp_path / "missing.cfg"), "nc", "enum", "--n", "3")
    assert code == 2


def test_verify_all_subset(capsys):
    code, out, err = run(capsys, "verify-all", "--quick", "--only", "AC-1,AC-3,AC-4")
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert [c["id"] for c in d["criteria"]] == ["AC-1", "AC-3", "AC-4"]
    assert len(err.strip().splitlines()) == 3


def test_tampered_moebius_table_fails_ac2(capsys):
    t = lattice(5)
    key = (t.idx(t.bottom), t.idx(t.top))
    t.moebius(t.bottom, t.top)
    saved = t.moebius_cache[key]
    t.moebius_cache[key] = saved + 1
    try:
        code, out, err = run(capsys, "verify-all", "--only", "AC-2")
    finally:
        t.moebius_cache[key] = saved
    assert code == 1
    assert not json.loads(out)["passed"]
    assert "FAIL" in err
    code, _, _ = run(capsys, "verify-all", "--only", "AC-2")
    assert code == 0


def test_verify_all_unknown_id(capsys):
    code, _, _ = run(capsys, "verify-all", "--only", "AC-99")
    assert code == 2
