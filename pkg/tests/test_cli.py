import json

import pytest

from primequot import cli


def run(capsys, argv, env=None, monkeypatch=None):
    if env:
        for k, v in env.items():
            monkeypatch.setenv(k, v)
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, argv, **kw):
    code, out, err = run(capsys, argv, **kw)
    return code, json.loads(out), err


# -- sieve -------------------------------------------------------------------

def test_sieve_small(capsys):
    code, doc, _ = run_json(capsys, ["sieve", "--limit", "100"])
    assert code == 0
    assert doc["count"] == 25 and doc["last_prime"] == 97


def test_sieve_limit_too_small(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["sieve", "--limit", "1"])
    assert exc.value.code == 64


def test_sieve_cache_reused(capsys, tmp_path):
    cache = str(tmp_path / "t.npz")
    code, doc, _ = run_json(capsys, ["sieve", "--limit", "100000",
                                     "--cache", cache])
    assert code == 0 and doc["cache"] == cache
    code, doc2, _ = run_json(
        capsys, ["verify", "max-quotient", "--cache", cache])
    assert code == 0 and doc2["result"] == "pass"


# -- check-class ---------------------------------------------------------------

def test_check_class_pass(capsys):
    code, doc, _ = run_json(
        capsys, ["check-class", "--oracle", "sqrt-like:1",
                 "--params", "0,1,1", "--range", "0..5000", "--nmax", "60"])
    assert code == 0 and doc["result"] == "pass"
    names = [p["check"] for p in doc["details"]["parts"]]
    assert names == ["almost-increasing", "linear-difference"]


def test_check_class_fail_on_linear_table(capsys, tmp_path):
    path = tmp_path / "ident.txt"
    path.write_text("".join(f"{v}\n" for v in range(200)))
    code, doc, _ = run_json(
        capsys, ["check-class", "--oracle", f"table:{path}",
                 "--params", "0,1,1", "--range", "0..199", "--nmax", "50"])
    assert code == 1 and doc["result"] == "fail"
    assert doc["witness"]["d"] == 1


def test_check_class_bad_params(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["check-class", "--oracle", "sqrt-like:1",
                  "--params", "nope"])
    assert exc.value.code == 64


def test_unknown_oracle(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["check-class", "--oracle", "weird:thing",
                  "--params", "0,1,1"])
    assert exc.value.code == 64


# -- verify -------------------------------------------------------------------

def test_verify_max_quotient_json(capsys, monkeypatch):
    code, doc, _ = run_json(
        capsys, ["verify", "max-quotient"], monkeypatch=monkeypatch,
        env={"PRIMEQUOT_SIEVE_LIMIT": "100000"})
    assert code == 0 and doc["result"] == "pass"
    assert doc["details"]["argmax"] == 7012
    assert doc["config"]["command"] == "verify"
    assert doc["runtime_ms"] == 0  # serialized output zeroes timings


def test_verify_out_files_byte_identical(capsys, tmp_path):
    argv = ["verify", "window-variation", "--oracle", "sqrt-like:1",
            "--params", "0,1,1", "--range", "2..3000"]
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert cli.main(argv + ["--out", a]) == 0
    assert cli.main(argv + ["--out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


def test_verify_gap_lemma_sqrt(capsys):
    code, doc, _ = run_json(
        capsys, ["verify", "gap-lemma", "--oracle", "sqrt-like:2",
                 "--params", "0,2,1", "--nmax", "100"])
    assert code == 0 and doc["result"] == "pass"


def test_verify_extraction_sqrt(capsys):
    code, doc, _ = run_json(
        capsys, ["verify", "extraction", "--oracle", "sqrt-like:1",
                 "--params", "0,1,1", "--range", "32..4000"])
    assert code == 0
    assert doc["details"]["threshold"] == "x0 = 31"


def test_verify_relation_ftilde_sqrt(capsys):
    code, doc, _ = run_json(
        capsys, ["verify", "relation", "--relation", "ftilde",
                 "--oracle", "sqrt-like:1", "--params", "0,1,1",
                 "--range", "32..60"])
    assert code == 0 and doc["result"] == "pass"


def test_verify_size_estimates_violation_band(capsys):
    # the closed-form upper estimate is known to fail near its stated start
    code, doc, _ = run_json(
        capsys, ["verify", "size-estimates", "--range", "7022..7100"])
    assert code == 1 and doc["result"] == "fail"
    assert doc["witness"]["m"] == 7022


def test_verify_size_estimates_clean_band(capsys):
    code, doc, _ = run_json(
        capsys, ["verify", "size-estimates", "--range", "8618..20000"])
    assert code == 0 and doc["result"] == "pass"


# -- emit-formula ---------------------------------------------------------------

def test_emit_formula_text(capsys):
    code, out, err = run(capsys, ["emit-formula", "ftilde",
                                  "--params", "0,1,1"])
    assert code == 0
    assert out.startswith("(") or out.startswith("exists")
    assert "relation ftilde(x; y)" in err


def test_emit_formula_json_envelope(capsys):
    code, doc, _ = run_json(capsys, ["emit-formula", "csquare",
                                     "--params", "0,1,1", "--json"])
    assert code == 0
    assert doc["relation"] == "csquare"
    assert doc["inputs"] == ["n"] and doc["output"] == "y"
    assert doc["metrics"]["equalities"] > 0
    assert any(h["kind"] == "functional-f-inverse"
               or h.get("kind") == "functional_f_inverse"
               for h in doc["hints"].values()) or doc["hints"]


def test_emit_formula_explicit_x0(capsys):
    code, out, _ = run(capsys, ["emit-formula", "ftilde",
                                "--params", "0,1,1", "--x0", "31"])
    assert code == 0 and out.strip()


# -- eval ------------------------------------------------------------------------

def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_eval_true_false(capsys, tmp_path):
    path = _write(tmp_path, "f.pq", "((x + 1) = y)")
    base = ["eval", "--formula", path, "--oracle", "sqrt-like:1"]
    code, doc, _ = run_json(capsys, base + ["--assign", "x=1,y=2"])
    assert code == 0 and doc["value"] is True
    code, doc, _ = run_json(capsys, base + ["--assign", "x=1,y=3"])
    assert code == 1 and doc["value"] is False


def test_eval_f_semantics(capsys, tmp_path):
    # F(x) = x * f(x); for the sqrt-like oracle f(8) = 4, so F(8) = 32
    path = _write(tmp_path, "f.pq", "(F(x) = y)")
    code, doc, _ = run_json(
        capsys, ["eval", "--formula", path, "--oracle", "sqrt-like:1",
                 "--assign", "x=8,y=32"])
    assert code == 0 and doc["value"] is True


def test_eval_exists_witness(capsys, tmp_path):
    path = _write(tmp_path, "f.pq",
                  "exists u <= y . ((u + u) = y)")
    code, doc, _ = run_json(
        capsys, ["eval", "--formula", path, "--oracle", "sqrt-like:1",
                 "--assign", "y=10"])
    assert code == 0 and doc["value"] is True
    assert {"var": "u", "value": 5} in doc["witnesses"]


def test_eval_parse_error(capsys, tmp_path):
    path = _write(tmp_path, "bad.pq", "(x + ) = y")
    code = cli.main(["eval", "--formula", path, "--oracle", "sqrt-like:1"])
    assert code == 64
    assert "parse error" in capsys.readouterr().err


def test_eval_unbounded_hint_is_inconclusive(capsys, tmp_path):
    path = _write(tmp_path, "u.pq", "exists u . (u = x)")
    code, out, _ = run(capsys, ["eval", "--formula", path,
                                "--oracle", "sqrt-like:1",
                                "--assign", "x=3"])
    assert code == 2 and "error" in json.loads(out)


def test_eval_json_envelope_round_trip(capsys, tmp_path):
    code, env_doc, _ = run_json(capsys, ["emit-formula", "ftilde",
                                         "--params", "0,1,1", "--json"])
    path = _write(tmp_path, "rel.json", json.dumps(env_doc))
    code, doc, _ = run_json(
        capsys, ["eval", "--formula", path, "--oracle", "sqrt-like:1",
                 "--assign", "x=50,y=10"])
    assert code == 0 and doc["value"] is True
    code, doc, _ = run_json(
        capsys, ["eval", "--formula", path, "--oracle", "sqrt-like:1",
                 "--assign", "x=50,y=11"])
    assert code == 1 and doc["value"] is False


def test_profile_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("PRIMEQUOT_PROFILE", "test")
    monkeypatch.delenv("PRIMEQUOT_SIEVE_LIMIT", raising=False)
    code, doc, _ = run_json(capsys, ["verify", "max-quotient"])
    assert code == 0 and doc["config"]["command"] == "verify"
