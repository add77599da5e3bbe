"""Command line contract: report schema, exit codes, determinism, examples.

The three pinned invocations (windowed A1 roots, the n = 6 pairing matrix,
the multinomial suite at max 4) are checked against hand counts and the
case split rule; plumbing tests cover config merging, fraction rendering,
and the 0/1/2 exit code split.
"""

import json
import re
from fractions import Fraction as F

import pytest

from affinekit.cli import main


def run_cli(tmp_path, *args, name="report.json"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, out.read_text() if out.exists() else None


def load(text):
    return json.loads(text)


# ------------------------------------------------------------- examples


def test_roots_example_counts(tmp_path):
    code, text = run_cli(tmp_path, "roots", "--algebra", "A1x1", "--window=-2:2")
    assert code == 0
    doc = load(text)
    assert doc["schema_version"] == 1
    assert doc["command"] == "roots"
    recs = {r["name"]: r for r in doc["records"]}
    assert recs["real_count"]["actual"] == 10
    assert recs["imaginary_count"]["actual"] == 4
    listed = [n for n in recs if n.startswith("root ")]
    assert len(listed) == 14


def test_roots_csv_table(tmp_path):
    code, text = run_cli(tmp_path, "roots", "--format", "csv", name="roots.csv")
    assert code == 0
    lines = text.strip().split("\n")
    assert lines[0].startswith("# affinekit-report roots generated ")
    assert lines[1] == "# table roots"
    assert lines[2] == "kind,fin0,n,mult"
    assert len(lines) == 3 + 14


def test_prop42_example_case_split(tmp_path):
    code, text = run_cli(tmp_path, "prop42", "--n", "6", "--lambda", "1", name="m.csv")
    assert code == 0
    lines = text.strip().split("\n")
    assert lines[1] == "# table pairing_matrix"
    body = [line.split(",") for line in lines[3:]]
    assert len(body) == 5
    n, lam = 6, F(1)
    for row in body:
        k = int(row[0])
        for l, cell in enumerate(row[1:], start=1):
            if l > k and n < k + l:
                want = 4 * lam
            elif l <= k and n >= k + l:
                want = -4 * lam
            else:
                want = F(0)
            assert F(cell) == want, (k, l)


def test_prop42_json_records(tmp_path):
    code, text = run_cli(tmp_path, "prop42", "--n", "5", "--format", "json")
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["case_split"]["status"] == "pass"
    assert recs["corner_submatrix_invertible"]["status"] == "pass"
    assert recs["weight_dim_lower_bound"]["actual"] == 2


def test_identities_multinomial_all_pass(tmp_path):
    code, text = run_cli(tmp_path, "identities", "--suite", "multinomial", "--max", "4")
    assert code == 0
    recs = load(text)["records"]
    # N in 0..4, K in 0..5, k in 1..3
    assert len(recs) == 5 * 6 * 3
    assert all(r["status"] == "pass" for r in recs)


def test_identities_localization_dense(tmp_path):
    code, text = run_cli(tmp_path, "identities", "--suite", "localization",
                         "--samples", "4", "--seed", "11")
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    for name in ("twist_composition", "integer_twist_is_conjugation",
                 "inverse_power_law", "twist_respects_brackets"):
        assert recs[name]["status"] == "pass", name


def test_identities_localization_loop(tmp_path):
    code, text = run_cli(tmp_path, "identities", "--suite", "localization",
                         "--target", "loop", "--samples", "2", "--seed", "5")
    assert code == 0
    assert all(r["status"] != "fail" for r in load(text)["records"])


def test_identities_efloc(tmp_path):
    code, text = run_cli(tmp_path, "identities", "--suite", "efloc",
                         "--samples", "4", "--seed", "2")
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["lowering_product_walk"]["status"] == "pass"


# ------------------------------------------------------------ exit codes


def test_unknown_command_is_input_error(tmp_path, capsys):
    assert main(["no-such-command"]) == 1
    assert "invalid choice" in capsys.readouterr().err


def test_malformed_values_are_input_errors(tmp_path):
    assert main(["roots", "--window", "junk", "--out", str(tmp_path / "x")]) == 1
    assert main(["prop42", "--n", "1", "--out", str(tmp_path / "y")]) == 1
    assert main(["localize-demo", "--x", "a/b", "--out", str(tmp_path / "z")]) == 1


def test_csv_needs_a_table(tmp_path):
    assert main(["identities", "--format", "csv", "--out", str(tmp_path / "x")]) == 1


def test_verification_failure_exits_two(tmp_path):
    # two dense factors grow without bound, so expecting bounded must fail
    code, text = run_cli(
        tmp_path, "probe-bounded",
        "--factors", "dense:1/2:3,dense:1/3:2", "--expect", "bounded",
    )
    assert code == 2
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["dichotomy"]["status"] == "fail"
    assert recs["bounded"]["actual"] is False


def test_dichotomy_passes_when_expected(tmp_path):
    code, text = run_cli(
        tmp_path, "probe-bounded",
        "--factors", "dense:1/2:3,dense:1/3:2", "--expect", "increasing",
    )
    assert code == 0
    code, _ = run_cli(tmp_path, "probe-bounded", "--expect", "bounded", name="b.json")
    assert code == 0


def test_band_exhaustion_is_input_error(tmp_path, capsys):
    # a window too small for the requested twist surfaces as exit 1 with the
    # offending parameters, never a traceback
    code = main(["localize-demo", "--x", "1/2", "--jwindow=0:0",
                 "--out", str(tmp_path / "x")])
    assert code == 1
    err = capsys.readouterr().err
    assert "localize-demo" in err


# ------------------------------------------------------------ determinism


def test_rerun_byte_identical_modulo_stamp(tmp_path):
    _, a = run_cli(tmp_path, "cone-certificate", "--seed", "3", name="a.json")
    _, b = run_cli(tmp_path, "cone-certificate", "--seed", "3", name="b.json")
    strip = lambda t: [l for l in t.split("\n") if '"generated"' not in l]
    assert strip(a) == strip(b)


def test_rerun_csv_byte_identical_modulo_stamp(tmp_path):
    _, a = run_cli(tmp_path, "prop42", name="a.csv")
    _, b = run_cli(tmp_path, "prop42", name="b.csv")
    assert a.split("\n")[1:] == b.split("\n")[1:]
    assert a.split("\n")[0].startswith("# affinekit-report prop42 generated ")


def test_seed_changes_are_echoed(tmp_path):
    _, a = run_cli(tmp_path, "parabolic-classify", "--samples", "5", "--seed", "7")
    doc = load(a)
    assert doc["config_echo"]["seed"] == 7
    _, b = run_cli(tmp_path, "parabolic-classify", "--samples", "5", "--seed", "7",
                   name="b.json")
    assert load(b)["records"] == doc["records"]


# ----------------------------------------------------------- config file


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"algebra": "A1x1", "window": "-1:1"}))
    code, text = run_cli(tmp_path, "roots", "--config", str(cfg))
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["real_count"]["actual"] == 6
    assert recs["imaginary_count"]["actual"] == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"window": "-1:1", "lambda": "2"}))
    code, text = run_cli(tmp_path, "roots", "--config", str(cfg), "--window=-2:2")
    assert code == 1  # lambda is not a roots key
    cfg.write_text(json.dumps({"window": "-1:1"}))
    code, text = run_cli(tmp_path, "roots", "--config", str(cfg), "--window=-2:2")
    assert code == 0
    assert load(text)["config_echo"]["window"] == "-2:2"


def test_config_lambda_spelling(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 5, "lambda": "2"}))
    code, text = run_cli(tmp_path, "prop42", "--config", str(cfg), "--format", "json")
    assert code == 0
    echo = load(text)["config_echo"]
    assert echo["n"] == 5
    assert echo["lam"] == "2"


# ------------------------------------------------------------- rendering


def test_fractions_rendered_exactly(tmp_path):
    code, text = run_cli(tmp_path, "localize-demo", "--x", "1/3", "--b", "1/2")
    assert code == 0
    doc = load(text)
    assert doc["config_echo"]["x"] == "1/3"
    # no decimal anywhere in the report
    assert re.search(r"\d+\.\d+", text) is None


def test_csv_fractions(tmp_path):
    code, text = run_cli(tmp_path, "localize-demo", "--x", "1/2", "--format", "csv",
                         name="d.csv")
    assert code == 0
    assert "/" in text.split("# table after")[1]
    assert re.search(r"\d+\.\d+", text) is None


def test_threads_env_is_validated_and_echoed(tmp_path, monkeypatch):
    monkeypatch.setenv("AFFINEKIT_THREADS", "3")
    code, text = run_cli(tmp_path, "roots")
    assert code == 0
    assert load(text)["config_echo"]["threads"] == 3
    monkeypatch.setenv("AFFINEKIT_THREADS", "0")
    assert main(["roots", "--out", str(tmp_path / "x.json")]) == 1


# ------------------------------------------------------------- commands


def test_algebra_info_twisted(tmp_path):
    code, text = run_cli(tmp_path, "algebra-info", "--algebra", "A2x2")
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["twist_order"]["actual"] == 2
    assert recs["heisenberg_window"]["status"] == "pass"


def test_cone_certificate_defaults(tmp_path):
    code, text = run_cli(tmp_path, "cone-certificate")
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["coefficients_positive"]["status"] == "pass"
    assert recs["delta_decomposition"]["status"] == "pass"
    assert recs["scaled_lattice_membership"]["status"] == "pass"


def test_cone_certificate_rejects_non_standard(tmp_path, capsys):
    code = main(["cone-certificate", "--algebra", "A1x1", "--phi1", "1,0",
                 "--out", str(tmp_path / "x.json")])
    assert code == 1
    assert "standard" in capsys.readouterr().err


def test_parabolic_classify_single_flag(tmp_path):
    code, text = run_cli(tmp_path, "parabolic-classify", "--algebra", "A1x1",
                         "--phi1", "1,3")
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["tag"]["actual"] == "standard"
    assert recs["window_doubling_stable"]["status"] == "pass"


def test_shadow_expectations(tmp_path):
    code, text = run_cli(tmp_path, "shadow", "--module", "loop-dense",
                         "--fin", "2", "--n", "0", "--window=-3:3",
                         "--expect", "i")
    assert code == 0
    code, _ = run_cli(tmp_path, "shadow", "--module", "loop-dense",
                      "--fin", "2", "--n", "0", "--window=-3:3",
                      "--expect", "f", name="f.json")
    assert code == 2


def test_pm_build_imverma(tmp_path):
    code, text = run_cli(tmp_path, "pm-build")
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["tag"]["actual"] == "imaginary"
    assert recs["axioms"]["status"] == "pass"


def test_loop_mult_natural_a2(tmp_path):
    code, text = run_cli(tmp_path, "loop-mult", "--algebra", "A2x1",
                         "--factors", "natural", "--scalars", "2",
                         "--window=-2:2")
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["bracket_compat"]["status"] == "pass"
    assert recs["labels"]["actual"] == 3 * 5


def test_imverma_mult_vacuum_line(tmp_path):
    code, text = run_cli(tmp_path, "imverma-mult", "--lambda", "3", "--depth", "2")
    assert code == 0
    recs = {r["name"]: r for r in load(text)["records"]}
    assert recs["vacuum_line"]["status"] == "pass"
