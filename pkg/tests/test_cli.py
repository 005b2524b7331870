import json

import pytest

from reldubois.cli import (
    CheckEntry,
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_USAGE,
    Report,
    ScenarioError,
    emit_report,
    main,
    parse_scenario,
    run_scenario,
)
from reldubois.dubois import Finding

ALL_SMOOTH = ("model = smooth_plane\nD = 2\np_min = -2\nchecks = ses, subcomplex, assoc_graded, "
              "abs_to_rel, stationary, functorial, fiber_restriction\n")


def test_parse_defaults():
    s = parse_scenario(b"model = smooth_plane\nD = 2\nchecks = ses,subcomplex")
    assert s.p_min == -1
    assert s.checks == ("ses", "subcomplex")
    assert s.format == "text"


def test_parse_d_too_small():
    with pytest.raises(ScenarioError) as err:
        parse_scenario(b"model = smooth_plane\nD = 1\nchecks = ses")
    assert err.value.problems == ["line 2: D must be >= 2"]


def test_parse_stationary_cross_field():
    with pytest.raises(ScenarioError, match="stationary requires p_min <= -2"):
        parse_scenario(b"model = smooth_plane\nchecks = stationary\np_min = -1")


def test_parse_lists_every_problem():
    text = b"# header\nmodel = cubic\nD = two\nbogus = 1\nchecks = ses, nope\n"
    with pytest.raises(ScenarioError) as err:
        parse_scenario(text)
    probs = err.value.problems
    assert "line 4: unknown key 'bogus'" in probs
    assert any(p.startswith("line 2: model") for p in probs)
    assert any(p.startswith("line 3: D must be an integer") for p in probs)
    assert "line 5: unknown check 'nope'" in probs


def test_parse_empty_checks():
    with pytest.raises(ScenarioError, match="nonempty"):
        parse_scenario("model = nodal_union\nchecks = ,")


def test_parse_fiber_needs_smooth():
    with pytest.raises(ScenarioError, match="fiber_restriction"):
        parse_scenario("model = nodal_union\nchecks = fiber_restriction")


def test_smooth_all_checks_pass():
    r = run_scenario(parse_scenario(ALL_SMOOTH))
    assert r.verdict == "pass"
    assert [c.name for c in r.checks][0] == "ses"


def test_nodal_ses_subcomplex_pass():
    r = run_scenario(parse_scenario("model = nodal_union\nD = 2\nchecks = ses, subcomplex"))
    assert r.verdict == "pass"


def test_nodal_stationary_is_observed():
    r = run_scenario(parse_scenario("model = nodal_union\np_min = -2\nchecks = stationary"))
    (entry,) = r.checks
    assert entry.results[0].status == "observed"
    assert r.verdict == "pass"


def test_custom_bad_complex(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps(
        {"dims": {"0": 1, "1": 1, "2": 1}, "d": {"0": [["1"]], "1": [["1"]]}}))
    r = run_scenario(parse_scenario(f"model = custom\nsource = {tmp_path / 'c.json'}\nchecks = ses"))
    assert r.verdict == "fail"
    assert r.checks[0].name == "validate_complex"


def test_custom_good_complex(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps(
        {"dims": {"0": 1, "1": 1}, "d": {"0": [["1"]]},
         "reference": {"-1": {"dims": {"0": 1, "1": 1}}, "0": {"dims": {"0": 1}}}}))
    text = (f"model = custom\nsource = {tmp_path / 'c.json'}\n"
            "checks = ses, subcomplex, assoc_graded, abs_to_rel, functorial")
    r = run_scenario(parse_scenario(text))
    assert r.verdict == "pass", emit_report(r).decode()


def test_missing_custom_file_is_a_failed_entry():
    r = run_scenario(parse_scenario("model = custom\nsource = /nonexistent.json\nchecks = ses"))
    assert r.verdict == "fail"


def test_json_is_deterministic_modulo_timing():
    s = parse_scenario("model = nodal_union\nchecks = ses, subcomplex, functorial\nformat = json")

    def strip(doc):
        for c in doc["checks"]:
            c.pop("ms")
        return doc

    a = strip(json.loads(emit_report(run_scenario(s), "json")))
    b = strip(json.loads(emit_report(run_scenario(s), "json")))
    assert a == b
    assert list(a) == ["scenario", "checks", "verdict"]
    assert list(a["checks"][0]) == ["name", "results"]
    assert list(a["checks"][0]["results"][0]) == ["p", "status", "evidence"]


def test_exit_codes_from_report():
    ok = Report({}, [CheckEntry("x", [Finding(0, True)], 0.0)])
    bad = Report({}, [CheckEntry("x", [Finding(0, False)], 0.0)])
    assert ok.exit_code == EXIT_PASS and bad.exit_code == EXIT_FAIL


def test_main_run(tmp_path, capsys):
    sc = tmp_path / "s.txt"
    sc.write_text("model = nodal_union\nchecks = ses\n")
    assert main(["run", str(sc)]) == EXIT_PASS
    assert "verdict: pass" in capsys.readouterr().out
    out = tmp_path / "r.json"
    assert main(["run", str(sc), "--format", "json", "--out", str(out)]) == EXIT_PASS
    assert json.loads(out.read_text())["verdict"] == "pass"


def test_main_usage_errors(tmp_path, capsys):
    assert main(["frobnicate"]) == EXIT_USAGE
    sc = tmp_path / "s.txt"
    sc.write_text("model = smooth_plane\nD = 1\nchecks = ses\n")
    assert main(["run", str(sc)]) == EXIT_USAGE
    assert "line 2: D must be >= 2" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.txt")]) == EXIT_USAGE


def test_selftest(capsys):
    assert main(["selftest"]) == EXIT_PASS
