"""CLI commands, reports, exit codes, and the spec'd example runs."""

import json
import random

import pytest

from iwacong.cli import (
    CheckResult,
    Report,
    UsageError,
    cmd_k1_check,
    cmd_qexp_restrict,
    cmd_residue_symbols,
    cmd_trace_test,
    cmd_verify_congruence,
    main,
)
from iwacong.synth import (
    FIXED_POINT_DIAGNOSTIC,
    perturbed_family,
    synthetic_tower,
)
from iwacong.workspace import (
    _NameAllocator,
    document,
    family_sections,
    fixture_path,
    load_workspace,
    tower_sections,
)

PASS_WS = str(fixture_path("congruence_small"))
FAIL_WS = str(fixture_path("congruence_broken"))
K1_WS = str(fixture_path("k1_tower"))
PROBE_WS = str(fixture_path("trace_probes"))
QEXP_WS = str(fixture_path("qexp_cos9"))


def body(report: Report) -> list[str]:
    return report.body_lines()


class TestVerifyCongruence:
    def test_bundled_workspace_all_pass(self):
        ws = load_workspace(PASS_WS)
        report = cmd_verify_congruence(ws)
        assert report.ok and report.exit_code == 0
        assert len(report.checks) == 2
        assert all(c.verdict == "pass" for c in report.checks)
        assert report.checks[0].key == "congruence/main/000/b0"

    def test_empty_beta_range_gives_empty_report(self):
        ws = load_workspace(PASS_WS)
        report = cmd_verify_congruence(ws, betas=[])
        assert report.checks == []
        assert report.ok and report.exit_code == 0
        assert "summary checks=0 passed=0 failed=0" in body(report)

    def test_corrupted_fixture_fails_with_named_witness(self):
        ws = load_workspace(FAIL_WS)
        report = cmd_verify_congruence(ws)
        assert not report.ok and report.exit_code == 1
        (check,) = report.checks
        assert check.verdict == "fail"
        assert FIXED_POINT_DIAGNOSTIC in check.detail
        assert any(FIXED_POINT_DIAGNOSTIC in w for w in check.witness)
        assert any(w.startswith("residual ") for w in check.witness)

    def test_beta_filter_selects_declared_checks(self):
        ws = load_workspace(PASS_WS)
        report = cmd_verify_congruence(ws, betas=["b0"])
        assert len(report.checks) == 2  # both checks carry the label b0

    def test_unknown_beta_label_rejected(self):
        ws = load_workspace(PASS_WS)
        with pytest.raises(UsageError, match="no declared check"):
            cmd_verify_congruence(ws, betas=["b7"])

    def test_unknown_congruence_name_rejected(self):
        ws = load_workspace(PASS_WS)
        with pytest.raises(UsageError, match="no congruence"):
            cmd_verify_congruence(ws, congruence="other")

    def test_workspace_without_congruences_rejected(self):
        ws = load_workspace(PROBE_WS)
        with pytest.raises(UsageError, match="no congruence sections"):
            cmd_verify_congruence(ws)

    def test_free_witness_reported_for_passing_checks(self):
        ws = load_workspace(PASS_WS)
        report = cmd_verify_congruence(ws)
        assert any(w.startswith("free-part ")
                   for c in report.checks for w in c.witness)


class TestDeterminism:
    def test_body_is_reproducible(self):
        first = body(cmd_verify_congruence(load_workspace(PASS_WS)))
        second = body(cmd_verify_congruence(load_workspace(PASS_WS)))
        assert first == second

    def test_text_differs_only_in_timing(self):
        a = cmd_verify_congruence(load_workspace(PASS_WS)).text().splitlines()
        b = cmd_verify_congruence(load_workspace(PASS_WS)).text().splitlines()
        assert a[:-1] == b[:-1]
        assert a[-1].startswith("timing ") and b[-1].startswith("timing ")

    def test_jsonl_body_is_reproducible(self):
        a = cmd_verify_congruence(load_workspace(PASS_WS)).jsonl().splitlines()
        b = cmd_verify_congruence(load_workspace(PASS_WS)).jsonl().splitlines()
        assert a[:-1] == b[:-1]
        assert json.loads(a[-1])["record"] == "timing"

    def test_thread_count_does_not_change_the_body(self, monkeypatch):
        base = body(cmd_verify_congruence(load_workspace(PASS_WS)))
        monkeypatch.setenv("IWACONG_THREADS", "3")
        pooled = body(cmd_verify_congruence(load_workspace(PASS_WS)))
        assert pooled == base

    def test_invalid_thread_count_is_an_input_error(self, monkeypatch):
        monkeypatch.setenv("IWACONG_THREADS", "zero")
        with pytest.raises(UsageError, match="IWACONG_THREADS"):
            cmd_verify_congruence(load_workspace(PASS_WS))
        monkeypatch.setenv("IWACONG_THREADS", "0")
        with pytest.raises(UsageError, match="at least 1"):
            cmd_verify_congruence(load_workspace(PASS_WS))

    def test_checks_sorted_by_key(self):
        report = Report(command="x")
        report.checks = [CheckResult("b", "pass", ""), CheckResult("a", "fail", "")]
        report.finish(0.0)
        assert [c.key for c in report.checks] == ["a", "b"]
        lines = body(report)
        assert lines.index("check a fail ") < lines.index("check b pass ")


class TestResidueSymbols:
    def test_spec_run_all_pass(self):
        report = cmd_residue_symbols(3, 2, 2, 23, 200)
        assert report.ok
        assert len(report.checks) == 43  # primes to 200 minus {2, 3, 23}
        assert all(c.verdict == "pass" for c in report.checks)
        assert any("skipped ell=23" in n for n in report.notices)

    def test_bound_below_smallest_admissible_prime(self):
        report = cmd_residue_symbols(3, 2, 2, 23, 4)
        assert report.checks == []
        assert report.ok and report.exit_code == 0
        assert any("skipped ell=2" in n for n in report.notices)
        assert any("skipped ell=3" in n for n in report.notices)

    def test_perfect_cube_symbols_trivial(self):
        report = cmd_residue_symbols(3, 2, 8, 23, 60)
        assert report.ok and len(report.checks) == 14
        for c in report.checks:
            assert "exp_low=0" in c.detail
            assert "lhs=0 rhs=0" in c.detail

    def test_non_split_prime_rejected(self):
        # kronecker(disc(Q(sqrt(-1))), 3) = -1
        with pytest.raises(UsageError, match="does not split"):
            cmd_residue_symbols(3, 2, 2, 1, 100)

    def test_ramified_prime_rejected(self):
        with pytest.raises(UsageError, match="ramifies"):
            cmd_residue_symbols(3, 2, 2, 3, 100)

    def test_bad_field_parameters_rejected(self):
        with pytest.raises(UsageError, match="squarefree"):
            cmd_residue_symbols(3, 2, 2, 12, 100)
        with pytest.raises(UsageError, match="odd prime"):
            cmd_residue_symbols(2, 2, 2, 23, 100)

    def test_bad_levels_and_arguments_rejected(self):
        with pytest.raises(UsageError, match="r >= 2"):
            cmd_residue_symbols(3, 1, 2, 23, 100)
        with pytest.raises(UsageError, match="nonzero"):
            cmd_residue_symbols(3, 2, 0, 23, 100)
        with pytest.raises(UsageError, match="bound"):
            cmd_residue_symbols(3, 2, 2, 23, 1)

    def test_keys_zero_padded_to_the_bound_width(self):
        report = cmd_residue_symbols(3, 2, 2, 23, 200)
        assert report.checks[0].key == "ell/005"
        assert report.checks == sorted(report.checks, key=lambda c: c.key)


class TestK1Check:
    def test_bundled_families_pass(self):
        report = cmd_k1_check(load_workspace(K1_WS))
        assert report.ok
        assert [c.key for c in report.checks] == [
            "k1/bumped/MS1", "k1/bumped/MS2", "k1/bumped/MS3",
            "k1/trivial/MS1", "k1/trivial/MS2", "k1/trivial/MS3"]
        assert any("level0=unit" in n for n in report.notices)

    def test_family_selection(self):
        report = cmd_k1_check(load_workspace(K1_WS), family="trivial")
        assert len(report.checks) == 3
        assert all(c.key.startswith("k1/trivial/") for c in report.checks)

    def test_unknown_family_rejected(self):
        with pytest.raises(UsageError, match="no family"):
            cmd_k1_check(load_workspace(K1_WS), family="ghost")

    def test_workspace_without_families_rejected(self):
        with pytest.raises(UsageError, match="no measure families"):
            cmd_k1_check(load_workspace(PROBE_WS))

    @pytest.mark.parametrize("which", ["MS1", "MS2", "MS3"])
    def test_broken_family_fails_the_intended_condition(self, which, tmp_path):
        tower = synthetic_tower(3, 2, 2)
        fam = perturbed_family(tower, random.Random(4), which)
        names = _NameAllocator()
        towers = tower_sections("T", tower, names)
        text = document(3, 2, 4,
                        names.prelude() + towers + family_sections("bad", "T", fam))
        path = tmp_path / "bad.ws"
        path.write_text(text, encoding="utf-8")
        report = cmd_k1_check(load_workspace(path))
        verdicts = {c.key.rsplit("/", 1)[1]: c.verdict for c in report.checks}
        assert verdicts[which] == "fail"
        assert sum(v == "fail" for v in verdicts.values()) == 1
        failing = next(c for c in report.checks if c.verdict == "fail")
        assert failing.witness  # the failure message names the level


class TestTraceTest:
    def test_bundled_probes_match_embedded_verdicts(self):
        report = cmd_trace_test(load_workspace(PROBE_WS))
        assert report.ok
        assert len(report.checks) == 5
        assert {c.key for c in report.checks} == {
            "trace/traced-unit", "trace/p-multiple", "trace/orbit-sum",
            "trace/free-delta", "trace/bare-identity"}

    def test_inside_probes_show_zero_residual(self):
        report = cmd_trace_test(load_workspace(PROBE_WS))
        for c in report.checks:
            if "inside" in c.detail.split("expected")[1]:
                assert c.witness == ("residual 0",)

    def test_element_selection(self):
        report = cmd_trace_test(load_workspace(PROBE_WS), element="orbit-sum")
        assert [c.key for c in report.checks] == ["trace/orbit-sum"]

    def test_unknown_element_rejected(self):
        with pytest.raises(UsageError, match="no probe"):
            cmd_trace_test(load_workspace(PROBE_WS), element="ghost")

    def test_wrong_expectation_fails(self, tmp_path):
        text = open(PROBE_WS, encoding="utf-8").read()
        flipped = text.replace("begin probe free-delta\n  action act0\n"
                               "  element (1)=1\n  expect outside",
                               "begin probe free-delta\n  action act0\n"
                               "  element (1)=1\n  expect inside")
        assert flipped != text
        path = tmp_path / "flipped.ws"
        path.write_text(flipped, encoding="utf-8")
        report = cmd_trace_test(load_workspace(path))
        assert not report.ok
        failing = next(c for c in report.checks if c.verdict == "fail")
        assert failing.key == "trace/free-delta"
        assert "expected inside" in failing.detail


class TestQexpRestrict:
    def test_bundled_expansion_matches_expectations(self):
        report = cmd_qexp_restrict(load_workspace(QEXP_WS))
        assert report.ok
        keys = [c.key for c in report.checks]
        assert "qexp/cos9-demo/support" in keys
        assert "qexp/cos9-demo/(1)" in keys

    def test_wrong_expected_coefficient_fails(self, tmp_path):
        text = open(QEXP_WS, encoding="utf-8").read()
        broken = text.replace("expect (1) = ", "expect (1) = (0)=1 ", 1)
        path = tmp_path / "broken.ws"
        path.write_text(broken, encoding="utf-8")
        report = cmd_qexp_restrict(load_workspace(path))
        assert not report.ok
        failing = [c for c in report.checks if c.verdict == "fail"]
        assert any(c.key == "qexp/cos9-demo/(1)" for c in failing)

    def test_expansion_without_expectations_reports_coefficients(self, tmp_path):
        text = open(QEXP_WS, encoding="utf-8").read()
        stripped = "\n".join(l for l in text.splitlines()
                             if not l.strip().startswith("expect"))
        path = tmp_path / "noexpect.ws"
        path.write_text(stripped, encoding="utf-8")
        report = cmd_qexp_restrict(load_workspace(path))
        assert report.ok
        (check,) = report.checks
        assert check.key == "qexp/cos9-demo"
        assert any(w.startswith("coefficient (1,)") for w in check.witness)

    def test_unknown_expansion_rejected(self):
        with pytest.raises(UsageError, match="no expansion"):
            cmd_qexp_restrict(load_workspace(QEXP_WS), expansion="ghost")


class TestMainEntryPoint:
    def test_pass_run_exit_zero(self, capsys):
        assert main(["verify-congruence", PASS_WS]) == 0
        out = capsys.readouterr().out
        assert "result pass" in out and "iwacong-report 1" in out

    def test_fail_run_exit_one(self, capsys):
        assert main(["verify-congruence", FAIL_WS]) == 1
        assert FIXED_POINT_DIAGNOSTIC in capsys.readouterr().out

    def test_malformed_workspace_exit_two_no_partial_output(self, capsys, tmp_path):
        bad = tmp_path / "bad.ws"
        bad.write_text("iwacong-workspace 1\nprime 3\nprecision 2\nseed 0\n"
                       "begin group G\n  invariants 7 3\nend\n",
                       encoding="utf-8")
        assert main(["verify-congruence", str(bad)]) == 2
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "error: line 6" in captured.err

    def test_bundled_prefix_resolution(self, capsys):
        assert main(["trace-test", "bundled:trace_probes"]) == 0
        assert main(["trace-test", "bundled:missing"]) == 2
        assert "no bundled workspace" in capsys.readouterr().err

    def test_empty_betas_flag(self, capsys):
        assert main(["verify-congruence", PASS_WS, "--betas", ""]) == 0
        assert "summary checks=0" in capsys.readouterr().out

    def test_jsonl_format(self, capsys):
        assert main(["qexp-restrict", QEXP_WS, "--format", "jsonl"]) == 0
        rows = [json.loads(line) for line in
                capsys.readouterr().out.strip().splitlines()]
        assert rows[0]["record"] == "header"
        assert rows[0]["prime"] == 3
        assert rows[-1]["record"] == "timing"
        summary = next(r for r in rows if r["record"] == "summary")
        assert summary["ok"] is True

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "report.txt"
        assert main(["k1-check", K1_WS, "--out", str(target)]) == 0
        assert capsys.readouterr().out == ""
        assert "result pass" in target.read_text(encoding="utf-8")

    def test_residue_symbols_arguments(self, capsys):
        assert main(["residue-symbols", "-p", "3", "-r", "2", "-m", "2",
                     "-D", "23", "--bound", "60"]) == 0
        assert "check ell/05 pass" in capsys.readouterr().out
        assert main(["residue-symbols", "-p", "3", "-r", "2", "-m", "2",
                     "-D", "1", "--bound", "60"]) == 2
        assert "does not split" in capsys.readouterr().err

    def test_report_body_byte_identical_across_runs(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert main(["verify-congruence", PASS_WS, "--format", "jsonl",
                     "--out", str(a)]) == 0
        assert main(["verify-congruence", PASS_WS, "--format", "jsonl",
                     "--out", str(b)]) == 0
        body_a = a.read_bytes().rsplit(b"\n", 2)[0]
        body_b = b.read_bytes().rsplit(b"\n", 2)[0]
        assert body_a == body_b
