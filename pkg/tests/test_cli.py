"""Command-line behaviour: outputs, formats, exit codes, configuration."""

import json

import pytest
from click.testing import CliRunner

from arczeta.branch import BranchSpec, characteristic_sequence, p_ar
from arczeta.cli import main
from arczeta.counting import CountReport
from arczeta.ratseries import rs_equal, rs_from_json
from arczeta.verifier import VerificationPlan


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def files(tmp_path):
    paths = {}
    for name, b in {
        "cusp": BranchSpec.make(2, {3: 1}),
        "line": BranchSpec.make(1, {}),
        "std4": BranchSpec.make(4, {6: 1, 7: 1}),
    }.items():
        f = tmp_path / f"{name}.json"
        f.write_text(json.dumps(b.to_json()))
        paths[name] = str(f)
    paths["dir"] = tmp_path
    return paths


def message(result):
    try:
        return result.output + result.stderr
    except (ValueError, AttributeError):
        return result.output


class TestBranchCommand:
    def test_text_output(self, runner, files):
        r = runner.invoke(main, ["branch", "--input", files["cusp"]])
        assert r.exit_code == 0
        assert "beta: [2; 3]" in r.output
        assert "poles in (-1,0): -1/3" in r.output
        assert "recovered exponents: [3]" in r.output

    def test_normalized_smooth_series(self, runner, files):
        r = runner.invoke(main, ["branch", "--input", files["line"], "--normalize"])
        assert r.exit_code == 0
        assert r.output.count("1 / [(1 - L*T)]") == 2

    def test_json_round_trips(self, runner, files):
        r = runner.invoke(main, ["branch", "--input", files["std4"], "--format", "json"])
        assert r.exit_code == 0
        payload = json.loads(r.output)
        assert payload["beta"] == [4, 6, 7]
        assert payload["e"] == [4, 2, 1] and payload["N"] == [1, 2, 4]
        assert set(payload["poles"]) == {"-1/3", "-3/7"}
        assert payload["recovered_exponents"] == [6, 7]
        expect = p_ar(characteristic_sequence(BranchSpec.make(4, {6: 1, 7: 1})))
        assert rs_equal(rs_from_json(payload["p_ar"]), expect)

    def test_latex_format(self, runner, files):
        r = runner.invoke(main, ["branch", "--input", files["cusp"], "--format", "latex"])
        assert r.exit_code == 0
        assert "\\frac" in r.output

    def test_malformed_json_exits_1(self, runner, files):
        bad = files["dir"] / "bad.json"
        bad.write_text("{ not json")
        r = runner.invoke(main, ["branch", "--input", str(bad)])
        assert r.exit_code == 1

    def test_missing_file_exits_1(self, runner, files):
        r = runner.invoke(main, ["branch", "--input", str(files["dir"] / "absent.json")])
        assert r.exit_code == 1


class TestCountCommand:
    def test_branch_csv_nine_rows(self, runner, files):
        r = runner.invoke(main, ["count", "--branch", files["std4"], "-p", "5", "--n-max", "8", "--format", "csv"])
        assert r.exit_code == 0
        lines = r.output.strip().splitlines()
        assert lines[0] == "n,count,method,seconds"
        assert len(lines) == 10
        counts = [int(line.split(",")[1]) for line in lines[1:]]
        assert counts == [1, 1, 1, 1, 2, 6, 51, 501, 2502]

    def test_n_max_zero_single_row(self, runner, files):
        r = runner.invoke(main, ["count", "--branch", files["line"], "-p", "3", "--n-max", "0", "--format", "csv"])
        assert r.exit_code == 0
        assert len(r.output.strip().splitlines()) == 2

    def test_json_round_trips(self, runner, files):
        r = runner.invoke(main, ["count", "--branch", files["cusp"], "-p", "7", "--n-max", "3", "--format", "json"])
        assert r.exit_code == 0
        report = CountReport.from_json(json.loads(r.output))
        assert report.counts() == {0: 1, 1: 1, 2: 4, 3: 43}

    def test_poly_mode_fixed_depth(self, runner, files):
        r = runner.invoke(
            main,
            ["count", "--poly", "x1^2 - x2^3", "--origin", "-p", "7", "--n-max", "4", "--depth", "6", "--format", "csv"],
        )
        assert r.exit_code == 0
        lines = r.output.strip().splitlines()[1:]
        counts = [int(line.split(",")[1]) for line in lines]
        methods = [line.split(",")[2] for line in lines]
        assert counts == [1, 1, 4, 43, 301]
        assert methods[:4] == ["hensel-certified"] * 4
        assert methods[4] == "stabilized-uncertified"

    def test_poly_mode_default_depth_certifies(self, runner, files):
        r = runner.invoke(main, ["count", "--poly", "x^2 - y^3", "--origin", "-p", "7", "--n-max", "4", "--format", "csv"])
        assert r.exit_code == 0
        lines = r.output.strip().splitlines()[1:]
        assert [int(line.split(",")[1]) for line in lines] == [1, 1, 4, 43, 298]
        assert all(line.split(",")[2] == "hensel-certified" for line in lines)

    def test_deterministic_output(self, runner, files):
        args = ["count", "--branch", files["cusp"], "-p", "7", "--n-max", "4", "--format", "json"]
        assert runner.invoke(main, args).output == runner.invoke(main, args).output

    def test_input_validation(self, runner, files):
        assert runner.invoke(main, ["count", "-p", "5"]).exit_code == 1  # neither input
        r = runner.invoke(main, ["count", "--branch", files["cusp"], "--poly", "x", "-p", "5"])
        assert r.exit_code == 1  # both inputs
        assert runner.invoke(main, ["count", "--branch", files["cusp"]]).exit_code == 1  # no prime
        r = runner.invoke(main, ["count", "--branch", files["cusp"], "-p", "4"])
        assert r.exit_code == 1  # not a prime

    def test_budget_exhaustion_is_input_error(self, runner, files):
        r = runner.invoke(
            main,
            ["count", "--branch", files["std4"], "-p", "13", "--n-max", "8", "--no-window", "--budget", "1000"],
        )
        assert r.exit_code == 1
        assert "budget" in message(r)


class TestPresburgerCommand:
    def test_qe(self, runner):
        r = runner.invoke(main, ["presburger", "qe", "E y. x = 2*y"])
        assert r.exit_code == 0
        assert r.output.strip() == "x == 0 mod 2"

    def test_qe_json(self, runner):
        r = runner.invoke(main, ["presburger", "qe", "E y. x = 2*y", "--format", "json"])
        assert json.loads(r.output)["result"] == "x == 0 mod 2"

    def test_qe_syntax_error(self, runner):
        assert runner.invoke(main, ["presburger", "qe", "x >="]).exit_code == 1

    def test_qe_undeclared_variable(self, runner):
        r = runner.invoke(main, ["presburger", "qe", "x + y >= 0", "--var", "x"])
        assert r.exit_code == 1

    def test_sum(self, runner):
        r = runner.invoke(main, ["presburger", "sum", "--set", "n >= 4 & n == 0 mod 4", "--tweight", "n"])
        assert r.exit_code == 0
        assert r.output.strip() == "T^4 / [(1 - T^4)]"

    def test_sum_with_lweight(self, runner):
        r = runner.invoke(
            main,
            ["presburger", "sum", "--set", "l >= 1", "--tweight", "6*l", "--lweight", "2*l - 2"],
        )
        assert r.exit_code == 0
        assert "T^6" in r.output

    def test_sum_divergent_exits_1(self, runner):
        r = runner.invoke(main, ["presburger", "sum", "--set", "n >= 0", "--tweight", "0"])
        assert r.exit_code == 1

    def test_check(self, runner):
        assert runner.invoke(main, ["presburger", "check", "E y. x = 2*y", "--point", "x=6"]).output.strip() == "true"
        assert runner.invoke(main, ["presburger", "check", "E y. x = 2*y", "--point", "x=7"]).output.strip() == "false"

    def test_check_missing_assignment(self, runner):
        r = runner.invoke(main, ["presburger", "check", "x + y >= 0", "--point", "x=1"])
        assert r.exit_code == 1

    def test_check_bad_point_syntax(self, runner):
        r = runner.invoke(main, ["presburger", "check", "x >= 0", "--point", "x:1"])
        assert r.exit_code == 1


class TestIgusaCommand:
    def test_series_only(self, runner):
        r = runner.invoke(main, ["igusa", "-k", "1", "-k", "1"])
        assert r.exit_code == 0
        assert "L^-1" in r.output

    def test_checked_at_prime(self, runner):
        r = runner.invoke(main, ["igusa", "-k", "2", "-p", "5", "--n-max", "4"])
        assert r.exit_code == 0
        assert "summary: pass" in r.output

    def test_bad_exponent(self, runner):
        assert runner.invoke(main, ["igusa", "-k", "0"]).exit_code == 1


class TestVerifyCommand:
    def plan_file(self, tmp_path, plan, name="plan.json"):
        f = tmp_path / name
        f.write_text(json.dumps(plan.to_json()))
        return str(f)

    def test_passing_plan_writes_verdict(self, runner, tmp_path):
        plan = VerificationPlan(
            target="branch-par", branch=BranchSpec.make(4, {6: 1, 7: 1}), primes=(5,), n_max=6
        )
        path = self.plan_file(tmp_path, plan)
        out = tmp_path / "verdict.json"
        r = runner.invoke(main, ["verify", "--plan", path, "--out", str(out)])
        assert r.exit_code == 0
        verdict = json.loads(out.read_text())
        assert verdict["summary"] == "pass"
        r2 = runner.invoke(main, ["verify", "--plan", path, "--out", str(out)])
        assert r2.output == r.output and json.loads(out.read_text()) == verdict

    def test_failing_plan_exits_2(self, runner, tmp_path):
        plan = VerificationPlan(
            target="branch-par",
            branch=BranchSpec.make(4, {6: 1, 7: 1}),
            primes=(7,),
            n_max=4,
            force_primes=True,
        )
        r = runner.invoke(main, ["verify", "--plan", self.plan_file(tmp_path, plan)])
        assert r.exit_code == 2
        assert "fail" in r.output

    def test_uncertified_plan_exits_3(self, runner, tmp_path):
        plan = VerificationPlan(
            target="cusp-cross-method", branch=BranchSpec.make(2, {3: 1}), primes=(7,), n_max=3, depth=0
        )
        r = runner.invoke(main, ["verify", "--plan", self.plan_file(tmp_path, plan)])
        assert r.exit_code == 3
        assert "uncertified" in r.output

    def test_bad_plan_exits_1(self, runner, tmp_path):
        f = tmp_path / "plan.json"
        f.write_text(json.dumps({"target": "bogus"}))
        assert runner.invoke(main, ["verify", "--plan", str(f)]).exit_code == 1
        assert runner.invoke(main, ["verify", "--plan", str(tmp_path / "no.json")]).exit_code == 1


class TestConfiguration:
    def test_config_file_supplies_defaults(self, runner, files):
        cfg = files["dir"] / "config.json"
        cfg.write_text(json.dumps({"prime": 5, "n_max": 2, "format": "csv"}))
        r = runner.invoke(main, ["--config", str(cfg), "count", "--branch", files["line"]])
        assert r.exit_code == 0
        assert len(r.output.strip().splitlines()) == 4  # header + n=0..2

    def test_flag_overrides_config(self, runner, files):
        cfg = files["dir"] / "config.json"
        cfg.write_text(json.dumps({"prime": 5, "n_max": 2, "format": "csv"}))
        r = runner.invoke(main, ["--config", str(cfg), "count", "--branch", files["line"], "--n-max", "0"])
        assert len(r.output.strip().splitlines()) == 2

    def test_threads_env_override(self, runner, files):
        r = runner.invoke(
            main,
            ["count", "--branch", files["std4"], "-p", "5", "--n-max", "6", "--format", "csv"],
            env={"THREADS": "2"},
        )
        assert r.exit_code == 0
        assert [int(line.split(",")[1]) for line in r.output.strip().splitlines()[1:]] == [1, 1, 1, 1, 2, 6, 51]

    def test_bad_threads_env(self, runner, files):
        r = runner.invoke(
            main, ["count", "--branch", files["line"], "-p", "3"], env={"THREADS": "many"}
        )
        assert r.exit_code == 1

    def test_bad_config_file(self, runner, files):
        cfg = files["dir"] / "config.json"
        cfg.write_text("[1, 2]")
        r = runner.invoke(main, ["--config", str(cfg), "igusa", "-k", "1"])
        assert r.exit_code == 1

    def test_unknown_option_is_usage_error(self, runner):
        r = runner.invoke(main, ["igusa", "--bogus"])
        assert r.exit_code != 0
