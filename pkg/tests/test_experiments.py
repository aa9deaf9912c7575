import json
import math
from dataclasses import replace

import numpy as np
import pytest

import oracles
from modszasz.errors import ConfigError, DomainError
from modszasz.experiments import (
    ExperimentSpec,
    inverse_distance_integral,
    parse_config,
    run,
    run_alpha_inverse,
    run_converge,
    run_direct_bound,
    run_figures,
    run_moment_audit,
    run_voronovskaja,
    sup_weighted_error,
)
from modszasz.experiments import figures
from modszasz.experiments.report import format_value, rows_to_csv
from modszasz.operator import EvalConfig, abs_shift, apply, evaluate, exp_function, monomial, sine
from modszasz.sequences import BnSequence
from modszasz.smoothness import WeightedSpace


def strip_timestamp(report):
    payload = json.loads(report.to_json())
    payload["metadata"].pop("timestamp")
    return payload


class TestSpec:
    def test_ladder_must_increase(self):
        with pytest.raises(ConfigError):
            ExperimentSpec("converge", monomial(2), n_ladder=(10, 10, 20))

    def test_figures_need_fixed_truncation(self):
        with pytest.raises(ConfigError):
            ExperimentSpec("figures")
        ExperimentSpec("figures", eval=EvalConfig(fixed_k=100))

    def test_function_required(self):
        with pytest.raises(ConfigError):
            ExperimentSpec("converge")

    def test_unknown_study(self):
        with pytest.raises(ConfigError):
            ExperimentSpec("plot", monomial(2))

    def test_echo_is_json(self):
        spec = ExperimentSpec("converge", sine(), BnSequence.psum(0.5), space=WeightedSpace(2, 8.0, 100))
        echo = json.loads(json.dumps(spec.echo()))
        assert echo["function"] == "sin"
        assert echo["sequence"] == "psum:0.5"
        assert echo["N"] == 2 and echo["x_max"] == 8.0


class TestConfig:
    TEXT = """
    # converge study
    study = converge
    function = monomial:2
    sequence = psum:0.5
    n_ladder = 10, 20, 40..42
    N = 1          # weight order
    space_x_max = 20
    grid_points = 101
    tol = 1e-13
    x_max = 5
    refine = false
    """

    def test_parse(self):
        spec = parse_config(self.TEXT)
        assert spec.study == "converge"
        assert spec.function.spec() == "monomial:2"
        assert spec.sequence == BnSequence.psum(0.5)
        assert spec.n_ladder == (10, 20, 40, 41, 42)
        assert spec.space == WeightedSpace(1, 20.0, 101)
        assert spec.eval.tol == 1e-13
        assert spec.window == 5.0
        assert spec.refine is False

    def test_study_override(self):
        assert parse_config(self.TEXT, study="alpha_inverse").study == "alpha_inverse"

    def test_fixed_k(self):
        spec = parse_config("study = figures\nfixed_k = 100\nsettings = F1a, F5b")
        assert spec.eval.fixed_k == 100
        assert spec.settings == ("F1a", "F5b")

    @pytest.mark.parametrize(
        "text",
        [
            "study = converge\nfunction = cos",
            "study = converge\nfunction = sin\ncolour = blue",
            "study = converge\nfunction = sin\nn_ladder = 3, 2",
            "study = converge\nfunction = sin\nrefine = maybe",
            "study = converge\nfunction = sin\ntol = -1",
            "study = converge\nfunction sin",
            "function = sin",
            "study = figures",
        ],
    )
    def test_errors(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)


class TestFormats:
    def test_value_format(self):
        assert format_value(0.1) == "0.10000000000000001"
        assert format_value(True) == "true"
        assert format_value(None) == ""
        assert format_value(float("inf")) == "inf"
        assert format_value(np.float64(2.5)) == "2.5"
        assert format_value(7) == "7"

    def test_csv_roundtrip(self):
        values = [math.pi, 1 / 3, 1e-300, 123456789.123456789]
        text = rows_to_csv([{"v": v} for v in values], ["v"])
        assert "\r" not in text
        lines = text.strip().split("\n")
        assert lines[0] == "v"
        assert [float(s) for s in lines[1:]] == values

    def test_write_csv_and_json(self, tmp_path):
        spec = ExperimentSpec("converge", monomial(2), n_ladder=(10, 20), x_max=5.0, x_points=11)
        report = run_converge(spec)
        csv_path, = report.write(tmp_path / "out.csv")
        header = csv_path.read_text().split("\n")[0].split(",")
        assert header[:2] == ["n", "b_n"]
        json_path, = report.write(tmp_path / "out.json")
        payload = json.loads(json_path.read_text())
        assert set(payload) == {"spec_echo", "rows", "summary", "metadata"}
        assert payload["metadata"]["tool"] == "modszasz"
        assert payload["rows"][0]["b_n"] == 10.0


class TestConverge:
    def spec(self, f, seq=None, **kw):
        kw.setdefault("x_max", 5.0)
        kw.setdefault("x_points", 33)
        return ExperimentSpec("converge", f, seq or BnSequence.classical(), **kw)

    def test_quadratic_exact(self):
        report = run_converge(self.spec(monomial(2), n_ladder=(10, 20, 40)))
        row = report.rows[0]
        assert row["n"] == 10 and row["b_n"] == 10.0
        assert row["sup_error"] == pytest.approx(0.5, abs=1e-10)
        assert row["x_at_sup"] == 5.0
        for r in report.rows:
            assert r["sup_error"] == pytest.approx(5.0 / r["n"], abs=1e-10)
            assert r["ratio"] == pytest.approx(1.0, abs=1e-9)

    def test_constant_is_reproduced(self):
        report = run_converge(self.spec(monomial(0)))
        assert all(r["sup_error"] < 1e-12 for r in report.rows)

    def test_sine_decreases(self):
        report = run_converge(self.spec(sine(), BnSequence.psum(0.5), n_ladder=(10, 20, 40, 80)))
        assert report.summary["strictly_decreasing"]

    def test_exp_is_flagged(self):
        report = run_converge(self.spec(exp_function(), n_ladder=(10, 20)))
        assert report.metadata["flags"]

    def test_classical_equals_unit_table(self):
        kw = dict(n_ladder=(5, 10, 20), space=WeightedSpace(1, 5.0, 64))
        a = run_converge(self.spec(sine(), BnSequence.classical(), **kw))
        b = run_converge(self.spec(sine(), BnSequence.table(range(1, 21)), **kw))
        assert a.to_csv() == b.to_csv()

    def test_rows_reproducible_by_apply(self):
        seq = BnSequence.psum(0.5)
        space = WeightedSpace(2, 5.0, 64)
        report = run_converge(self.spec(abs_shift(1.0), seq, n_ladder=(10, 40), space=space))
        for row in report.rows:
            x = row["x_at_sup"]
            direct = float(space.weight(x)) * abs(apply(abs_shift(1.0), seq, row["n"], x) - abs(x - 1))
            assert direct == row["sup_error"]

    def test_evaluation_errors_recorded(self):
        spec = self.spec(monomial(1), n_ladder=(10, 20), eval=EvalConfig(term_cap=60))
        report = run_converge(spec)
        assert report.rows[1]["status"].startswith("error")
        assert math.isnan(report.rows[1]["sup_error"])

    def test_refinement_moves_towards_true_sup(self):
        # a narrow peak between coarse nodes is found by halving
        f = abs_shift(0.75)
        space = WeightedSpace(0, 2.0, 16)
        coarse, _, xs0 = sup_weighted_error(f, 200.0, 2.0, 5, space, EvalConfig(), refine=False)
        fine, _, xs1 = sup_weighted_error(f, 200.0, 2.0, 5, space, EvalConfig(), refine=True)
        assert fine > coarse
        assert xs0.size == 5 and xs1.size in (9, 17, 33)


class TestVoronovskaja:
    def test_cubic_residual(self):
        spec = ExperimentSpec("voronovskaja", monomial(3), BnSequence.table([100.0]), n_ladder=(1,),
                              x_max=4.0, x_points=9, eval=EvalConfig(tol=1e-14))
        report = run_voronovskaja(spec)
        for row in report.rows:
            assert row["residual"] == pytest.approx(row["x"] / 100.0, abs=1e-9)
        at_two = [r for r in report.rows if r["x"] == 2.0][0]
        assert at_two["residual"] == pytest.approx(0.02, abs=1e-9)

    def test_linear_residual_vanishes(self):
        spec = ExperimentSpec("voronovskaja", monomial(1), n_ladder=(5, 50), x_max=3.0, x_points=7)
        assert all(abs(r["residual"]) < 1e-9 for r in run_voronovskaja(spec).rows)

    def test_sine_first_order(self):
        spec = ExperimentSpec("voronovskaja", sine(), BnSequence.geometric(10), n_ladder=(1, 2, 3),
                              x_max=math.pi, x_points=65)
        shrink = run_voronovskaja(spec).summary["shrink_factors"]
        assert len(shrink) == 2
        assert all(5 <= s <= 20 for s in shrink)

    def test_rows_reproducible_by_apply(self):
        seq = BnSequence.psum(0.5)
        spec = ExperimentSpec("voronovskaja", sine(), seq, n_ladder=(30,), x_max=2.0, x_points=5)
        for row in run_voronovskaja(spec).rows:
            assert row["scaled_error"] == row["b_n"] * (apply(sine(), seq, 30, row["x"]) - math.sin(row["x"]))


class TestDirectBound:
    def spec(self, f, N=0, **kw):
        kw.setdefault("n_ladder", (2, 4, 6, 8))
        return ExperimentSpec("direct_bound", f, BnSequence.geometric(math.sqrt(10)), space=WeightedSpace(N, 10.0, 1024),
                              x_max=2.0, x_points=17, h_samples=16, eval=EvalConfig(tol=1e-14), **kw)

    def test_quadratic_ratio_is_half(self):
        report = run_direct_bound(self.spec(monomial(2)))
        ok = [r for r in report.rows if r["flag"] == "ok"]
        assert len(ok) == len(report.rows)
        for r in ok:
            assert r["ratio"] == pytest.approx(0.5, abs=1e-6)
            assert r["delta"] == pytest.approx(math.sqrt(r["x"] / r["b_n"]), rel=1e-14)

    def test_linear_ratio_zero(self):
        report = run_direct_bound(self.spec(monomial(1), n_ladder=(2, 4)))
        assert all(r["ratio"] == 0.0 and r["flag"] == "below_noise" for r in report.rows)

    def test_kink_bounded(self):
        summary = run_direct_bound(self.spec(abs_shift(1.0))).summary
        assert summary["C_hat"] <= 10
        assert abs(summary["loglog_slope"]) <= 0.1

    def test_unbounded_rows_are_flagged(self):
        # affine on the modulus window but not beyond it: zero modulus, nonzero error
        from modszasz.operator import custom

        f = custom(lambda t: t + 1e6 * np.maximum(t - 16.0, 0.0) ** 2, growth_gamma=2.0, bound=1e6)
        spec = ExperimentSpec("direct_bound", f, BnSequence.table([1.0]), n_ladder=(1,), space=WeightedSpace(0, 10.0, 256),
                              x_max=2.0, x_points=5, h_samples=8, eval=EvalConfig(tol=1e-14))
        report = run_direct_bound(spec)
        last = report.rows[-1]
        assert last["flag"] == "unbounded" and math.isinf(last["ratio"])
        assert report.summary["unbounded_rows"] >= 1
        assert math.isfinite(report.summary["C_hat"]) or all(r["flag"] == "unbounded" for r in report.rows)


class TestAlphaInverse:
    def spec(self, f, N, **kw):
        kw.setdefault("n_ladder", (2, 3, 4, 5, 6, 7))
        return ExperimentSpec("alpha_inverse", f, BnSequence.geometric(math.sqrt(10)),
                              space=WeightedSpace(N, 10.0, 4096), x_max=4.0, x_points=65, **kw)

    def test_quadratic(self):
        s = run_alpha_inverse(self.spec(monomial(2), 2)).summary
        assert s["decay_slope"] == pytest.approx(-1.0, abs=0.02)
        assert s["modulus_slope"] == pytest.approx(2.0, abs=0.05)
        assert s["consistency_gap"] < 0.1

    def test_kink(self):
        s = run_alpha_inverse(self.spec(abs_shift(1.0), 0)).summary
        assert s["decay_slope"] == pytest.approx(-0.5, abs=0.1)
        assert s["modulus_slope"] == pytest.approx(1.0, abs=0.1)

    def test_linear_saturates(self):
        s = run_alpha_inverse(self.spec(monomial(1), 0, n_ladder=(2, 4, 6))).summary
        assert s["error_saturated"] and s["modulus_saturated"]
        assert math.isnan(s["decay_slope"]) and math.isnan(s["modulus_slope"])


class TestFigures:
    def test_catalog_counts(self):
        assert figures.curve_count("F1a") == 39
        assert len(figures.SETTINGS) == 13

    def test_first_setting_bundle(self, tmp_path):
        spec = ExperimentSpec("figures", eval=EvalConfig(fixed_k=100), settings=("F1a",), figure_points=64)
        report = run_figures(spec)
        header, columns = report.bundles["F1a"]
        assert header[:2] == ["x", "target"]
        assert len(header) == 2 + 39
        assert report.summary["curves"]["F1a"] == 39
        paths = report.write(tmp_path / "fig.csv")
        assert paths[1].name == "fig_F1a.csv"
        lines = paths[1].read_text().strip().split("\n")
        assert len(lines) == 65

    def test_sine_endpoint(self):
        spec = ExperimentSpec("figures", eval=EvalConfig(fixed_k=100), settings=("F6b",), figure_points=512)
        report = run_figures(spec)
        header, columns = report.bundles["F6b"]
        col = columns[header.index("M_n25")]
        assert columns[0][-1] == pytest.approx(2 * math.pi)
        assert abs(col[-1]) < 0.2

    def test_curves_match_truncated_sums(self):
        spec = ExperimentSpec("figures", eval=EvalConfig(fixed_k=100), settings=("F5c",), figure_points=16)
        report = run_figures(spec)
        header, columns = report.bundles["F5c"]
        seq = BnSequence.psum(0.5)
        xs = columns[0]
        for n in (78, 95):
            expected = evaluate(exp_function(), seq.value(n), xs, EvalConfig(fixed_k=100))
            np.testing.assert_array_equal(columns[header.index(f"S_root_n{n}")], expected)

    def test_cross_family(self):
        spec = ExperimentSpec("figures", eval=EvalConfig(fixed_k=100), settings=("F5b",))
        cross = run_figures(spec).summary["cross_family"]
        assert 0.5 <= cross["ratio"] <= 2.0

    def test_unknown_setting(self):
        with pytest.raises(DomainError):
            run_figures(ExperimentSpec("figures", eval=EvalConfig(fixed_k=100), settings=("F9",)))

    def test_deterministic_bytes(self, tmp_path):
        spec = ExperimentSpec("figures", eval=EvalConfig(fixed_k=100), settings=("F2b", "F5c"), figure_points=40)
        first = [p.read_bytes() for p in run(spec).write(tmp_path / "a.csv")]
        second = [p.read_bytes() for p in run(spec).write(tmp_path / "b.csv")]
        assert first == second


class TestMomentAudit:
    def test_everything_passes(self):
        report = run_moment_audit(ExperimentSpec("moment_audit"))
        assert report.summary["failed"] == 0
        checks = {r["check"] for r in report.rows}
        assert {"test_function", "raw_moment", "central_exact", "coefficient_identity",
                "weight_bound_N0", "second_moment_bound_N1", "inverse_distance_integral"} <= checks

    def test_fitted_constants(self):
        bounds = run_moment_audit(ExperimentSpec("moment_audit")).summary["weight_bounds"]
        assert bounds["N0"]["M_hat_weight"] == pytest.approx(1.0, abs=1e-12)
        assert bounds["N1"]["M_hat_second_moment"] <= 2.0
        assert bounds["N3"]["M_hat_weight"] >= 1.0

    def test_integral_inequality_summary(self):
        s = run_moment_audit(ExperimentSpec("moment_audit")).summary["integral_inequality"]
        assert 0 < s["max_lhs_over_rhs"] <= 1.0


class TestInverseDistanceIntegral:
    @pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 10.0])
    @pytest.mark.parametrize("h", [1.0, 0.5, 0.1, 0.01])
    def test_closed_form(self, x, h):
        expected = oracles.xlogx_second_difference(x, h)
        assert inverse_distance_integral(x, h) == pytest.approx(expected, rel=1e-10, abs=1e-15)

    def test_rejects_bad_arguments(self):
        with pytest.raises(DomainError):
            inverse_distance_integral(-1.0, 0.5)
        with pytest.raises(DomainError):
            inverse_distance_integral(1.0, 0.0)


class TestInvariants:
    @pytest.mark.parametrize("f", [monomial(2), exp_function()], ids=repr)
    def test_convex_functions_are_overestimated(self, f):
        xs = WeightedSpace().grid()
        for b in (10.0, 20.0, 40.0, 80.0):
            assert np.all(evaluate(f, b, xs) >= f(xs) - 1e-9 * np.maximum(1.0, f(xs)))

    @pytest.mark.parametrize("study", ["converge", "voronovskaja", "direct_bound", "alpha_inverse"])
    def test_deterministic_reports(self, study):
        spec = ExperimentSpec(study, sine(), BnSequence.psum(0.5), n_ladder=(5, 10, 20),
                              space=WeightedSpace(1, 6.0, 256), x_max=3.0, x_points=9, h_samples=8)
        a, b = run(spec), run(spec)
        assert a.to_csv() == b.to_csv()
        assert strip_timestamp(a) == strip_timestamp(b)

    def test_every_row_carries_b(self):
        spec = ExperimentSpec("voronovskaja", sine(), BnSequence.psum(1), n_ladder=(3, 6), x_max=1.0, x_points=3)
        assert all(r["b_n"] == BnSequence.psum(1).value(r["n"]) for r in run(spec).rows)
