"""Recall-curve rendering: exact strings, stable bytes, sane geometry."""

import pytest
from conftest import make_corpus

from fastread import active, evaluate as ev, plots


def result(treatment="linear", seed=0, points=((1, 0), (2, 1))):
    trajectory = tuple(points)
    reviewed, found = trajectory[-1]
    return ev.SimulationResult(
        treatment=active.TreatmentCode.parse(treatment),
        seed=seed,
        trajectory=trajectory,
        x95=reviewed,
        wss95=0.95 - reviewed / 100,
        missed=frozenset(),
    )


class TestNiceTicks:
    def test_round_steps(self):
        assert plots.nice_ticks(97) == [0, 20, 40, 60, 80, 100]
        assert plots.nice_ticks(1000) == [0, 200, 400, 600, 800, 1000]

    def test_small_counts_use_unit_steps(self):
        assert plots.nice_ticks(5) == [0, 1, 2, 3, 4, 5]
        assert plots.nice_ticks(3) == [0, 1, 2, 3]
        assert plots.nice_ticks(1) == [0, 1]

    def test_degenerate_upper(self):
        assert plots.nice_ticks(0) == [0, 1]

    def test_covers_upper(self):
        for upper in range(1, 500):
            ticks = plots.nice_ticks(upper)
            assert ticks[0] == 0
            assert ticks[-1] >= upper
            assert ticks == sorted(set(ticks))


class TestCsv:
    def test_exact_content(self):
        series = plots.series_from_results(
            [
                result("linear", 0, [(1, 0), (2, 1)]),
                result("HUTM", 7, [(1, 1)]),
            ]
        )
        assert plots.render_csv(series) == (
            "treatment,seed,reviewed,found\n"
            "linear,0,1,0\n"
            "linear,0,2,1\n"
            "HUTM,7,1,1\n"
        )

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            plots.render_csv([])


class TestSvg:
    def test_polyline_coordinates_by_hand(self):
        # plot area: x in [70, 630], y in [445, 40]
        # points (1,0)..(4,2) with x_top=4, y_top=2
        series = plots.series_from_results(
            [result("linear", 3, [(1, 0), (2, 1), (3, 1), (4, 2)])]
        )
        svg = plots.render_svg(series)
        assert 'points="210,445 350,242.5 490,242.5 630,40"' in svg

    def test_structure_and_legend(self):
        series = plots.series_from_results(
            [
                result("HUTM", 0, [(1, 1), (2, 2)]),
                result("HUTM", 1, [(1, 0), (2, 1)]),
                result("linear", 0, [(1, 0), (2, 0)]),
            ]
        )
        svg = plots.render_svg(series, title="demo")
        assert svg.startswith("<svg ")
        assert svg.count("<polyline ") == 3
        # same treatment shares one color; legend lists each treatment once
        assert svg.count(f'stroke="{plots.PALETTE[0]}"') >= 3  # 2 lines + legend
        assert svg.count(">HUTM</text>") == 1
        assert svg.count(">linear</text>") == 1
        assert ">demo</text>" in svg

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            plots.render_svg([])

    def test_type_error_on_raw_tuples(self):
        with pytest.raises(TypeError):
            plots.series_from_results([("linear", 0, [(1, 0)])])

    def test_rendering_is_deterministic(self):
        runs = [result("PUSN", s, [(1, 0), (2, s % 2)]) for s in range(4)]
        series = plots.series_from_results(runs)
        assert plots.render_svg(series) == plots.render_svg(series)
        assert plots.render_csv(series) == plots.render_csv(series)


class TestWritePlot:
    def test_writes_both_files(self, tmp_path):
        svg_path, csv_path = plots.write_plot(
            [result()], tmp_path / "out" / "curve"
        )
        assert svg_path.name == "curve.svg"
        assert csv_path.name == "curve.csv"
        assert svg_path.read_text().startswith("<svg ")
        assert csv_path.read_text().startswith("treatment,seed,")

    def test_rerun_is_byte_identical(self, tmp_path):
        runs = [result("HUTM", s, [(1, 0), (2, 1), (3, 2)]) for s in range(3)]
        first = plots.write_plot(runs, tmp_path / "a")[0].read_bytes()
        second = plots.write_plot(runs, tmp_path / "a")[0].read_bytes()
        assert first == second


class TestRunLogIntegration:
    def test_log_round_trip_renders_identically(self, tmp_path):
        corpus = make_corpus(n=80, n_relevant=20, seed=5)
        runs = ev.repeat(corpus, active.LINEAR, n=3, base_seed=0)
        log = tmp_path / "runs.jsonl"
        ev.append_run_log(runs, log)
        ev.append_run_log(runs[:1], log)  # append-only: file grows
        loaded = ev.read_run_log(log)
        assert len(loaded) == 4
        assert [r.seed for r in loaded] == [0, 1, 2, 0]
        direct = plots.render_svg(plots.series_from_results(runs))
        replayed = plots.render_svg(plots.series_from_results(loaded[:3]))
        assert direct == replayed
