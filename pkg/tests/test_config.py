import math

import pytest
import yaml

from readout_opt import (
    OptimizerConfig,
    Strategy,
    build_search_grid,
    load_optimizer_config,
)
from readout_opt.config import OptimizerConfigError, config_echo

from conftest import TWO_PI, make_graph, make_qubit
from readout_opt import Role


class TestLoadOptimizerConfig:
    def test_empty_text_gives_defaults(self):
        cfg = load_optimizer_config("")
        assert cfg.total_time == 500.0
        assert cfg.dt == 1.0
        assert cfg.grid.n_omega == 60
        assert cfg.weights.separation == 1.0
        assert cfg.mist.a == 0.075
        assert cfg.start is None

    def test_unit_conversions(self):
        cfg = load_optimizer_config(yaml.safe_dump({
            "collision": {"width_MHz": 30.0},
            "pole_guard_GHz": 0.008,
        }))
        assert cfg.collision.width == pytest.approx(TWO_PI * 0.030)
        assert cfg.pole_guard == pytest.approx(TWO_PI * 0.008)

    def test_partial_override(self):
        cfg = load_optimizer_config(yaml.safe_dump({
            "grid": {"n_omega": 7},
            "weights": {"photon": 0.2},
        }))
        assert cfg.grid.n_omega == 7
        assert cfg.grid.n_amp == 40  # untouched default
        assert cfg.weights.photon == 0.2
        assert cfg.weights.mist == 1.0

    def test_zero_grid_rejected(self):
        with pytest.raises(OptimizerConfigError):
            load_optimizer_config("grid: {n_amp: 0}")

    def test_tp_range_must_fit_total(self):
        with pytest.raises(OptimizerConfigError):
            load_optimizer_config(yaml.safe_dump({
                "total_readout_time_ns": 400,
                "grid": {"tp_max_ns": 450},
            }))

    def test_non_mapping_rejected(self):
        with pytest.raises(OptimizerConfigError):
            load_optimizer_config("- a\n- b\n")

    def test_parse_failure(self):
        with pytest.raises(OptimizerConfigError):
            load_optimizer_config("grid: [::")

    def test_start_qubit(self):
        cfg = load_optimizer_config("start_qubit: [2, 3]")
        assert cfg.start == (2, 3)


class TestBuildSearchGrid:
    def test_spans_band_and_scales_amp(self):
        band = (TWO_PI * 5.7, TWO_PI * 6.2)
        graph = make_graph([(0, 0, Role.DATA, make_qubit(amp_ref=0.5), band)])
        qid = graph.at(0, 0)
        cfg = load_optimizer_config(yaml.safe_dump({
            "grid": {"n_omega": 5, "n_amp": 3, "n_tp": 2,
                     "amp_min": 0.1, "amp_max": 0.3},
        }))
        grid = build_search_grid(graph, qid, cfg)
        assert grid.omega_points[0] == pytest.approx(band[0])
        assert grid.omega_points[-1] == pytest.approx(band[1])
        assert grid.amp_points == pytest.approx((0.05, 0.1, 0.15))
        assert grid.tp_points[0] == 100.0
        assert grid.tp_points[-1] == 480.0
        assert grid.size == 5 * 3 * 2


class TestConfigEcho:
    def test_round_trips_through_loader(self):
        cfg = load_optimizer_config(yaml.safe_dump({
            "dt_ns": 0.5,
            "grid": {"n_omega": 9},
            "mist": {"a": 0.06, "sharpness": 0.02},
            "collision": {"width_MHz": 25.0},
            "start_qubit": [1, 2],
        }))
        echoed = load_optimizer_config(yaml.safe_dump(config_echo(cfg)))
        assert echoed.dt == cfg.dt
        assert echoed.grid == cfg.grid
        assert echoed.mist.a == pytest.approx(cfg.mist.a)
        assert echoed.mist_sharpness == cfg.mist_sharpness
        assert echoed.collision.width == pytest.approx(cfg.collision.width)
        assert echoed.pole_guard == pytest.approx(cfg.pole_guard)
        assert echoed.start == cfg.start

    def test_strategy_values(self):
        assert Strategy("all") is Strategy.ALL_MODELS
        assert Strategy("predictive") is Strategy.PREDICTIVE_ONLY
