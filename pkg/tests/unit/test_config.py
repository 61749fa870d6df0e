"""
Unit tests for experiment configuration and runtime settings.
"""

from pathlib import Path

import pytest

from graphscribe.errors import ConfigError
from graphscribe.models.config import AblationFlags, ModelConfig, OrderMode
from graphscribe.settings import ObservabilityConfig, Settings
from graphscribe.training.config import ExperimentConfig, dump_config, load_config, parse_config


class TestModelConfig:

    @pytest.mark.unit
    def test_defaults(self):
        config = ModelConfig()
        assert config.n_slots == 8
        assert config.copy_lambda == 0.3
        assert config.copy_threshold == 0.5
        assert config.window_sizes == [3]
        assert config.slot_dim == 4 * config.embed_dim

    @pytest.mark.unit
    def test_ensemble_windows(self):
        assert ModelConfig(window_ensemble=[5, 1, 3, 3]).window_sizes == [1, 3, 5]

    @pytest.mark.unit
    @pytest.mark.parametrize("field,value", [
        ("copy_lambda", 1.2),
        ("window_size", 0),
        ("n_slots", -1),
        ("overlong", "wrap"),
        ("assignment", "random"),
        ("window_ensemble", [2, 0]),
    ])
    def test_invalid_values(self, field, value):
        with pytest.raises(ValueError):
            ModelConfig(**{field: value})

    @pytest.mark.unit
    def test_heads_divide_width(self):
        with pytest.raises(ValueError):
            ModelConfig(d_model=10, n_heads=4)

    @pytest.mark.unit
    def test_ablation_description(self):
        flags = AblationFlags(no_cp=True, order_mode=OrderMode.RANDOM)
        assert flags.describe() == "no_cp,order=random"


class TestExperimentConfig:

    @pytest.mark.unit
    def test_loss_weight_defaults(self):
        train = ExperimentConfig().train
        assert (train.lambda_pos, train.lambda_sort, train.lambda_copy) == (0.7, 0.4, 0.3)

    @pytest.mark.unit
    def test_overrides(self):
        config = ExperimentConfig().with_overrides({
            "train.epochs": 3,
            "train.ablation.no_cp": True,
            "model.window_size": 5,
            "data.train": None,
        })
        assert config.train.epochs == 3
        assert config.train.ablation.no_cp
        assert config.model.window_size == 5
        assert config.data.train is None

    @pytest.mark.unit
    def test_unknown_override(self):
        with pytest.raises(ConfigError):
            ExperimentConfig().with_overrides({"train.epoch": 3})
        with pytest.raises(ConfigError):
            ExperimentConfig().with_overrides({"optim.lr": 3})

    @pytest.mark.unit
    def test_invalid_override_value(self):
        with pytest.raises(ConfigError):
            ExperimentConfig().with_overrides({"train.ablation.order_mode": "sideways"})

    @pytest.mark.unit
    def test_parse_invalid(self):
        with pytest.raises(ConfigError):
            parse_config({"train": {"epochs": 0}})
        with pytest.raises(ConfigError):
            parse_config({"data": {"oversize": "drop"}})

    @pytest.mark.unit
    def test_slot_counts_must_agree(self):
        with pytest.raises(ConfigError, match="n_slots"):
            parse_config({"model": {"n_slots": 4}})
        with pytest.raises(ConfigError):
            ExperimentConfig().with_overrides({"data.n_slots": 6})
        config = parse_config({"data": {"n_slots": 4}, "model": {"n_slots": 4}})
        assert config.data.n_slots == config.model.n_slots == 4

    @pytest.mark.unit
    def test_yaml_round_trip(self, tiny_config, tmp_path):
        path = tmp_path / "config.yaml"
        dump_config(tiny_config, path)
        assert load_config(path) == tiny_config

    @pytest.mark.unit
    def test_load_partial_yaml(self, tmp_path):
        path = tmp_path / "partial.yaml"
        path.write_text("train:\n  epochs: 4\nmodel:\n  window_size: 2\n")
        config = load_config(path)
        assert config.train.epochs == 4
        assert config.model.window_size == 2
        assert config.data.n_slots == 8

    @pytest.mark.unit
    def test_load_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.yaml")
        bad = tmp_path / "bad.yaml"
        bad.write_text("train: [unclosed\n")
        with pytest.raises(ConfigError):
            load_config(bad)
        listing = tmp_path / "list.yaml"
        listing.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            load_config(listing)

    @pytest.mark.unit
    def test_empty_yaml_is_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config(path) == ExperimentConfig()


class TestSettings:

    @pytest.mark.unit
    def test_from_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv("GRAPHSCRIBE_RUN_ROOT", str(tmp_path))
        monkeypatch.setenv("GRAPHSCRIBE_DEVICE", "cuda:1")
        monkeypatch.setenv("GRAPHSCRIBE_SEED", "7")
        monkeypatch.setenv("GRAPHSCRIBE_LOG_LEVEL", "DEBUG")
        settings = Settings.from_env()
        assert settings.runtime.run_root == Path(tmp_path)
        assert settings.runtime.device == "cuda:1"
        assert settings.runtime.seed == 7
        assert settings.observability.level == 10
        assert settings.validate() == []

    @pytest.mark.unit
    def test_validate_warns(self, monkeypatch):
        monkeypatch.setenv("GRAPHSCRIBE_DEVICE", "tpu")
        monkeypatch.setenv("GRAPHSCRIBE_LOG_LEVEL", "LOUD")
        warnings = Settings.from_env().validate()
        assert len(warnings) == 2

    @pytest.mark.unit
    def test_debug_forces_debug_level(self):
        assert ObservabilityConfig(log_level="ERROR", debug=True).level == 10
