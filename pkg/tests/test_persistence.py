"""
Tests for model files, experiment documents and config digests

Verifies:
- save → load reproduces every parameter bit
- Truncated, wrong-version and wrong-shape files raise distinct errors
- A hand-written one-unit model evaluates to the scalar recurrence
- Experiment documents validate task/network agreement
"""

import json
import math

import numpy as np
import pytest

from cells import lstm_step
from cells.network import NetworkConfig, init_params, zero_params
from cells.state import CellState
from persistence import (
    FORMAT_VERSION,
    DataRef,
    ExperimentConfig,
    ExperimentConfigError,
    ModelDimensionError,
    ModelFileError,
    ModelSchemaError,
    ModelVersionError,
    load_model,
    read_metadata,
    save_model,
    write_resolved_config,
)
from training import gen_delayed_recall
from utils import canonical_json, config_digest, sha256_hex


def _sig(x):
    return 1.0 / (1.0 + math.exp(-x))


class TestModelFile:
    """Round trips and failure modes."""

    @pytest.mark.parametrize("kind", ["lstm", "gru", "lazy_lstm"])
    def test_round_trip_is_exact(self, tmp_path, kind):
        cfg = NetworkConfig(cell_kind=kind, layers=2, input_dim=3, hidden_dim=4, output_dim=2,
                            residual=True, seed=9)
        params = init_params(cfg)
        loaded, loaded_cfg = load_model(save_model(params, cfg, tmp_path / "m.json"))
        assert loaded_cfg == cfg
        assert loaded.equals(params)

    def test_metadata(self, tmp_path, small_lstm_cfg):
        path = save_model(init_params(small_lstm_cfg), small_lstm_cfg, tmp_path / "m.json",
                          metadata={"epochs": 3})
        meta = read_metadata(path)
        assert meta["seed"] == 0 and meta["epochs"] == 3
        assert meta["config_digest"] == config_digest(small_lstm_cfg)

    def test_truncated_file(self, tmp_path, small_lstm_cfg):
        path = save_model(init_params(small_lstm_cfg), small_lstm_cfg, tmp_path / "m.json")
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(ModelSchemaError) as exc:
            load_model(path)
        assert str(path) in str(exc.value)

    def test_wrong_version(self, tmp_path, small_lstm_cfg):
        path = save_model(init_params(small_lstm_cfg), small_lstm_cfg, tmp_path / "m.json")
        doc = json.loads(path.read_text())
        doc["format_version"] = FORMAT_VERSION + 1
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelVersionError):
            load_model(path)

    def test_missing_version(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{}")
        with pytest.raises(ModelSchemaError):
            load_model(path)

    def test_shape_disagrees_with_network(self, tmp_path, small_lstm_cfg):
        path = save_model(init_params(small_lstm_cfg), small_lstm_cfg, tmp_path / "m.json")
        doc = json.loads(path.read_text())
        doc["network"]["hidden_dim"] = 5
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelDimensionError):
            load_model(path)

    def test_data_length_disagrees_with_shape(self, tmp_path, small_lstm_cfg):
        path = save_model(init_params(small_lstm_cfg), small_lstm_cfg, tmp_path / "m.json")
        doc = json.loads(path.read_text())
        doc["tensors"]["out.b"]["data"].append(0.0)
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelDimensionError):
            load_model(path)

    def test_unknown_tensor(self, tmp_path, small_gru_cfg):
        path = save_model(init_params(small_gru_cfg), small_gru_cfg, tmp_path / "m.json")
        doc = json.loads(path.read_text())
        doc["tensors"]["layer9.W_ix"] = {"shape": [1], "data": [0.0]}
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelSchemaError):
            load_model(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelFileError):
            load_model(tmp_path / "absent.json")

    def test_errors_are_value_errors(self):
        assert issubclass(ModelVersionError, ValueError)
        assert issubclass(ModelDimensionError, ModelFileError)

    def test_hand_written_one_unit_lstm(self, tmp_path):
        """A file written by hand evaluates exactly like the scalar recurrence."""
        cfg = NetworkConfig(cell_kind="lstm", input_dim=1, hidden_dim=1, output_dim=1)
        values = {
            "W_ix": 0.3, "W_im": -0.2, "V_ic": 0.1, "b_i": 0.05,
            "W_fx": -0.4, "W_fm": 0.6, "V_fc": -0.3, "b_f": 1.0,
            "W_cx": 0.9, "W_cm": 0.25, "b_c": -0.1,
            "W_ox": 0.2, "W_om": -0.7, "V_oc": 0.45, "b_o": 0.0,
        }
        tensors = {}
        for name, arr in zero_params(cfg).tensors().items():
            key = name.split(".", 1)[1]
            value = values.get(key, 1.0 if name == "out.W" else 0.0)
            tensors[name] = {"shape": list(arr.shape), "data": [value]}
        path = tmp_path / "hand.json"
        path.write_text(json.dumps({"format_version": 1, "network": cfg.model_dump(mode="json"),
                                    "tensors": tensors}))
        params, _ = load_model(path)

        v = values
        c, m = 0.5, -0.25
        x = 0.8
        i = _sig(v["W_ix"] * x + v["W_im"] * m + v["V_ic"] * c + v["b_i"])
        f = _sig(v["W_fx"] * x + v["W_fm"] * m + v["V_fc"] * c + v["b_f"])
        c_new = f * c + i * math.tanh(v["W_cx"] * x + v["W_cm"] * m + v["b_c"])
        o = _sig(v["W_ox"] * x + v["W_om"] * m + v["V_oc"] * c_new + v["b_o"])
        m_new = o * math.tanh(c_new)

        state, _ = lstm_step(params.layers[0], CellState(c=np.array([c]), m=np.array([m])), np.array([x]))
        assert state.c[0] == pytest.approx(c_new, rel=1e-12)
        assert state.m[0] == pytest.approx(m_new, rel=1e-12)


class TestExperimentConfig:
    """Experiment documents."""

    def _doc(self, **network):
        net = {"cell_kind": "gru", "input_dim": 5, "hidden_dim": 6, "output_dim": 2}
        net.update(network)
        return {
            "network": net,
            "train": {"lr": 0.1, "epochs": 2, "task": {"kind": "recall", "num_symbols": 2, "delay": 3}},
            "probes": {"noise_pos": 2},
        }

    def test_load(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(self._doc()))
        exp = ExperimentConfig.load(path)
        assert exp.network.cell_kind.value == "gru"
        assert exp.train.task.delay == 3
        assert exp.probes.noise_pos == 2

    def test_defaults_are_consistent(self):
        exp = ExperimentConfig()
        assert exp.train.task.feature_dim == exp.network.input_dim

    def test_dimension_disagreement(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(self._doc(input_dim=4)))
        with pytest.raises(ExperimentConfigError) as exc:
            ExperimentConfig.load(path)
        assert "input_dim" in str(exc.value)

    def test_unknown_key(self, tmp_path):
        doc = self._doc()
        doc["train"]["momentum"] = 0.9
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ExperimentConfigError):
            ExperimentConfig.load(path)

    def test_missing_document(self, tmp_path):
        with pytest.raises(ExperimentConfigError):
            ExperimentConfig.load(tmp_path / "nope.json")

    def test_dataset_reference_pins_the_file(self, tmp_path):
        ds = gen_delayed_recall(num_seq=3, delay=3, num_symbols=2, seed=4)
        path = ds.save(tmp_path / "recall.json")
        exp = ExperimentConfig.model_validate({**self._doc(), "data": DataRef.from_file(path).model_dump()})
        reloaded = ExperimentConfig.load(write_resolved_config(exp, tmp_path / "run"))
        assert reloaded.data.sha256 == sha256_hex(path.read_bytes())
        assert reloaded.dataset().equals(ds)

    def test_changed_dataset_is_refused(self, tmp_path):
        path = gen_delayed_recall(num_seq=3, delay=3, num_symbols=2, seed=4).save(tmp_path / "recall.json")
        ref = DataRef.from_file(path)
        gen_delayed_recall(num_seq=3, delay=3, num_symbols=2, seed=5).save(path)
        with pytest.raises(ExperimentConfigError) as exc:
            ref.load()
        assert "digest" in str(exc.value)

    def test_missing_dataset(self, tmp_path):
        with pytest.raises(ExperimentConfigError):
            DataRef.from_file(tmp_path / "absent.json")

    def test_without_reference_the_task_is_generated(self):
        exp = ExperimentConfig.model_validate(self._doc())
        assert exp.data is None
        assert exp.dataset().equals(exp.train.task.build())

    def test_resolved_config_reloads(self, tmp_path):
        exp = ExperimentConfig.model_validate(self._doc())
        path = write_resolved_config(exp, tmp_path / "run")
        assert path.name == "config.json"
        reloaded = ExperimentConfig.load(path)
        assert reloaded == exp
        assert reloaded.digest() == exp.digest()


class TestHashing:
    def test_sha256_known_value(self):
        assert sha256_hex(b"") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"

    def test_canonical_json_sorts_keys(self):
        assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'

    def test_digest_is_stable_and_sensitive(self):
        a = NetworkConfig(cell_kind="gru", hidden_dim=8)
        assert config_digest(a) == config_digest(NetworkConfig(hidden_dim=8, cell_kind="gru"))
        assert config_digest(a) != config_digest(NetworkConfig(cell_kind="gru", hidden_dim=9))
