"""
Integration tests for the gatelab command line

Verifies:
- gradcheck exit codes
- train writes model, metrics and the resolved config; lr=0 saves the init
- probe / compare / sweep produce their CSVs
- Usage and runtime errors map to the documented exit codes
"""

import csv
import json

import pytest

from cells.network import init_params
from cli.main import main
from persistence import ExperimentConfig, load_model, read_metadata
from utils import sha256_hex

pytestmark = pytest.mark.integration


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def experiment(tmp_path):
    """Tiny phones experiment document."""
    doc = {
        "network": {"cell_kind": "lstm", "layers": 2, "input_dim": 3, "hidden_dim": 4, "output_dim": 3},
        "train": {
            "lr": 0.1,
            "epochs": 2,
            "batch_size": 2,
            "task": {"kind": "phones", "num_seq": 4, "seq_len": 12, "num_classes": 3, "input_dim": 3,
                     "min_dwell": 2, "max_dwell": 4},
        },
    }
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def trained(tmp_path, experiment):
    out = tmp_path / "run"
    assert main(["train", "--config", str(experiment), "--out", str(out)]) == 0
    return out / "model.json"


class TestGradcheckCommand:
    def test_gru_passes(self, capsys):
        assert main(["gradcheck", "--cell", "gru", "--seed", "0"]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_lazy_residual_passes(self):
        assert main(["gradcheck", "--cell", "lazy_lstm", "--residual", "--input-dim", "4", "--seed", "1"]) == 0

    def test_bad_eps_is_an_error(self, capsys):
        assert main(["gradcheck", "--eps", "0.5"]) == 1
        assert capsys.readouterr().err.startswith("Error:")


class TestTrainCommand:
    def test_outputs(self, tmp_path, experiment):
        out = tmp_path / "run"
        assert main(["train", "--config", str(experiment), "--out", str(out)]) == 0
        assert (out / "model.json").exists()
        metrics = rows(out / "metrics.csv")
        assert [r["epoch"] for r in metrics] == ["1", "2"]
        assert ExperimentConfig.load(out / "config.json").train.epochs == 2

    def test_zero_learning_rate_saves_init(self, tmp_path, experiment):
        out = tmp_path / "lr0"
        assert main(["train", "--config", str(experiment), "--out", str(out), "--lr", "0", "--seed", "3"]) == 0
        params, cfg = load_model(out / "model.json")
        assert cfg.seed == 3
        assert params.equals(init_params(cfg))

    def test_overrides(self, tmp_path, experiment):
        out = tmp_path / "gru"
        assert main(["train", "--config", str(experiment), "--out", str(out), "--cell", "gru",
                     "--hidden", "5", "--epochs", "1"]) == 0
        _, cfg = load_model(out / "model.json")
        assert cfg.cell_kind.value == "gru" and cfg.hidden_dim == 5

    def test_dataset_file_run_reruns_from_its_config(self, tmp_path, experiment):
        data = tmp_path / "data" / "phones.json"
        assert main(["gen-data", "--num-seq", "4", "--seq-len", "12", "--num-classes", "3", "--input-dim", "3",
                     "--min-dwell", "2", "--max-dwell", "4", "--seed", "7", "--out", str(data)]) == 0
        first = tmp_path / "first"
        assert main(["train", "--config", str(experiment), "--data", str(data), "--out", str(first)]) == 0

        recorded = ExperimentConfig.load(first / "config.json").data
        assert recorded is not None
        assert recorded.sha256 == sha256_hex(data.read_bytes())
        assert read_metadata(first / "model.json")["data_sha256"] == recorded.sha256

        again = tmp_path / "again"
        assert main(["train", "--config", str(first / "config.json"), "--out", str(again)]) == 0
        assert (again / "metrics.csv").read_bytes() == (first / "metrics.csv").read_bytes()
        generated = tmp_path / "generated"
        assert main(["train", "--config", str(experiment), "--out", str(generated)]) == 0
        assert (generated / "metrics.csv").read_bytes() != (first / "metrics.csv").read_bytes()

    def test_changed_dataset_file_is_refused(self, tmp_path, experiment, capsys):
        data = tmp_path / "phones.json"
        assert main(["gen-data", "--num-seq", "4", "--seq-len", "12", "--num-classes", "3", "--input-dim", "3",
                     "--min-dwell", "2", "--max-dwell", "4", "--out", str(data)]) == 0
        first = tmp_path / "first"
        assert main(["train", "--config", str(experiment), "--data", str(data), "--out", str(first)]) == 0
        assert main(["gen-data", "--num-seq", "4", "--seq-len", "12", "--num-classes", "3", "--input-dim", "3",
                     "--min-dwell", "2", "--max-dwell", "4", "--seed", "99", "--out", str(data)]) == 0
        capsys.readouterr()
        assert main(["train", "--config", str(first / "config.json"), "--out", str(tmp_path / "x")]) == 1
        assert "digest" in capsys.readouterr().err

    def test_missing_config(self, tmp_path, capsys):
        assert main(["train", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x")]) == 1
        assert "Error:" in capsys.readouterr().err


class TestGenDataCommand:
    def test_writes_dataset_and_config(self, tmp_path):
        out = tmp_path / "data" / "recall.json"
        assert main(["gen-data", "--task", "recall", "--num-seq", "5", "--delay", "2", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert len(doc["sequences"]) == 5
        assert json.loads((out.parent / "config.json").read_text())["delay"] == 2

    def test_invalid_dwell(self, tmp_path, capsys):
        assert main(["gen-data", "--min-dwell", "9", "--max-dwell", "3", "--out", str(tmp_path / "d.json")]) == 1
        assert "Error:" in capsys.readouterr().err


class TestProbeCommand:
    def test_perturb_without_noise(self, tmp_path, trained):
        out = tmp_path / "probe" / "perturb.csv"
        assert main(["probe", "perturb", "--model", str(trained), "--out", str(out), "--noise-len", "0"]) == 0
        decay = rows(tmp_path / "probe" / "perturb_decay.csv")
        assert decay and all(r["decay_len"] == "0" for r in decay)
        assert all(float(r["abs_delta"]) == 0.0 for r in rows(out))
        run = json.loads((tmp_path / "probe" / "config.json").read_text())
        assert run["probe"] == "perturb"

    def test_hist(self, tmp_path, trained):
        out = tmp_path / "hist.csv"
        assert main(["probe", "hist", "--model", str(trained), "--out", str(out), "--num-sequences", "2",
                     "--bins", "5", "--layer", "1"]) == 0
        assert {r["layer"] for r in rows(out)} == {"1"}
        assert len(rows(out)) == 4 * 5

    def test_trace(self, tmp_path, trained):
        out = tmp_path / "trace.csv"
        assert main(["probe", "trace", "--model", str(trained), "--out", str(out), "--seq-len", "20"]) == 0
        assert len(rows(out)) == 2 * 20
        assert len(rows(tmp_path / "trace_smoothness.csv")) == 2

    def test_layer_out_of_range(self, tmp_path, trained, capsys):
        assert main(["probe", "hist", "--model", str(trained), "--out", str(tmp_path / "h.csv"),
                     "--layer", "5"]) == 1
        assert "--layer" in capsys.readouterr().err

    def test_missing_model(self, tmp_path, capsys):
        assert main(["probe", "hist", "--model", str(tmp_path / "none.json"), "--out", str(tmp_path / "h.csv")]) == 1
        assert capsys.readouterr().err.startswith("Error:")


class TestCompareAndSweep:
    def test_compare(self, tmp_path, experiment, trained):
        gru_dir = tmp_path / "gru"
        assert main(["train", "--config", str(experiment), "--out", str(gru_dir), "--cell", "gru",
                     "--epochs", "1"]) == 0
        out = tmp_path / "cmp.csv"
        assert main(["compare", str(trained), str(gru_dir / "model.json"), "--names", "lstm", "gru",
                     "--out", str(out), "--num-sequences", "2", "--seq-len", "15", "--noise-pos", "5",
                     "--noise-len", "3", "--units", "4"]) == 0
        table = rows(out)
        assert [(r["model"], r["layer"]) for r in table] == [("lstm", "0"), ("lstm", "1"), ("gru", "0"), ("gru", "1")]

    def test_compare_name_count(self, tmp_path, trained, capsys):
        assert main(["compare", str(trained), "--names", "a", "b", "--out", str(tmp_path / "c.csv")]) == 1
        assert "names" in capsys.readouterr().err

    def test_sweep(self, tmp_path, experiment):
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(experiment), "--variants", "cells", "--seeds", "0", "1",
                     "--out", str(out)]) == 0
        table = rows(out / "sweep.csv")
        assert [(r["variant"], r["seed"]) for r in table] == [("lstm", "0"), ("lstm", "1"), ("gru", "0"), ("gru", "1")]
        assert json.loads((out / "config.json").read_text())["seeds"] == [0, 1]
        claims = json.loads((out / "claims.json").read_text())["claims"]
        assert [c["claim"] for c in claims] == ["gru_rougher_traces", "gru_forgets_noise_sooner"]
        for c in claims:
            assert c["seeds"] == [0, 1] and len(c["holds_per_seed"]) == 2
            assert c["majority"] == (2 * c["seeds_holding"] > 2)
        per_seed = rows(out / "claims.csv")
        assert [(r["claim"], r["seed"]) for r in per_seed] == [
            ("gru_rougher_traces", "0"), ("gru_rougher_traces", "1"),
            ("gru_forgets_noise_sooner", "0"), ("gru_forgets_noise_sooner", "1"),
        ]
        assert all(float(r["smoothness"]) >= 0.0 for r in table)

    def test_sweep_without_comparable_variants_writes_no_claims(self, tmp_path, experiment):
        out = tmp_path / "depth"
        assert main(["sweep", "--config", str(experiment), "--variants", "depth", "--seeds", "0",
                     "--out", str(out)]) == 0
        assert not (out / "claims.json").exists()

    @pytest.mark.slow
    def test_claims_sweep_records_every_claim_over_five_seeds(self, tmp_path, experiment):
        out = tmp_path / "claims"
        assert main(["sweep", "--config", str(experiment), "--variants", "claims", "--out", str(out)]) == 0
        claims = json.loads((out / "claims.json").read_text())["claims"]
        assert {c["claim"] for c in claims} == {
            "gru_rougher_traces", "gru_forgets_noise_sooner", "lazy_top_loss",
            "residual_lstm_loss", "residual_gru_loss",
        }
        for c in claims:
            assert c["seeds"] == [0, 1, 2, 3, 4]
            assert c["seeds_holding"] == sum(c["holds_per_seed"])
        assert len(rows(out / "claims.csv")) == 5 * 5


class TestUsage:
    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["gradcheck", "--bogus"])
        assert exc.value.code == 2

    def test_no_command(self, capsys):
        assert main([]) == 1
