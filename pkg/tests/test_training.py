"""
Tests for the toy tasks and the SGD trainer

Verifies:
- Generator examples (segmentation, zero noise, enumeration, baselines)
- Determinism and dataset files
- lr=0 leaves parameters untouched; clipping bounds every update
- Small networks actually learn both tasks
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from autodiff.losses import IGNORE_LABEL
from cells.network import NetworkConfig, init_params
from persistence import ExperimentConfig
from tests.conftest import with_output
from training import (
    DivergenceError,
    TaskConfig,
    TaskConfigError,
    ToyDataset,
    TrainConfig,
    clip_by_global_norm,
    draw_segments,
    evaluate,
    gen_delayed_recall,
    gen_pseudo_phone_task,
    majority_baseline,
    recall_input_dim,
    train,
)

GOLDEN = Path(__file__).parent / "golden"


def phones(**kw):
    args = dict(num_seq=4, seq_len=20, num_classes=3, input_dim=5, min_dwell=5, max_dwell=5, noise_std=0.3, seed=0)
    args.update(kw)
    return gen_pseudo_phone_task(**args)


class TestPhoneTask:
    """Pseudo-stationary phone sequences."""

    def test_forced_segmentation(self):
        """min_dwell = max_dwell = 5 over 20 frames gives exactly 4 segments."""
        segments = draw_segments(np.random.default_rng(0), 20, 3, 5, 5)
        assert [(s.start, s.length) for s in segments] == [(0, 5), (5, 5), (10, 5), (15, 5)]
        for frames, labels in phones().sequences:
            blocks = labels.reshape(4, 5)
            assert np.all(blocks == blocks[:, :1])
            assert frames.shape == (20, 5)

    def test_neighbouring_segments_may_share_a_class(self):
        rng = np.random.default_rng(5)
        segments = draw_segments(rng, 400, 2, 1, 3)
        repeats = sum(a.label == b.label for a, b in zip(segments, segments[1:]))
        changes = len(segments) - 1 - repeats
        assert repeats > 0 and changes > 0

    def test_last_segment_is_cut_at_sequence_end(self):
        segments = draw_segments(np.random.default_rng(2), 7, 3, 4, 4)
        assert [(s.start, s.length) for s in segments] == [(0, 4), (4, 3)]

    def test_zero_noise_segments_are_constant(self):
        ds = phones(num_classes=2, noise_std=0.0, min_dwell=3, max_dwell=8)
        for frames, labels in ds.sequences:
            for cls in np.unique(labels):
                rows = frames[labels == cls]
                assert np.all(rows == rows[0])

    def test_class_means_are_unit_norm(self):
        ds = phones(noise_std=0.0)
        frames, _ = ds.sequences[0]
        np.testing.assert_allclose(np.linalg.norm(frames, axis=1), 1.0, atol=1e-12)

    def test_deterministic(self):
        assert phones(seed=9).equals(phones(seed=9))
        assert not phones(seed=9).equals(phones(seed=10))

    @pytest.mark.parametrize("bounds", [(0, 5), (6, 5), (5, 51)])
    def test_invalid_dwell(self, bounds):
        with pytest.raises(TaskConfigError):
            phones(min_dwell=bounds[0], max_dwell=bounds[1])

    def test_labels_in_range(self):
        ds = phones(num_classes=4, min_dwell=1, max_dwell=3)
        assert all(lbl.min() >= 0 and lbl.max() < 4 for _, lbl in ds.sequences)


class TestRecallTask:
    """Delayed recall."""

    def test_layout(self):
        ds = gen_delayed_recall(num_seq=10, delay=3, num_symbols=4, seed=0)
        assert ds.input_dim == recall_input_dim(4) == 9
        for frames, labels in ds.sequences:
            assert frames.shape == (5, 9)
            assert np.all(labels[:-1] == IGNORE_LABEL)
            assert labels[-1] == int(np.argmax(frames[0, :4]))
            assert frames[-1, 8] == 1.0

    def test_four_distinct_sequences(self):
        """delay=1, two symbols: cue × distractor → 4 possibilities."""
        ds = gen_delayed_recall(num_seq=400, delay=1, num_symbols=2, seed=0)
        distinct = {frames.tobytes() for frames, _ in ds.sequences}
        assert len(distinct) == 4

    def test_majority_baseline(self):
        ds = gen_delayed_recall(num_seq=4000, delay=2, num_symbols=4, seed=1)
        assert majority_baseline(ds) == pytest.approx(0.25, abs=0.03)

    def test_invalid_delay(self):
        with pytest.raises(TaskConfigError):
            gen_delayed_recall(num_seq=1, delay=51, num_symbols=2, seed=0)

    def test_task_config_dims(self):
        cfg = TaskConfig(kind="recall", num_symbols=3)
        assert cfg.feature_dim == 7 and cfg.classes == 3
        assert cfg.build().input_dim == 7


class TestDatasetFile:
    def test_save_load(self, tmp_path):
        ds = phones()
        path = ds.save(tmp_path / "data" / "phones.json")
        assert ToyDataset.load(path).equals(ds)

    def test_num_frames_skips_ignored(self):
        ds = gen_delayed_recall(num_seq=6, delay=4, num_symbols=2, seed=0)
        assert ds.num_frames() == 6


class TestTrainer:
    """SGD loop."""

    def _net(self, kind="lstm", **kw):
        args = dict(cell_kind=kind, layers=1, input_dim=5, hidden_dim=6, output_dim=3, seed=1)
        args.update(kw)
        return NetworkConfig(**args)

    def test_zero_learning_rate_keeps_params(self):
        net = self._net()
        params, history = train(TrainConfig(lr=0.0, epochs=3, batch_size=2), net, dataset=phones())
        assert params.equals(init_params(net))
        assert len(history) == 3
        assert history[0].loss == history[-1].loss

    def test_clipping_bounds_each_update(self):
        net = self._net(kind="gru")
        ds = phones(num_seq=1)
        start = init_params(net)
        params, _ = train(TrainConfig(lr=0.5, clip_norm=1e-9, epochs=1, batch_size=1), net, dataset=ds)
        moved = params.plus(start, scale=-1.0).global_norm()
        assert moved <= 0.5 * 1e-9 * 1.01

    def test_clip_by_global_norm(self):
        net = self._net()
        grads = init_params(net)
        clipped, norm = clip_by_global_norm(grads, 0.1)
        assert norm == pytest.approx(grads.global_norm())
        assert clipped.global_norm() == pytest.approx(0.1)
        same, _ = clip_by_global_norm(grads, 1e6)
        assert same.equals(grads)

    @pytest.mark.parametrize("kind", ["lstm", "gru", "lazy_lstm"])
    def test_first_epoch_is_finite(self, kind):
        net = self._net(kind=kind, layers=2)
        _, history = train(TrainConfig(epochs=1), net, dataset=phones(num_seq=8))
        assert np.isfinite(history[0].loss)

    def test_reproducible(self):
        net = self._net()
        cfg = TrainConfig(epochs=2, batch_size=2, seed=3)
        a, ha = train(cfg, net, dataset=phones())
        b, hb = train(cfg, net, dataset=phones(), workers=3)
        assert a.equals(b)
        assert [m.to_row() for m in ha] == [m.to_row() for m in hb]

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            train(TrainConfig(epochs=1), self._net(input_dim=4), dataset=phones())

    def test_divergence_reports_epoch(self):
        net = self._net()
        blown = with_output(init_params(net), np.full((3, 6), 1e200))
        cfg = TrainConfig(epochs=2, batch_size=1, loss="squared_error")
        with pytest.raises(DivergenceError) as exc:
            train(cfg, net, dataset=phones(), params=blown)
        assert (exc.value.epoch, exc.value.step) == (1, 0)

    def test_on_epoch_callback(self):
        seen = []
        train(TrainConfig(epochs=2), self._net(), dataset=phones(), on_epoch=seen.append)
        assert [m.epoch for m in seen] == [1, 2]

    def test_immediate_recall_is_learned(self):
        ds = gen_delayed_recall(num_seq=16, delay=0, num_symbols=2, seed=0)
        net = NetworkConfig(cell_kind="gru", layers=1, input_dim=5, hidden_dim=8, output_dim=2, seed=0)
        params, history = train(TrainConfig(lr=0.5, epochs=80, batch_size=4), net, dataset=ds)
        assert history[-1].frame_acc == 1.0
        assert evaluate(net, params, ds)[1] == 1.0

    @pytest.mark.slow
    def test_gru_learns_phones(self):
        """Committed acceptance run: one-layer GRU, 8 phone classes, noise 0.1."""
        golden = json.loads((GOLDEN / "gru_phones.json").read_text())
        exp, expect = ExperimentConfig.model_validate(golden["experiment"]), golden["expect"]
        assert exp.train.epochs <= expect["max_epochs"]
        started = time.perf_counter()
        _, history = train(exp.train, exp.network)
        assert time.perf_counter() - started <= expect["max_seconds"]
        assert history[-1].frame_acc > expect["min_final_frame_acc"]


def test_dwell_enumeration_is_exhaustive():
    """Every dwell in [min, max] shows up given enough segments, and nothing else."""
    rng = np.random.default_rng(0)
    dwells = set()
    for _ in range(50):
        dwells.update(s.length for s in draw_segments(rng, 40, 3, 2, 4)[:-1])
    assert dwells == {2, 3, 4}
