"""
Tests for state recording and trace files

Verifies:
- Step ordering and record counts
- Unit sampling is fixed across sequences
- Recording never changes the forward computation
- JSONL export/import is exact
"""

import json

import numpy as np
import pytest

from cells import CellState, GateRecord
from cells.network import NetworkConfig, init_params, run_forward, stack_forward
from instrumentation import (
    RecordOrderError,
    StateRecorder,
    StateTrace,
    TraceIOError,
    export_trace,
    import_trace,
)


def _state(h, value=0.0):
    v = np.full(h, value)
    return CellState(c=v, m=v), GateRecord(i=v, f=v, o=v, g_pre=v)


class TestRecorder:
    """StateRecorder bookkeeping."""

    def test_steps_numbered_from_zero(self):
        rec = StateRecorder()
        for t in range(3):
            rec.record(0, t, *_state(2, t))
        trace = rec.traces_for_layer(0)[0]
        assert [s.t for s in trace.steps] == [0, 1, 2]
        assert trace.cells()[:, 0].tolist() == [0.0, 1.0, 2.0]

    def test_out_of_order(self):
        rec = StateRecorder()
        rec.record(0, 0, *_state(2))
        with pytest.raises(RecordOrderError):
            rec.record(0, 2, *_state(2))

    def test_first_record_must_be_zero(self):
        with pytest.raises(RecordOrderError):
            StateRecorder().record(1, 1, *_state(2))

    def test_two_layers_ten_frames(self, small_lstm_cfg):
        rec = StateRecorder()
        frames = np.random.default_rng(0).standard_normal((10, 3))
        run_forward(small_lstm_cfg, init_params(small_lstm_cfg), frames, recorder=rec)
        assert len(rec) == 20
        assert [tr.layer for tr in rec.traces] == [0, 1]

    def test_sampled_units_fixed_across_sequences(self):
        cfg = NetworkConfig(cell_kind="gru", layers=1, input_dim=3, hidden_dim=512, output_dim=2, seed=0)
        params = init_params(cfg)
        rec = StateRecorder(sample_units=50, seed=7)
        rng = np.random.default_rng(1)
        for seq_id in range(3):
            rec.begin_sequence(seq_id)
            run_forward(cfg, params, rng.standard_normal((4, 3)), recorder=rec)
        traces = rec.traces_for_layer(0)
        assert len(traces) == 3
        assert traces[0].units == traces[1].units == traces[2].units
        assert len(traces[0].units) == 50 and traces[0].width == 50
        assert list(traces[0].units) == sorted(set(traces[0].units))

    def test_sample_larger_than_layer_keeps_all(self):
        rec = StateRecorder(sample_units=10)
        assert rec.unit_indices(0, 4) is None

    def test_invalid_sample_size(self):
        with pytest.raises(ValueError):
            StateRecorder(sample_units=0)

    @pytest.mark.parametrize("kind", ["lstm", "gru", "lazy_lstm"])
    def test_recording_does_not_perturb_outputs(self, kind, seq_3d):
        cfg = NetworkConfig(cell_kind=kind, layers=2, input_dim=3, hidden_dim=4, output_dim=3, seed=4)
        params = init_params(cfg)
        plain, _ = stack_forward(cfg, params, seq_3d)
        watched, _ = stack_forward(cfg, params, seq_3d, recorder=StateRecorder(sample_units=2, seed=1))
        np.testing.assert_array_equal(plain, watched)

    def test_recorder_matches_tape(self, small_gru_cfg, seq_3d):
        rec = StateRecorder()
        _, traces = stack_forward(small_gru_cfg, init_params(small_gru_cfg), seq_3d, recorder=rec)
        assert rec.traces == traces


class TestTraceFiles:
    """JSONL export/import."""

    def _trace(self, cfg, seq):
        rec = StateRecorder(sample_units=3, seed=2)
        rec.begin_sequence("utt-1")
        run_forward(cfg, init_params(cfg), seq, recorder=rec)
        return rec.traces_for_layer(1)[0]

    def test_round_trip_is_exact(self, tmp_path, small_lstm_cfg, seq_3d):
        trace = self._trace(small_lstm_cfg, seq_3d)
        path = export_trace(trace, tmp_path / "traces" / "layer1.jsonl")
        assert import_trace(path) == trace

    def test_one_line_per_step(self, tmp_path, small_lstm_cfg, seq_3d):
        trace = self._trace(small_lstm_cfg, seq_3d)
        lines = export_trace(trace, tmp_path / "t.jsonl").read_text().splitlines()
        assert len(lines) == 7
        first = json.loads(lines[0])
        assert first["seq"] == "utt-1" and first["layer"] == 1 and first["t"] == 0
        assert len(first["c"]) == 3

    def test_empty_trace_is_refused(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        with pytest.raises(ValueError):
            export_trace(StateTrace(layer=0), path)
        assert not path.exists()

    def test_missing_file(self, tmp_path):
        with pytest.raises(TraceIOError) as exc:
            import_trace(tmp_path / "nope.jsonl")
        assert "nope.jsonl" in str(exc.value)

    def test_corrupt_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"seq": 0, "layer": 0}\n')
        with pytest.raises(TraceIOError):
            import_trace(path)

    def test_out_of_order_lines(self, tmp_path, small_lstm_cfg, seq_3d):
        path = export_trace(self._trace(small_lstm_cfg, seq_3d), tmp_path / "t.jsonl")
        lines = path.read_text().splitlines()
        path.write_text("\n".join([lines[1], lines[0]] + lines[2:]) + "\n")
        with pytest.raises(TraceIOError):
            import_trace(path)

    @pytest.mark.parametrize("key", ["c", "m", "g_pre"])
    def test_ragged_widths(self, tmp_path, small_lstm_cfg, seq_3d, key):
        path = export_trace(self._trace(small_lstm_cfg, seq_3d), tmp_path / "t.jsonl")
        lines = path.read_text().splitlines()
        doc = json.loads(lines[3])
        doc[key] = doc[key][:-1]
        lines[3] = json.dumps(doc)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(TraceIOError) as exc:
            import_trace(path)
        assert "line 4" in str(exc.value) and key in str(exc.value)

    def test_unit_list_disagrees_with_width(self, tmp_path, small_lstm_cfg, seq_3d):
        path = export_trace(self._trace(small_lstm_cfg, seq_3d), tmp_path / "t.jsonl")
        lines = path.read_text().splitlines()
        doc = json.loads(lines[0])
        doc["units"] = doc["units"] + [99]
        lines[0] = json.dumps(doc)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(TraceIOError) as exc:
            import_trace(path)
        assert "line 1" in str(exc.value)
