"""
Side-by-side probe summaries for several trained models.

For every model and layer the summary carries training-set loss and frame
accuracy, mean trace smoothness, the median perturbation decay length and
the histogram concentration fractions, which is enough to state
"GRU traces are rougher" or "LSTM remembers noise longer" numerically.
"""

from __future__ import annotations
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from autodiff.losses import LossKind
from cells.network import NetworkConfig, run_forward
from cells.params import NetworkParams
from instrumentation.recorder import StateRecorder
from instrumentation.trace import StateTrace
from probes.histogram import activation_histogram
from probes.perturbation import perturbation_probe
from probes.projection import ProjectionMethod, layer_smoothness_profile
from training.tasks import ToyDataset
from training.trainer import evaluate

logger = logging.getLogger(__name__)

NamedModel = Tuple[str, NetworkConfig, NetworkParams]


class ProbeConfig(BaseModel):
    """Probe parameters shared by every probe command."""
    model_config = ConfigDict(extra="forbid")

    num_sequences: int = Field(default=8, ge=1, description="Dataset sequences fed to the probes")
    sample_units: Optional[int] = Field(default=None, ge=1, description="Recorded units per layer")
    units_per_layer: int = Field(default=50, ge=1)
    bins: int = Field(default=40, ge=1)
    clip: float = Field(default=10.0, gt=0.0)
    method: ProjectionMethod = Field(default=ProjectionMethod.PCA)
    noise_pos: int = Field(default=20, ge=0)
    noise_len: int = Field(default=10, ge=0)
    noise_std: float = Field(default=1.0, ge=0.0)
    epsilon: float = Field(default=0.01, gt=0.0)
    sustain: int = Field(default=5, ge=1)
    seed: int = Field(default=0, ge=0)


def collect_traces(
    cfg: NetworkConfig,
    params: NetworkParams,
    dataset: ToyDataset,
    probe: ProbeConfig,
) -> List[StateTrace]:
    """Record the first probe.num_sequences sequences of a dataset."""
    recorder = StateRecorder(sample_units=probe.sample_units, seed=probe.seed)
    for seq_id, (frames, _) in enumerate(dataset.sequences[: probe.num_sequences]):
        recorder.begin_sequence(seq_id)
        run_forward(cfg, params, frames, recorder=recorder)
    return recorder.traces


def median_decay(
    cfg: NetworkConfig,
    params: NetworkParams,
    dataset: ToyDataset,
    probe: ProbeConfig,
) -> dict:
    """Median layer decay length over the probed sequences (insertion point clamped per sequence)."""
    per_layer: dict = {}
    for k, (frames, _) in enumerate(dataset.sequences[: probe.num_sequences]):
        report = perturbation_probe(
            params,
            cfg,
            frames,
            noise_pos=min(probe.noise_pos, frames.shape[0] - 1),
            noise_len=probe.noise_len,
            noise_std=probe.noise_std,
            epsilon=probe.epsilon,
            seed=probe.seed + k,
            sustain=probe.sustain,
        )
        for layer, d in report.decay_lengths().items():
            per_layer.setdefault(layer, []).append(d)
    return {layer: float(np.median(v)) for layer, v in per_layer.items()}


def compare_models(
    models: Sequence[NamedModel],
    dataset: ToyDataset,
    probe: Optional[ProbeConfig] = None,
    loss: LossKind = LossKind.CROSS_ENTROPY,
) -> List[dict]:
    """One summary row per (model, layer)."""
    probe = probe or ProbeConfig()
    rows = []
    for name, cfg, params in models:
        mean_loss, acc = evaluate(cfg, params, dataset, loss)
        traces = collect_traces(cfg, params, dataset, probe)
        smooth = layer_smoothness_profile(traces)
        decay = median_decay(cfg, params, dataset, probe)
        for layer in range(cfg.layers):
            hist = activation_histogram(
                traces, layer, probe.units_per_layer, probe.bins, probe.clip, probe.seed
            )
            rows.append(
                {
                    "model": name,
                    "cell": hist.kind,
                    "layer": layer,
                    "loss": mean_loss,
                    "frame_acc": acc,
                    "smoothness": smooth.get(layer, 0.0),
                    "median_decay": decay[layer],
                    "near_zero": hist.near_zero_fraction,
                    "near_bound": hist.near_bound_fraction,
                }
            )
        logger.info(f"compared {name}: loss={mean_loss:.4f} acc={acc:.3f}")
    return rows


def memory_metrics(
    cfg: NetworkConfig,
    params: NetworkParams,
    dataset: ToyDataset,
    probe: ProbeConfig,
    layer: int = 0,
) -> dict:
    """Trace smoothness and median decay length of one layer."""
    traces = collect_traces(cfg, params, dataset, probe)
    return {
        "smoothness": layer_smoothness_profile(traces).get(layer, 0.0),
        "median_decay": median_decay(cfg, params, dataset, probe)[layer],
    }
