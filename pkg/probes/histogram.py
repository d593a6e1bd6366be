"""
Activation distributions.

Units are sampled once per layer from a seeded generator and their cell
values pooled over every frame of every trace. LSTM-family cells are
unbounded, so values beyond ±clip are clamped onto ±clip before binning;
GRU cells live in (-1, 1) and are always binned over exactly that range.
"""

from __future__ import annotations
import logging
from typing import Sequence

import numpy as np

from cells.state import CellKind
from instrumentation.trace import StateTrace
from probes.reports import HistogramReport, ProbeError

logger = logging.getLogger(__name__)

NEAR_ZERO = 0.1
NEAR_BOUND = 0.9


def activation_histogram(
    traces: Sequence[StateTrace],
    layer: int,
    units_per_layer: int = 50,
    bins: int = 40,
    clip: float = 10.0,
    seed: int = 0,
) -> HistogramReport:
    """
    Per-unit and pooled histograms of cell values for one layer.

    Raises:
        ProbeError: On empty input, non-positive clip/bins, or an unknown layer
    """
    if not traces:
        raise ProbeError("no traces given")
    if clip <= 0:
        raise ProbeError(f"clip must be positive, got {clip}")
    if bins < 1:
        raise ProbeError(f"bins must be >= 1, got {bins}")
    selected = [tr for tr in traces if tr.layer == layer and len(tr) > 0]
    if not selected:
        known = sorted({tr.layer for tr in traces})
        raise ProbeError(f"unknown layer {layer} (traces cover layers {known})")

    kind = selected[0].kind
    width = selected[0].width
    stored = selected[0].units if selected[0].units is not None else tuple(range(width))
    rng = np.random.default_rng([seed, layer])
    take = min(units_per_layer, width)
    cols = np.sort(rng.choice(width, size=take, replace=False))

    values = np.concatenate([tr.cells()[:, cols] for tr in selected], axis=0)
    if kind == CellKind.GRU.value:
        lo, hi = -1.0, 1.0
    else:
        lo, hi = -float(clip), float(clip)
    values = np.clip(values, lo, hi)

    edges = np.linspace(lo, hi, bins + 1)
    counts = np.stack([np.histogram(values[:, k], bins=edges)[0] for k in range(take)])

    mags = np.abs(values)
    report = HistogramReport(
        layer=layer,
        kind=kind,
        units=tuple(int(stored[c]) for c in cols),
        edges=edges,
        unit_counts=counts,
        bounds=(lo, hi),
        observations=int(values.shape[0]),
        near_zero_fraction=float(np.mean(mags < NEAR_ZERO)),
        near_bound_fraction=float(np.mean(mags > NEAR_BOUND * hi)),
    )
    logger.debug(
        f"histogram layer {layer} ({kind}): {take} units × {report.observations} frames, "
        f"near-zero {report.near_zero_fraction:.2f}, near-bound {report.near_bound_fraction:.2f}"
    )
    return report
