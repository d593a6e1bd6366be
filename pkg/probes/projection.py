"""
Temporal traces: 2-D projections of a layer's cell trajectory and a
smoothness score computed in the full unit space.

Smoothness is the mean step length ‖c_{t+1} − c_t‖ divided by the mean
distance of the frames from their centroid, so it is unchanged by scaling
the cell values and comparable between bounded and unbounded cells. Lower
means smoother.
"""

from __future__ import annotations
import logging
from enum import Enum
from typing import Dict, Sequence

import numpy as np

from config import settings
from instrumentation.trace import StateTrace
from probes.reports import ProbeError, TraceProjection

logger = logging.getLogger(__name__)

MIN_PROJECTION_FRAMES = 3
TSNE_PERPLEXITY = 30.0
TSNE_ITERATIONS = 1000


class ProjectionMethod(str, Enum):
    PCA = "pca"
    TSNE = "tsne"


def trace_smoothness(trace: StateTrace) -> float:
    """Normalised step length of the cell trajectory; 0 for a constant trace."""
    if len(trace) < 2:
        raise ProbeError(f"smoothness needs >= 2 frames, trace has {len(trace)}")
    cells = trace.cells()
    steps = float(np.mean(np.linalg.norm(np.diff(cells, axis=0), axis=1)))
    spread = float(np.mean(np.linalg.norm(cells - cells.mean(axis=0), axis=1)))
    if spread == 0.0 or steps == 0.0:
        return 0.0
    return steps / spread


def layer_smoothness_profile(traces: Sequence[StateTrace]) -> Dict[int, float]:
    """Mean smoothness per layer over every trace with at least two frames."""
    per_layer: Dict[int, list] = {}
    for tr in traces:
        if len(tr) >= 2:
            per_layer.setdefault(tr.layer, []).append(trace_smoothness(tr))
    if not per_layer:
        raise ProbeError("no trace has enough frames for a smoothness profile")
    return {layer: float(np.mean(vals)) for layer, vals in sorted(per_layer.items())}


def pca_2d(cells: np.ndarray):
    """Top-2 principal projection; returns (points T×2, component variances)."""
    centred = cells - cells.mean(axis=0)
    cov = centred.T @ centred / (cells.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:2]
    components = evecs[:, order]
    variances = evals[order]
    # sign convention: largest-magnitude loading positive
    for k in range(components.shape[1]):
        lead = int(np.argmax(np.abs(components[:, k])))
        if components[lead, k] < 0:
            components[:, k] = -components[:, k]
    points = centred @ components
    if points.shape[1] < 2:
        points = np.hstack([points, np.zeros((points.shape[0], 2 - points.shape[1]))])
        variances = np.concatenate([variances, np.zeros(2 - variances.shape[0])])
    return points, (float(max(variances[0], 0.0)), float(max(variances[1], 0.0)))


def _tsne_2d(cells: np.ndarray, seed: int) -> np.ndarray:
    try:
        from sklearn.manifold import TSNE
    except ImportError as e:
        raise ProbeError("t-SNE projection needs scikit-learn (pip install 'gatelab[tsne]')") from e

    frames = cells.shape[0]
    # sklearn requires perplexity < n_samples
    perplexity = min(TSNE_PERPLEXITY, max(1.0, (frames - 1) / 3.0))
    tsne = TSNE(
        n_components=2,
        perplexity=perplexity,
        method="exact",
        init="pca",
        max_iter=TSNE_ITERATIONS,
        random_state=seed,
    )
    return np.asarray(tsne.fit_transform(cells), dtype=np.float64)


def project_trace(
    trace: StateTrace,
    method: ProjectionMethod | str = ProjectionMethod.PCA,
    seed: int = 0,
) -> TraceProjection:
    """
    Project one trace's cell vectors to 2-D.

    Args:
        trace: layer trace with at least 3 frames
        method: "pca" (deterministic) or "tsne" (optional scikit-learn extra)
        seed: t-SNE random state

    Raises:
        ProbeError: Too few frames, too many frames for t-SNE, or an unknown method
    """
    try:
        method = ProjectionMethod(method)
    except ValueError as e:
        raise ProbeError(f"unknown projection method {method!r}") from e
    if len(trace) < MIN_PROJECTION_FRAMES:
        raise ProbeError(
            f"projection needs >= {MIN_PROJECTION_FRAMES} frames, trace has {len(trace)}"
        )

    cells = trace.cells()
    explained = None
    if method is ProjectionMethod.PCA:
        points, explained = pca_2d(cells)
    else:
        if len(trace) > settings.TSNE_MAX_FRAMES:
            raise ProbeError(
                f"t-SNE is limited to {settings.TSNE_MAX_FRAMES} frames, trace has {len(trace)}"
            )
        points = _tsne_2d(cells, seed)

    smooth = trace_smoothness(trace)
    logger.debug(f"projected layer {trace.layer} ({method.value}): {len(trace)} frames, smoothness {smooth:.3f}")
    return TraceProjection(
        layer=trace.layer,
        method=method.value,
        points=points,
        smoothness=smooth,
        seq_id=trace.seq_id,
        explained_variance=explained,
    )
