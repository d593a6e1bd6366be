"""
Finite-difference gradient checker.

Every scalar parameter is perturbed by ±eps and the central difference
(L+ - L-) / (2 eps) is compared with the analytic BPTT gradient using
    rel = |a - n| / max(1e-8, |a| + |n|).

The perturbed losses are evaluated in numpy's extended precision (longdouble)
so the oracle's own round-off stays well below the comparison tolerance; the
analytic side runs in float64 as in training.
"""

from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from autodiff.bptt import bptt, sequence_loss
from autodiff.losses import LossKind
from cells.network import NetworkConfig, init_params

logger = logging.getLogger(__name__)

EPS_RANGE = (1e-7, 1e-3)
REL_FLOOR = 1e-8
MAX_HIDDEN = 8
MAX_FRAMES = 10


@dataclass(frozen=True)
class GradCheckReport:
    """Outcome of one gradient check."""
    max_rel_err: float
    offending_param: str
    passed: bool
    checked: int
    eps: float
    tol: float

    def to_dict(self) -> dict:
        return {
            "max_rel_err": self.max_rel_err,
            "offending_param": self.offending_param,
            "passed": self.passed,
            "checked": self.checked,
            "eps": self.eps,
            "tol": self.tol,
        }


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(REL_FLOOR, abs(analytic) + abs(numeric))


def random_problem(cfg: NetworkConfig, seed: int, seq_len: int):
    """Seeded random frames and labels for a check."""
    rng = np.random.default_rng([seed, 1])
    frames = rng.standard_normal((seq_len, cfg.input_dim))
    labels = rng.integers(0, cfg.output_dim, size=seq_len)
    return frames, labels


def grad_check(
    cfg: NetworkConfig,
    seed: int,
    eps: float = 1e-5,
    tol: float = 1e-5,
    seq_len: int = 6,
    loss: LossKind = LossKind.CROSS_ENTROPY,
    weights: Optional[np.ndarray] = None,
) -> GradCheckReport:
    """
    Compare analytic and central-difference gradients on a seeded random net.

    Args:
        cfg: network shape (its seed is replaced by `seed`)
        seed: seeds both initialisation and the random sequence
        eps: perturbation in [1e-7, 1e-3]
        tol: pass threshold on the max relative error

    Returns:
        GradCheckReport with the worst entry
    """
    lo, hi = EPS_RANGE
    if not (lo <= eps <= hi):
        raise ValueError(f"eps must lie in [{lo}, {hi}], got {eps}")
    if cfg.hidden_dim > MAX_HIDDEN or seq_len > MAX_FRAMES:
        logger.warning(
            f"grad check on hidden={cfg.hidden_dim}, frames={seq_len} exceeds the "
            f"{MAX_HIDDEN}/{MAX_FRAMES} sizing; expect a long run"
        )

    cfg = cfg.model_copy(update={"seed": seed})
    params = init_params(cfg)
    frames, labels = random_problem(cfg, seed, seq_len)
    _, analytic = bptt(cfg, params, frames, labels, loss=loss, weights=weights)

    ext = np.longdouble
    flat = params.astype(ext).tensors()
    frames_ext = frames.astype(ext)
    step = ext(eps)
    template = params.astype(ext)
    analytic_flat = analytic.tensors()

    worst, worst_name, checked = 0.0, "", 0
    for name, arr in flat.items():
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + step
            up = sequence_loss(cfg, template.from_tensors(flat), frames_ext, labels, loss, weights)
            arr[idx] = orig - step
            down = sequence_loss(cfg, template.from_tensors(flat), frames_ext, labels, loss, weights)
            arr[idx] = orig

            numeric = float((up - down) / (2 * step))
            err = relative_error(float(analytic_flat[name][idx]), numeric)
            checked += 1
            if err > worst or not worst_name:
                worst = err
                worst_name = f"{name}[{','.join(str(i) for i in idx)}]"

    report = GradCheckReport(
        max_rel_err=worst,
        offending_param=worst_name,
        passed=worst <= tol,
        checked=checked,
        eps=eps,
        tol=tol,
    )
    logger.info(
        f"grad check {cfg.cell_kind.value} residual={cfg.residual} seed={seed}: "
        f"max_rel_err={worst:.3e} at {worst_name}"
    )
    return report
