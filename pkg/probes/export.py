"""CSV writers for probe reports."""

from __future__ import annotations
import csv
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from probes.reports import HistogramReport, PerturbationReport, TraceProjection

PathLike = Union[str, Path]

HISTOGRAM_COLUMNS = ("layer", "unit", "bin_lo", "bin_hi", "count")
TRACE_COLUMNS = ("layer", "t", "x", "y")
SMOOTHNESS_COLUMNS = ("layer", "smoothness")
PERTURBATION_COLUMNS = ("layer", "unit", "t_aligned", "abs_delta")
DECAY_COLUMNS = ("layer", "unit", "decay_len")


def _write_rows(path: PathLike, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def sidecar_path(path: PathLike, suffix: str) -> Path:
    """`trace.csv` -> `trace_<suffix>.csv`"""
    path = Path(path)
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.csv'}")


def write_histogram_csv(reports: Sequence[HistogramReport], path: PathLike) -> Path:
    def rows():
        for rep in reports:
            for unit, counts in zip(rep.units, rep.unit_counts):
                for b, count in enumerate(counts):
                    yield rep.layer, unit, float(rep.edges[b]), float(rep.edges[b + 1]), int(count)

    return _write_rows(path, HISTOGRAM_COLUMNS, rows())


def write_trace_csv(projections: Sequence[TraceProjection], path: PathLike) -> List[Path]:
    """Points to `path`, one smoothness row per layer to the `_smoothness` sidecar."""
    points = _write_rows(
        path,
        TRACE_COLUMNS,
        (
            (proj.layer, t, float(x), float(y))
            for proj in projections
            for t, (x, y) in enumerate(proj.points)
        ),
    )
    side = _write_rows(
        sidecar_path(path, "smoothness"),
        SMOOTHNESS_COLUMNS,
        ((proj.layer, float(proj.smoothness)) for proj in projections),
    )
    return [points, side]


def write_perturbation_csv(report: PerturbationReport, path: PathLike) -> List[Path]:
    """|Δc| rows to `path`, per-unit decay lengths to the `_decay` sidecar."""
    deltas = _write_rows(
        path,
        PERTURBATION_COLUMNS,
        (
            (lp.layer, unit, t, float(lp.delta[unit, t]))
            for lp in report.layers
            for unit in range(lp.delta.shape[0])
            for t in range(lp.delta.shape[1])
        ),
    )
    decay = _write_rows(
        sidecar_path(path, "decay"),
        DECAY_COLUMNS,
        ((lp.layer, unit, int(d)) for lp in report.layers for unit, d in enumerate(lp.unit_decay)),
    )
    return [deltas, decay]


def write_table_csv(rows: Sequence[dict], path: PathLike, columns: Optional[Sequence[str]] = None) -> Path:
    """Generic dict rows; columns default to the keys of the first row."""
    if columns is None:
        if not rows:
            raise ValueError("no rows to write and no columns given")
        columns = list(rows[0].keys())
    return _write_rows(path, columns, ([row[c] for c in columns] for row in rows))
