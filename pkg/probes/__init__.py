"""GateLab memory probes: activation histograms, temporal traces, noise insertion."""

from probes.claims import CLAIMS, Claim, ClaimOutcome, ClaimVerdict, Relation, evaluate_claims, write_claims
from probes.compare import ProbeConfig, collect_traces, compare_models, median_decay, memory_metrics
from probes.export import (
    sidecar_path,
    write_histogram_csv,
    write_perturbation_csv,
    write_table_csv,
    write_trace_csv,
)
from probes.histogram import activation_histogram
from probes.perturbation import decay_length, perturbation_probe
from probes.projection import (
    ProjectionMethod,
    layer_smoothness_profile,
    pca_2d,
    project_trace,
    trace_smoothness,
)
from probes.reports import (
    HistogramReport,
    LayerPerturbation,
    NoiseSegment,
    PerturbationReport,
    ProbeError,
    TraceProjection,
)

__all__ = [
    "CLAIMS",
    "Claim",
    "ClaimOutcome",
    "ClaimVerdict",
    "HistogramReport",
    "LayerPerturbation",
    "NoiseSegment",
    "PerturbationReport",
    "ProbeConfig",
    "ProbeError",
    "ProjectionMethod",
    "Relation",
    "TraceProjection",
    "activation_histogram",
    "collect_traces",
    "compare_models",
    "decay_length",
    "evaluate_claims",
    "layer_smoothness_profile",
    "median_decay",
    "memory_metrics",
    "pca_2d",
    "perturbation_probe",
    "project_trace",
    "sidecar_path",
    "trace_smoothness",
    "write_claims",
    "write_histogram_csv",
    "write_perturbation_csv",
    "write_table_csv",
    "write_trace_csv",
]
