"""GateLab persistence: model files and experiment documents."""

from persistence.experiment import (
    RESOLVED_CONFIG_NAME,
    DataRef,
    ExperimentConfig,
    ExperimentConfigError,
    ProbeRunConfig,
    write_resolved_config,
)
from persistence.model_file import (
    FORMAT_VERSION,
    ModelDimensionError,
    ModelFileError,
    ModelSchemaError,
    ModelVersionError,
    load_model,
    read_metadata,
    save_model,
)

__all__ = [
    "FORMAT_VERSION",
    "RESOLVED_CONFIG_NAME",
    "DataRef",
    "ExperimentConfig",
    "ExperimentConfigError",
    "ProbeRunConfig",
    "ModelDimensionError",
    "ModelFileError",
    "ModelSchemaError",
    "ModelVersionError",
    "load_model",
    "read_metadata",
    "save_model",
    "write_resolved_config",
]
