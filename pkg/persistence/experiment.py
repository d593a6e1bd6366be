"""
Experiment documents: one JSON file holding every knob of a run.

    {"network": {...}, "train": {..., "task": {...}}, "probes": {...},
     "data": null | {"path": str, "sha256": str}}

Every seed lives in the document, so rerunning a document reproduces its
metrics and probe CSVs bit for bit on the same platform. A run trained on a
dataset file records the file's path and digest under "data"; rerunning the
document reads that file again and refuses it if its bytes changed.
"""

from __future__ import annotations
import json
import logging
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from cells.network import NetworkConfig
from probes.compare import ProbeConfig
from training.tasks import TaskConfig, ToyDataset
from training.trainer import TrainConfig
from utils.hashing import config_digest, sha256_hex

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = "config.json"


class ExperimentConfigError(ValueError):
    """Raised when an experiment document cannot be read or validated."""

    pass


class DataRef(BaseModel):
    """A dataset file pinned by its sha256."""
    model_config = ConfigDict(extra="forbid")

    path: str
    sha256: str = Field(pattern=r"^[0-9a-f]{64}$")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "DataRef":
        path = Path(path).resolve()
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise ExperimentConfigError(f"{path}: cannot read dataset: {e}") from e
        return cls(path=str(path), sha256=sha256_hex(raw))

    def load(self) -> ToyDataset:
        """Read the pinned file.

        Raises:
            ExperimentConfigError: If the file is unreadable, changed or not a dataset
        """
        path = Path(self.path)
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise ExperimentConfigError(f"{path}: cannot read dataset: {e}") from e
        digest = sha256_hex(raw)
        if digest != self.sha256:
            raise ExperimentConfigError(
                f"{path}: dataset digest {digest[:12]} does not match recorded {self.sha256[:12]}"
            )
        try:
            return ToyDataset.from_dict(json.loads(raw))
        except (ValueError, KeyError, TypeError) as e:
            raise ExperimentConfigError(f"{path}: not a dataset file: {e}") from e


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    network: NetworkConfig = Field(default_factory=NetworkConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    probes: ProbeConfig = Field(default_factory=ProbeConfig)
    data: Optional[DataRef] = None

    @model_validator(mode="after")
    def _check_shapes(self) -> "ExperimentConfig":
        task = self.train.task
        if task.feature_dim != self.network.input_dim:
            raise ValueError(
                f"task frames are {task.feature_dim}-dim but network.input_dim is {self.network.input_dim}"
            )
        if task.classes != self.network.output_dim:
            raise ValueError(
                f"task has {task.classes} classes but network.output_dim is {self.network.output_dim}"
            )
        return self

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        path = Path(path)
        try:
            return cls.model_validate_json(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ExperimentConfigError(f"{path}: cannot read config: {e}") from e
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(p) for p in first["loc"]) or "<document>"
            raise ExperimentConfigError(f"{path}: {where}: {first['msg']}") from e

    def dataset(self) -> ToyDataset:
        """The pinned dataset file when one is recorded, otherwise the generated task."""
        if self.data is not None:
            return self.data.load()
        return self.train.task.build()

    def digest(self) -> str:
        return config_digest(self)


def write_resolved_config(config: Union[BaseModel, Mapping[str, Any]], out_dir: Union[str, Path]) -> Path:
    """Write the fully defaulted config next to a command's outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / RESOLVED_CONFIG_NAME
    doc = config.model_dump(mode="json") if isinstance(config, BaseModel) else dict(config)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug(f"wrote resolved config to {path}")
    return path


class ProbeRunConfig(BaseModel):
    """Provenance of one probe command: which model, which data, which probe settings."""
    model_config = ConfigDict(extra="forbid")

    probe: str
    model: str
    network: NetworkConfig
    data: Optional[str] = None
    task: Optional[TaskConfig] = None
    sequence: int = Field(default=0, ge=0)
    probes: ProbeConfig = Field(default_factory=ProbeConfig)
