"""Pipeline configuration: JSON files validated against a strict schema.

Unknown keys are rejected, every violation is reported with its field
path, and saving a loaded config echoes all defaults back, so
``save(load(c))`` is idempotent. The full schema is documented in the
README.
"""

from __future__ import annotations

import json
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError

TASKS = ("cws", "pos", "ner", "dep", "sdp", "srl")
TASK_INDEX = {name: i for i, name in enumerate(TASKS)}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EncoderSettings(_Strict):
    width: int = Field(64, gt=0)
    layers: int = Field(2, gt=0)
    heads: int = Field(4, gt=0)
    max_len: int = Field(128, gt=2)
    ffn_width: int = Field(128, gt=0)
    dropout: float = Field(0.1, ge=0.0, lt=1.0)


class HeadSettings(_Strict):
    arc_dim: int = Field(64, gt=0)
    rel_dim: int = Field(32, gt=0)
    srl_dim: int = Field(48, gt=0)
    ner_attention_layers: int = Field(1, ge=0)
    ner_use_relative: bool = True
    single_root: bool = False


class OptimizerSettings(_Strict):
    lr_teacher: float = Field(1e-4, gt=0)
    lr_student: float = Field(1e-4, gt=0)
    lr_crf: float = Field(1e-3, gt=0)
    grad_clip: float = Field(1.0, gt=0)
    warmup_proportion: float = Field(0.02, gt=0.0, lt=1.0)
    weight_decay: float = Field(0.01, ge=0)
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    eps: float = Field(1e-6, gt=0)


class TrainSettings(_Strict):
    teacher_epochs: int = Field(30, gt=0)
    student_steps: int = Field(4000, gt=0)
    log_every: int = Field(200, gt=0)


class TaskSettings(_Strict):
    train: str
    format: str = "conllu"
    labels: list[str] | None = None


class PipelineConfig(_Strict):
    seed: int = 0
    output_dir: str = "runs/default"
    teacher_dir: str | None = None
    vocab_min_count: int = Field(1, gt=0)
    encoder: EncoderSettings = EncoderSettings()
    heads: HeadSettings = HeadSettings()
    optimizer: OptimizerSettings = OptimizerSettings()
    train: TrainSettings = TrainSettings()
    tasks: dict[str, TaskSettings] = Field(default_factory=dict)

    def task_names(self) -> list[str]:
        return [t for t in TASKS if t in self.tasks]

    def resolved_teacher_dir(self) -> Path:
        return Path(self.teacher_dir) if self.teacher_dir else Path(self.output_dir) / "teachers"


def _check_tasks(config: PipelineConfig) -> None:
    unknown = [t for t in config.tasks if t not in TASKS]
    if unknown:
        raise ConfigError(f"unknown task(s) {unknown}; valid tasks are {list(TASKS)}")
    from .data import FORMATS

    for name, task in config.tasks.items():
        if task.format not in FORMATS:
            raise ConfigError(f"tasks.{name}.format: unknown format {task.format!r}")


def config_from_dict(data: dict) -> PipelineConfig:
    try:
        config = PipelineConfig.model_validate(data)
    except ValidationError as exc:
        lines = [f"  {'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
                 for err in exc.errors()]
        raise ConfigError("invalid configuration:\n" + "\n".join(lines)) from exc
    _check_tasks(config)
    return config


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    return config_from_dict(data)


def save_config(config: PipelineConfig, path) -> None:
    """Write the config with every default filled in."""
    Path(path).write_text(
        json.dumps(config.model_dump(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8")
