import json

import pytest

from hanpipe.config import PipelineConfig, config_from_dict, load_config, save_config
from hanpipe.errors import ConfigError

MINIMAL = {"tasks": {"cws": {"train": "data/toy/train.conllu"}}}


def test_minimal_config_fills_defaults():
    config = config_from_dict(MINIMAL)
    assert config.encoder.width == 64
    assert config.optimizer.lr_teacher == 1e-4
    assert config.optimizer.lr_student == 1e-4
    assert config.optimizer.lr_crf == 1e-3
    assert config.optimizer.grad_clip == 1.0
    assert config.optimizer.warmup_proportion == 0.02
    assert config.tasks["cws"].format == "conllu"


def test_negative_lr_rejected_with_field_path():
    bad = dict(MINIMAL, optimizer={"lr_teacher": -1.0})
    with pytest.raises(ConfigError, match=r"optimizer\.lr_teacher"):
        config_from_dict(bad)


def test_unknown_keys_rejected_and_all_violations_listed():
    bad = dict(MINIMAL, bogus=1, encoder={"width": -3, "mystery": True})
    with pytest.raises(ConfigError) as err:
        config_from_dict(bad)
    message = str(err.value)
    assert "bogus" in message and "encoder.width" in message and "encoder.mystery" in message


def test_unknown_task_rejected():
    with pytest.raises(ConfigError, match="unknown task"):
        config_from_dict({"tasks": {"parsing": {"train": "x"}}})


def test_unknown_format_rejected():
    with pytest.raises(ConfigError, match="format"):
        config_from_dict({"tasks": {"cws": {"train": "x", "format": "tsv"}}})


def test_save_load_idempotent(tmp_path):
    config = config_from_dict(MINIMAL)
    p1, p2 = tmp_path / "one.json", tmp_path / "two.json"
    save_config(config, p1)
    reloaded = load_config(p1)
    save_config(reloaded, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert reloaded == config


def test_load_reports_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.json")


def test_load_reports_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(path)


def test_task_order_is_canonical():
    config = config_from_dict({"tasks": {
        "srl": {"train": "a"}, "cws": {"train": "b"}, "dep": {"train": "c"}}})
    assert config.task_names() == ["cws", "dep", "srl"]


def test_teacher_dir_defaults_under_output(tmp_path):
    config = config_from_dict(dict(MINIMAL, output_dir=str(tmp_path / "run")))
    assert config.resolved_teacher_dir() == tmp_path / "run" / "teachers"
