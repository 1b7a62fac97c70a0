import numpy as np
import pytest

from hanpipe import Pipeline, toydata
from hanpipe.config import config_from_dict
from hanpipe.data import format_corpus
from hanpipe.errors import ModelError
from hanpipe.params_io import load_params, save_params
from hanpipe.pipeline import PipelineModel
from hanpipe.tasks import ADAPTERS
from hanpipe.trainer import TaskDataset, train
from hanpipe.vocabulary import build_vocab

ALL_TASKS = ("cws", "pos", "ner", "dep", "sdp", "srl")


@pytest.fixture(scope="module")
def tiny_model():
    sents = toydata.generate(12, seed=21)
    config = config_from_dict({
        "seed": 13,
        "encoder": {"width": 32, "layers": 1, "heads": 2, "max_len": 64, "ffn_width": 64},
        "train": {"teacher_epochs": 1, "student_steps": 30, "log_every": 100},
        "tasks": {},
    })
    datasets = {t: TaskDataset(task=t, sentences=sents,
                               labels=ADAPTERS[t].labels_from_corpus(sents))
                for t in ALL_TASKS}
    vocab = build_vocab([s.text for s in sents])
    model, _ = train(config, datasets, vocab, mode="student", total_steps=30)
    return model


class TestAnnotate:
    def test_empty_text(self, tiny_model):
        sent = tiny_model.annotate("")
        assert sent.text == "" and sent.words == [] and sent.entities == []
        assert sent.srl == [] and sent.sdp == [] and sent.heads == []

    def test_structural_contracts_hold(self, tiny_model):
        rng = np.random.default_rng(0)
        chars = [t for t in tiny_model.vocab.tokens[4:]]
        for _ in range(25):
            text = "".join(rng.choice(chars, size=rng.integers(1, 15)))
            sent = tiny_model.annotate(text)  # validate=True raises on violation
            assert sent.violations() == []

    def test_deterministic_bytes(self, tiny_model):
        text = toydata.generate(3, seed=33)[0].text
        a = format_corpus([tiny_model.annotate(text)], "json")
        b = format_corpus([tiny_model.annotate(text)], "json")
        assert a == b

    def test_all_layers_present(self, tiny_model):
        sent = tiny_model.annotate(toydata.generate(3, seed=34)[0].text)
        assert sent.words and sent.pos is not None and sent.heads is not None
        assert sent.sdp is not None and sent.srl is not None and sent.entities is not None


class TestSaveLoad:
    def test_round_trip_bit_exact(self, tiny_model, tmp_path):
        tiny_model.save(tmp_path / "m")
        loaded = PipelineModel.load(tmp_path / "m")
        for name, p in tiny_model.parameters().items():
            np.testing.assert_array_equal(p.data, loaded.parameters()[name].data)
        assert loaded.labels == tiny_model.labels
        assert loaded.vocab.tokens == tiny_model.vocab.tokens

    def test_save_twice_identical_bytes(self, tiny_model, tmp_path):
        tiny_model.save(tmp_path / "a")
        tiny_model.save(tmp_path / "b")
        for name in ("model.json", "params.bin", "vocab.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_loaded_model_annotates_identically(self, tiny_model, tmp_path):
        tiny_model.save(tmp_path / "m")
        loaded = Pipeline.load(tmp_path / "m")
        text = toydata.generate(2, seed=35)[0].text
        assert format_corpus([loaded(text)], "json") == format_corpus(
            [tiny_model.annotate(text)], "json")

    def test_missing_dir_is_model_error(self, tmp_path):
        with pytest.raises(ModelError, match="model.json"):
            PipelineModel.load(tmp_path / "nope")

    def test_version_mismatch_diagnosed(self, tiny_model, tmp_path):
        tiny_model.save(tmp_path / "m")
        meta = (tmp_path / "m" / "model.json")
        meta.write_text(meta.read_text().replace('"format_version": 1', '"format_version": 99'))
        with pytest.raises(ModelError, match="version"):
            PipelineModel.load(tmp_path / "m")

    def test_corrupt_params_diagnosed(self, tiny_model, tmp_path):
        tiny_model.save(tmp_path / "m")
        path = tmp_path / "m" / "params.bin"
        path.write_bytes(path.read_bytes()[:100])
        with pytest.raises(ModelError):
            PipelineModel.load(tmp_path / "m")


class TestParamsContainer:
    def test_bit_exact_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        params = {"a.w": rng.normal(size=(4, 5)), "b": rng.normal(size=(7,)),
                  "c.scalar": np.array(3.25)}
        save_params(tmp_path / "p.bin", params)
        loaded = load_params(tmp_path / "p.bin")
        assert list(loaded) == list(params)
        for name, arr in params.items():
            np.testing.assert_array_equal(arr, loaded[name])
            assert arr.dtype == loaded[name].dtype

    def test_bad_magic_rejected(self, tmp_path):
        (tmp_path / "junk").write_bytes(b"not a container")
        with pytest.raises(ModelError, match="magic"):
            load_params(tmp_path / "junk")
