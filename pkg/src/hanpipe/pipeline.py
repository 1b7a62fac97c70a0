"""The deployable model: shared encoder, task heads, vocab, label sets.

A checkpoint directory is self-contained (config snapshot, parameter
container, vocabulary, label inventories) and loads without any training
data. Annotation stages the six tasks off one encoder pass: segmentation
first, then the word-level heads re-pool over the predicted words.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .config import PipelineConfig, TASKS, config_from_dict
from .data import AnnotatedSentence
from .encoder import EncoderConfig, TransformerEncoder
from .errors import ContractError, ModelError
from .heads import BiaffineScorer, LinearTagHead, NerTagHead, SrlHead
from .params_io import load_params, save_params
from .rngs import INIT, derived_rng
from .tasks import ADAPTERS
from .vocabulary import Vocab

FORMAT_VERSION = 1


class ParserHead:
    """Arc scorer plus labeled scorer, used by both tree and graph parsing."""

    def __init__(self, width, arc_dim, rel_dim, n_rels, rng):
        self.arc = BiaffineScorer(width, arc_dim, rng)
        self.rel = BiaffineScorer(width, rel_dim, rng, n_labels=n_rels)

    def parameters(self):
        out = {f"arc.{k}": v for k, v in self.arc.parameters().items()}
        out.update({f"rel.{k}": v for k, v in self.rel.parameters().items()})
        return out


class PipelineModel:
    def __init__(self, config: PipelineConfig, vocab: Vocab,
                 labels: dict[str, list[str]], tasks: list[str]):
        self.config = config
        self.vocab = vocab
        self.tasks = [t for t in TASKS if t in tasks]
        self.labels = {t: list(labels[t]) for t in self.tasks}
        self.single_root = config.heads.single_root
        self.encoder_config = EncoderConfig(
            vocab_size=len(vocab), width=config.encoder.width, layers=config.encoder.layers,
            heads=config.encoder.heads, max_len=config.encoder.max_len,
            ffn_width=config.encoder.ffn_width, dropout=config.encoder.dropout)
        rng = derived_rng(config.seed, INIT)
        self.encoder = TransformerEncoder(self.encoder_config, rng)
        self.heads = {}
        width, hc = config.encoder.width, config.heads
        for task in self.tasks:
            n = len(self.labels[task])
            if task in ("cws", "pos"):
                self.heads[task] = LinearTagHead(width, n, rng)
            elif task == "ner":
                self.heads[task] = NerTagHead(self.encoder_config, n, rng,
                                              attention_layers=hc.ner_attention_layers,
                                              use_relative=hc.ner_use_relative)
            elif task in ("dep", "sdp"):
                self.heads[task] = ParserHead(width, hc.arc_dim, hc.rel_dim, n, rng)
            elif task == "srl":
                self.heads[task] = SrlHead(width, hc.srl_dim, n, rng)

    # -- parameters ---------------------------------------------------------

    def parameters(self) -> dict[str, Tensor]:
        out = {f"encoder.{k}": v for k, v in self.encoder.parameters().items()}
        for task in self.tasks:
            out.update({f"{task}.{k}": v for k, v in self.heads[task].parameters().items()})
        return out

    def crf_parameter_names(self) -> set[str]:
        return {name for name in self.parameters() if ".crf." in name}

    # -- inference ------------------------------------------------------------

    def encode(self, text: str, training: bool = False, rng=None):
        return self.encoder.encode(self.vocab.encode(text), training=training, rng=rng)

    def annotate(self, text: str, validate: bool = True) -> AnnotatedSentence:
        """Run every available task over one sentence.

        Word-level heads consume the predicted segmentation; without a
        segmentation head they are skipped.
        """
        sent = AnnotatedSentence(text=text)
        with ad.no_grad():
            enc = self.encode(text)
            words = None
            if "cws" in self.heads:
                words = ADAPTERS["cws"].decode(self, enc) if text else []
                sent.words = words
            if "ner" in self.heads:
                sent.entities = ADAPTERS["ner"].decode(self, enc) if text else []
            for task in ("pos", "dep", "sdp", "srl"):
                if task not in self.heads or words is None:
                    continue
                if not words:
                    ADAPTERS[task].apply(sent, [] if task != "dep" else ([], []))
                    continue
                ADAPTERS[task].apply(sent, ADAPTERS[task].decode(self, enc, words))
        if validate:
            problems = sent.violations()
            if problems:
                raise ContractError(f"annotation violates structural contracts: {problems}")
        return sent

    # -- persistence ----------------------------------------------------------

    def save(self, directory) -> None:
        from . import __version__

        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {
            "format_version": FORMAT_VERSION,
            "hanpipe_version": __version__,
            "tasks": self.tasks,
            "config": self.config.model_dump(),
        }
        (directory / "model.json").write_text(
            json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        self.vocab.save(directory / "vocab.txt")
        labels_dir = directory / "labels"
        labels_dir.mkdir(exist_ok=True)
        for task in self.tasks:
            (labels_dir / f"{task}.txt").write_text(
                "\n".join(self.labels[task]) + "\n", encoding="utf-8")
        save_params(directory / "params.bin", self.parameters())

    @classmethod
    def load(cls, directory) -> "PipelineModel":
        directory = Path(directory)
        meta_path = directory / "model.json"
        if not meta_path.exists():
            raise ModelError(f"{directory}: not a model directory (missing model.json)")
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ModelError(f"{meta_path}: corrupt metadata: {exc}") from exc
        version = meta.get("format_version")
        if version != FORMAT_VERSION:
            raise ModelError(
                f"{directory}: model format version {version!r} unsupported "
                f"(this build reads version {FORMAT_VERSION}, "
                f"written by hanpipe {meta.get('hanpipe_version', '?')})")
        config = config_from_dict(meta["config"])
        vocab = Vocab.load(directory / "vocab.txt")
        labels = {}
        for task in meta["tasks"]:
            labels[task] = (directory / "labels" / f"{task}.txt").read_text(
                encoding="utf-8").splitlines()
        model = cls(config, vocab, labels, meta["tasks"])
        stored = load_params(directory / "params.bin")
        params = model.parameters()
        missing = sorted(set(params) - set(stored))
        extra = sorted(set(stored) - set(params))
        if missing or extra:
            raise ModelError(f"{directory}: parameter mismatch; missing {missing[:5]}, "
                             f"unexpected {extra[:5]}")
        for name, tensor in params.items():
            if stored[name].shape != tensor.data.shape:
                raise ModelError(f"{directory}: shape mismatch for {name}: "
                                 f"stored {stored[name].shape}, expected {tensor.data.shape}")
            tensor.data[...] = stored[name]
        return model


class Pipeline:
    """One-line loading and calling: ``Pipeline.load(dir)("他叫汤姆去拿外衣。")``."""

    def __init__(self, model: PipelineModel):
        self.model = model

    @classmethod
    def load(cls, directory) -> "Pipeline":
        return cls(PipelineModel.load(directory))

    def __call__(self, text: str) -> AnnotatedSentence:
        return self.model.annotate(text)

    def annotate_many(self, texts: list[str]) -> list[AnnotatedSentence]:
        return [self.model.annotate(t) for t in texts]
