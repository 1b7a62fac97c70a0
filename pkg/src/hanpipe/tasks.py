"""Per-task adapters: gold targets, losses, and decoding.

Each adapter turns an AnnotatedSentence into training targets for its
head, computes the (optionally teacher-mixed) loss, and decodes model
scores back into annotation layers. Word-level tasks consume the first
character's hidden row per word; the parser heads prepend the sequence
start row as the virtual root.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from . import decoders, losses
from .autodiff import Tensor
from .data import AnnotatedSentence, SrlFrame
from .encoder import EncodedSequence
from .errors import ContractError

BMES_LABELS = ["B", "M", "E", "S"]


def word_rows(enc: EncodedSequence, words: Sequence[tuple[int, int]]) -> Tensor:
    """First-character hidden row per word."""
    return enc.hidden[[s + 1 for s, _ in words]]


def parse_rows(enc: EncodedSequence, words: Sequence[tuple[int, int]]) -> Tensor:
    """Virtual-root row (sequence start) followed by the word rows."""
    return enc.hidden[[0] + [s + 1 for s, _ in words]]


def _bio_labels(kinds: set[str]) -> list[str]:
    out = ["O"]
    for kind in sorted(kinds):
        out.extend([f"B-{kind}", f"I-{kind}"])
    return out


class CwsAdapter:
    name = "cws"
    word_level = False

    def labels_from_corpus(self, sentences) -> list[str]:
        return list(BMES_LABELS)

    def prepare(self, sent: AnnotatedSentence, labels: list[str]):
        if sent.words is None:
            raise ContractError("cws training needs word segmentation")
        index = {l: i for i, l in enumerate(labels)}
        return [index[l] for l in decoders.spans_to_bmes(sent.words)]

    def loss(self, model, sent, target, lam=1.0, teacher=None, training=False, rng=None):
        logits = model.heads["cws"].logits(model.encode(sent.text, training, rng).content_rows())
        t_logits = None
        if teacher is not None:
            with ad.no_grad():
                t_logits = teacher.heads["cws"].logits(
                    teacher.encode(sent.text).content_rows()).data
        return losses.tag_loss(logits, target, t_logits, lam)

    def decode(self, model, enc: EncodedSequence, words=None) -> list[tuple[int, int]]:
        with ad.no_grad():
            logits = model.heads["cws"].logits(enc.content_rows()).data
        labels = [model.labels["cws"][i] for i in np.argmax(logits, axis=1)]
        return decoders.bmes_to_spans(labels)

    def apply(self, sent: AnnotatedSentence, decoded) -> None:
        sent.words = decoded


class PosAdapter:
    name = "pos"
    word_level = True

    def labels_from_corpus(self, sentences) -> list[str]:
        return sorted({t for s in sentences for t in s.pos or []})

    def prepare(self, sent, labels):
        if sent.words is None or sent.pos is None:
            raise ContractError("pos training needs segmented, tagged sentences")
        index = {l: i for i, l in enumerate(labels)}
        return [index[t] for t in sent.pos]

    def loss(self, model, sent, target, lam=1.0, teacher=None, training=False, rng=None):
        enc = model.encode(sent.text, training, rng)
        logits = model.heads["pos"].logits(word_rows(enc, sent.words))
        t_logits = None
        if teacher is not None:
            with ad.no_grad():
                t_logits = teacher.heads["pos"].logits(
                    word_rows(teacher.encode(sent.text), sent.words)).data
        return losses.tag_loss(logits, target, t_logits, lam)

    def decode(self, model, enc, words) -> list[str]:
        with ad.no_grad():
            logits = model.heads["pos"].logits(word_rows(enc, words)).data
        return [model.labels["pos"][i] for i in np.argmax(logits, axis=1)]

    def apply(self, sent, decoded) -> None:
        sent.pos = decoded


class NerAdapter:
    name = "ner"
    word_level = False

    def labels_from_corpus(self, sentences) -> list[str]:
        return _bio_labels({t for s in sentences for _, _, t in s.entities or []})

    def prepare(self, sent, labels):
        if sent.entities is None:
            raise ContractError("ner training needs entity annotation")
        index = {l: i for i, l in enumerate(labels)}
        tags = decoders.entities_to_bio(sent.entities, len(sent.text))
        return [index[t] for t in tags]

    def loss(self, model, sent, target, lam=1.0, teacher=None, training=False, rng=None):
        logits = model.heads["ner"].logits(model.encode(sent.text, training, rng),
                                           training=training, rng=rng)
        t_logits = None
        if teacher is not None:
            with ad.no_grad():
                t_logits = teacher.heads["ner"].logits(teacher.encode(sent.text)).data
        return losses.tag_loss(logits, target, t_logits, lam)

    def decode(self, model, enc, words=None) -> list[tuple[int, int, str]]:
        with ad.no_grad():
            logits = model.heads["ner"].logits(enc).data
        labels = [model.labels["ner"][i] for i in np.argmax(logits, axis=1)]
        return decoders.bio_to_entities(labels)

    def apply(self, sent, decoded) -> None:
        sent.entities = decoded


@dataclass
class _TreeTarget:
    heads: list[int]
    rels: list[int]


class DepAdapter:
    name = "dep"
    word_level = True

    def labels_from_corpus(self, sentences) -> list[str]:
        return sorted({r for s in sentences for r in s.rels or []})

    def prepare(self, sent, labels):
        if sent.words is None or sent.heads is None:
            raise ContractError("dep training needs segmented, parsed sentences")
        index = {l: i for i, l in enumerate(labels)}
        return _TreeTarget(heads=list(sent.heads), rels=[index[r] for r in sent.rels])

    def loss(self, model, sent, target, lam=1.0, teacher=None, training=False, rng=None):
        head = model.heads["dep"]
        rows = parse_rows(model.encode(sent.text, training, rng), sent.words)
        scores = head.arc.scores(rows)
        rel_scores = head.rel.label_scores(rows)
        cells = [(h, d) for d, h in enumerate(target.heads, start=1)]
        t_scores = t_rels = None
        if teacher is not None:
            with ad.no_grad():
                t_rows = parse_rows(teacher.encode(sent.text), sent.words)
                t_scores = teacher.heads["dep"].arc.scores(t_rows).data
                t_rels = [t.data for t in teacher.heads["dep"].rel.label_scores(t_rows)]
        return (losses.arc_loss(scores, target.heads, t_scores, lam)
                + losses.label_loss(rel_scores, cells, target.rels, t_rels, lam))

    def decode(self, model, enc, words) -> tuple[list[int], list[str]]:
        head = model.heads["dep"]
        with ad.no_grad():
            rows = parse_rows(enc, words)
            scores = head.arc.scores(rows).data
            rel_stack = np.stack([t.data for t in head.rel.label_scores(rows)])
        heads = decoders.eisner(scores, single_root=model.single_root)
        rels = decoders.assign_labels(heads, rel_stack)
        return heads, [model.labels["dep"][i] for i in rels]

    def apply(self, sent, decoded) -> None:
        sent.heads, sent.rels = decoded


@dataclass
class _GraphTarget:
    matrix: np.ndarray
    mask: np.ndarray
    cells: list[tuple[int, int]]
    rels: list[int]


class SdpAdapter:
    name = "sdp"
    word_level = True

    def labels_from_corpus(self, sentences) -> list[str]:
        return sorted({r for s in sentences for _, _, r in s.sdp or []})

    def prepare(self, sent, labels):
        if sent.words is None or sent.sdp is None:
            raise ContractError("sdp training needs segmented sentences with semantic graphs")
        index = {l: i for i, l in enumerate(labels)}
        n = sent.n_words()
        matrix = np.zeros((n + 1, n + 1))
        mask = np.ones((n + 1, n + 1))
        mask[:, 0] = 0.0
        np.fill_diagonal(mask, 0.0)
        cells, rels = [], []
        for h, d, rel in sent.sdp:
            matrix[h, d] = 1.0
            cells.append((h, d))
            rels.append(index[rel])
        return _GraphTarget(matrix=matrix, mask=mask, cells=cells, rels=rels)

    def loss(self, model, sent, target, lam=1.0, teacher=None, training=False, rng=None):
        head = model.heads["sdp"]
        rows = parse_rows(model.encode(sent.text, training, rng), sent.words)
        scores = head.arc.scores(rows)
        rel_scores = head.rel.label_scores(rows)
        t_scores = t_rels = None
        if teacher is not None:
            with ad.no_grad():
                t_rows = parse_rows(teacher.encode(sent.text), sent.words)
                t_scores = teacher.heads["sdp"].arc.scores(t_rows).data
                t_rels = [t.data for t in teacher.heads["sdp"].rel.label_scores(t_rows)]
        loss = losses.edge_loss(scores, target.matrix, target.mask, t_scores, lam)
        if target.cells:
            loss = loss + losses.label_loss(rel_scores, target.cells, target.rels, t_rels, lam)
        return loss

    def decode(self, model, enc, words) -> list[tuple[int, int, str]]:
        head = model.heads["sdp"]
        with ad.no_grad():
            rows = parse_rows(enc, words)
            probs = head.arc.scores(rows).sigmoid().data
            rel_stack = np.stack([t.data for t in head.rel.label_scores(rows)])
        edges = decoders.sdp_decode(probs, rel_stack)
        return [(h, d, model.labels["sdp"][r]) for h, d, r, _ in edges]

    def apply(self, sent, decoded) -> None:
        sent.sdp = decoded


class SrlAdapter:
    name = "srl"
    word_level = True

    def labels_from_corpus(self, sentences) -> list[str]:
        roles = {"V"}
        for s in sentences:
            for frame in s.srl or []:
                roles.update(r for _, _, r in frame.arguments)
        return _bio_labels(roles)

    def prepare(self, sent, labels):
        if sent.words is None or sent.srl is None:
            raise ContractError("srl training needs segmented sentences with frames")
        index = {l: i for i, l in enumerate(labels)}
        n = sent.n_words()
        chains = [[index["O"]] * n for _ in range(n)]
        for frame in sent.srl:
            spans = [(frame.predicate, frame.predicate + 1, "V")] + list(frame.arguments)
            tags = decoders.entities_to_bio(spans, n)
            chains[frame.predicate] = [index[t] for t in tags]
        return chains

    def loss(self, model, sent, target, lam=1.0, teacher=None, training=False, rng=None):
        head = model.heads["srl"]
        rows = word_rows(model.encode(sent.text, training, rng), sent.words)
        emissions = head.emissions(rows)
        t_emissions = None
        if teacher is not None:
            with ad.no_grad():
                t_rows = word_rows(teacher.encode(sent.text), sent.words)
                t_emissions = [e.data for e in teacher.heads["srl"].emissions(t_rows)]
        return losses.chain_loss(emissions, head.crf, target, t_emissions, lam)

    def decode(self, model, enc, words) -> list[SrlFrame]:
        head = model.heads["srl"]
        labels = model.labels["srl"]
        with ad.no_grad():
            emissions = [e.data for e in head.emissions(word_rows(enc, words))]
        trans, start, end = head.crf.values()
        frames = []
        for i, em in enumerate(emissions):
            tags = [labels[j] for j in decoders.viterbi(em, trans, start, end)]
            if tags[i] != "B-V":
                continue
            args = [(s, e, r) for s, e, r in decoders.bio_to_entities(tags) if r != "V"]
            frames.append(SrlFrame(predicate=i, arguments=args))
        return frames

    def apply(self, sent, decoded) -> None:
        sent.srl = decoded


ADAPTERS = {a.name: a for a in (CwsAdapter(), PosAdapter(), NerAdapter(),
                                DepAdapter(), SdpAdapter(), SrlAdapter())}
