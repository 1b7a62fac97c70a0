"""Evaluation metrics per task.

Span tasks (CWS, NER, SRL) use exact-match precision/recall/F1; POS gets
token accuracy plus span+tag F1; DEP reports UAS/LAS; SDP labeled-edge
precision/recall/F1. Precision and recall are 0 by convention when their
denominator is empty.
"""

from __future__ import annotations

from .data import AnnotatedSentence
from .errors import DataError


def _safe_div(a: float, b: float) -> float:
    return a / b if b else 0.0


def prf(n_gold: int, n_pred: int, n_hit: int) -> dict[str, float]:
    p = _safe_div(n_hit, n_pred)
    r = _safe_div(n_hit, n_gold)
    return {"precision": p, "recall": r, "f1": _safe_div(2 * p * r, p + r)}


def _set_prf(gold_items: list[set], pred_items: list[set]) -> dict[str, float]:
    n_gold = sum(len(g) for g in gold_items)
    n_pred = sum(len(p) for p in pred_items)
    n_hit = sum(len(g & p) for g, p in zip(gold_items, pred_items))
    return prf(n_gold, n_pred, n_hit)


def check_aligned(gold: list[AnnotatedSentence], pred: list[AnnotatedSentence]) -> None:
    if len(gold) != len(pred):
        raise DataError(f"gold has {len(gold)} sentences, predictions {len(pred)}")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g.text != p.text:
            raise DataError(f"sentence {i} differs between gold and predictions")


def _items(task: str, sent: AnnotatedSentence) -> set:
    if task == "cws":
        return set(sent.words or [])
    if task == "pos":
        return {(span, tag) for span, tag in zip(sent.words or [], sent.pos or [])}
    if task == "ner":
        return set(sent.entities or [])
    if task == "sdp":
        return set(sent.sdp or [])
    if task == "srl":
        return {(f.predicate, s, e, r) for f in sent.srl or [] for s, e, r in f.arguments} | {
            (f.predicate, "V") for f in sent.srl or []}
    raise DataError(f"no item extractor for task {task!r}")


def evaluate(task: str, gold: list[AnnotatedSentence], pred: list[AnnotatedSentence]
             ) -> dict[str, float]:
    """Scores for one task over aligned gold and predicted corpora."""
    check_aligned(gold, pred)
    if task == "dep":
        total = correct_heads = correct_labeled = 0
        for i, (g, p) in enumerate(zip(gold, pred)):
            if g.heads is None:
                continue
            if p.heads is None or len(p.heads) != len(g.heads):
                raise DataError(f"sentence {i}: dependency predictions missing or misaligned")
            for gh, gr, ph, pr in zip(g.heads, g.rels, p.heads, p.rels):
                total += 1
                if gh == ph:
                    correct_heads += 1
                    if gr == pr:
                        correct_labeled += 1
        return {"uas": _safe_div(correct_heads, total), "las": _safe_div(correct_labeled, total)}
    if task == "pos":
        scores = _set_prf([_items(task, s) for s in gold], [_items(task, s) for s in pred])
        scores["accuracy"] = scores["recall"]  # equals token accuracy on shared segmentation
        return scores
    if task in ("cws", "ner", "sdp", "srl"):
        return _set_prf([_items(task, s) for s in gold], [_items(task, s) for s in pred])
    raise DataError(f"unknown evaluation task {task!r}")


def headline(task: str, scores: dict[str, float]) -> float:
    """The single number used for teacher/student comparisons."""
    return scores["las"] if task == "dep" else scores["f1"]
