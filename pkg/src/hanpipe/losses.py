"""Per-task losses with annealed teacher mixing.

Every loss has the form ``lam * CE(gold) + (1 - lam) * CE(teacher)`` where
the teacher term matches soft targets of the same shape: per-position
label distributions for tagging, per-dependent head distributions plus
per-arc label distributions for tree parsing, per-cell Bernoulli targets
for graph parsing, and per-position emission distributions for the
CRF-decoded head. Teacher outputs are plain arrays, so gradients flow
only into the student.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ShapeError
from .heads import CrfParams, crf_log_likelihood


def _softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def _check_teacher(student: Tensor, teacher: np.ndarray) -> None:
    if teacher.shape != student.shape:
        raise ShapeError(f"teacher output {teacher.shape} does not match student {student.shape}")


def tag_loss(logits: Tensor, gold: list[int], teacher_logits: np.ndarray | None = None,
             lam: float = 1.0) -> Tensor:
    """Mean cross-entropy over positions, optionally mixed with soft targets."""
    n = logits.shape[0]
    logp = logits.log_softmax(axis=-1)
    gold_ce = -(logp[(np.arange(n), list(gold))].mean())
    if teacher_logits is None:
        return gold_ce
    _check_teacher(logits, teacher_logits)
    soft = Tensor(_softmax(teacher_logits))
    soft_ce = -((soft * logp).sum() / n)
    return gold_ce * lam + soft_ce * (1.0 - lam)


def arc_loss(scores: Tensor, gold_heads: list[int], teacher_scores: np.ndarray | None = None,
             lam: float = 1.0) -> Tensor:
    """Head-attachment loss: softmax over candidate heads per dependent."""
    n = len(gold_heads)
    logp = scores.log_softmax(axis=0)
    gold_ce = -(logp[(list(gold_heads), np.arange(1, n + 1))].mean())
    if teacher_scores is None:
        return gold_ce
    _check_teacher(scores, teacher_scores)
    soft = Tensor(_softmax(teacher_scores, axis=0)[:, 1:])
    soft_ce = -((soft * logp[:, 1:]).sum() / n)
    return gold_ce * lam + soft_ce * (1.0 - lam)


def gather_label_logits(label_scores: list[Tensor], cells: list[tuple[int, int]]) -> Tensor:
    """(k, L) logits for k (head, dependent) cells across the label stack."""
    hs = [h for h, _ in cells]
    ds = [d for _, d in cells]
    cols = [t[(hs, ds)].reshape(-1, 1) for t in label_scores]
    return ad.concat(cols, axis=1)


def label_loss(label_scores: list[Tensor], cells: list[tuple[int, int]], gold: list[int],
               teacher_label_scores: list[np.ndarray] | None = None, lam: float = 1.0) -> Tensor:
    logits = gather_label_logits(label_scores, cells)
    teacher = None
    if teacher_label_scores is not None:
        hs = [h for h, _ in cells]
        ds = [d for _, d in cells]
        teacher = np.stack([t[hs, ds] for t in teacher_label_scores], axis=1)
    return tag_loss(logits, gold, teacher, lam)


def edge_loss(scores: Tensor, gold: np.ndarray, mask: np.ndarray,
              teacher_scores: np.ndarray | None = None, lam: float = 1.0) -> Tensor:
    """Per-cell Bernoulli cross-entropy over masked cells, from raw scores.

    Uses the identity BCE(q, sigmoid(s)) = softplus(s) - q * s, which is
    exact for both hard (0/1) and soft teacher targets.
    """
    m = Tensor(mask)
    count = float(mask.sum())
    gold_bce = (((scores.softplus() - Tensor(gold * mask) * scores) * m).sum() / count)
    if teacher_scores is None:
        return gold_bce
    _check_teacher(scores, teacher_scores)
    q = 1.0 / (1.0 + np.exp(-teacher_scores))
    soft_bce = (((scores.softplus() - Tensor(q * mask) * scores) * m).sum() / count)
    return gold_bce * lam + soft_bce * (1.0 - lam)


def chain_loss(emissions: list[Tensor], crf: CrfParams, gold_chains: list[list[int]],
               teacher_emissions: list[np.ndarray] | None = None, lam: float = 1.0) -> Tensor:
    """Mean CRF negative log-likelihood over per-predicate chains.

    The teacher term matches per-position emission distributions, the
    simplest soft target the chain factorization exposes.
    """
    n = len(emissions)
    nll = Tensor(0.0)
    for em, chain in zip(emissions, gold_chains):
        nll = nll - crf_log_likelihood(em, crf, chain)
    nll = nll / n
    if teacher_emissions is None:
        return nll
    soft_ce = Tensor(0.0)
    for em, t_em in zip(emissions, teacher_emissions):
        _check_teacher(em, t_em)
        soft_ce = soft_ce - (Tensor(_softmax(t_em)) * em.log_softmax(axis=-1)).sum()
    soft_ce = soft_ce / (n * max(1, emissions[0].shape[0]))
    return nll * lam + soft_ce * (1.0 - lam)
