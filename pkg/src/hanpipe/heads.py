"""Task-specific scoring heads over the shared encoder output.

Tagging heads emit a per-position softmax; the parser heads score
head/dependent pairs with a deep biaffine form (bilinear term plus a
head-side bias, computed over single-layer GELU projections); SRL pairs a
biaffine predicate/argument scorer with a shared linear-chain CRF.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .encoder import EncodedSequence, EncoderConfig, RelativeAttentionLayer
from .errors import ContractError


class LinearTagHead:
    """Per-position ``softmax(W h + b)`` over a label inventory."""

    def __init__(self, width: int, n_labels: int, rng: np.random.Generator):
        self.n_labels = n_labels
        self.params = {"w": ad.xavier_uniform(rng, width, n_labels), "b": ad.zeros(n_labels)}

    def parameters(self) -> dict[str, Tensor]:
        return self.params

    def logits(self, rows: Tensor) -> Tensor:
        return rows @ self.params["w"] + self.params["b"]

    def distribution(self, rows: Tensor) -> Tensor:
        return self.logits(rows).softmax(axis=-1)


class NerTagHead:
    """Relative-position attention layers feeding a linear tag decoder.

    ``use_relative=False`` bypasses the attention stack, reducing the head
    to a plain LinearTagHead (ablation hook used by tests).
    """

    def __init__(self, config: EncoderConfig, n_labels: int, rng: np.random.Generator,
                 attention_layers: int = 1, use_relative: bool = True):
        self.use_relative = use_relative
        self.layers = [RelativeAttentionLayer(config, rng) for _ in range(attention_layers)]
        self.tag = LinearTagHead(config.width, n_labels, rng)
        self.n_labels = n_labels

    def parameters(self) -> dict[str, Tensor]:
        out = {}
        for i, layer in enumerate(self.layers):
            out.update({f"attn{i}.{k}": v for k, v in layer.parameters().items()})
        out.update({f"tag.{k}": v for k, v in self.tag.parameters().items()})
        return out

    def transform(self, enc: EncodedSequence, training: bool = False,
                  rng: np.random.Generator | None = None) -> Tensor:
        x = enc.hidden
        if self.use_relative:
            mask_bias = enc.padding_bias()
            for layer in self.layers:
                x = layer.forward(x, training=training, rng=rng, mask_bias=mask_bias)
        return x[1:enc.n + 1]

    def logits(self, enc: EncodedSequence, training: bool = False,
               rng: np.random.Generator | None = None) -> Tensor:
        return self.tag.logits(self.transform(enc, training, rng))

    def distribution(self, enc: EncodedSequence) -> Tensor:
        return self.logits(enc).softmax(axis=-1)


class BiaffineScorer:
    """Head/dependent pair scores: ``r_dep . U . r_head + w . r_head``.

    Projections are single GELU layers of ``proj_dim`` units. For ``n_labels
    > 1`` each label gets its own (U, w) pair over shared projections; slice
    ``l`` equals a one-label scorer built from that label's weights.
    """

    def __init__(self, width: int, proj_dim: int, rng: np.random.Generator,
                 n_labels: int = 1):
        self.proj_dim = proj_dim
        self.n_labels = n_labels
        p = {
            "head_mlp.w": ad.xavier_uniform(rng, width, proj_dim),
            "head_mlp.b": ad.zeros(proj_dim),
            "dep_mlp.w": ad.xavier_uniform(rng, width, proj_dim),
            "dep_mlp.b": ad.zeros(proj_dim),
        }
        for l in range(n_labels):
            p[f"u{l}"] = ad.xavier_uniform(rng, proj_dim, proj_dim)
            p[f"wh{l}"] = ad.zeros(proj_dim, 1)
        self.params = p

    def parameters(self) -> dict[str, Tensor]:
        return self.params

    def project(self, rows: Tensor) -> tuple[Tensor, Tensor]:
        p = self.params
        r_head = (rows @ p["head_mlp.w"] + p["head_mlp.b"]).gelu()
        r_dep = (rows @ p["dep_mlp.w"] + p["dep_mlp.b"]).gelu()
        return r_head, r_dep

    def scores(self, rows: Tensor) -> Tensor:
        """(m, m) matrix; cell [h, d] scores head h -> dependent d."""
        return self.label_scores(rows)[0]

    def label_scores(self, rows: Tensor) -> list[Tensor]:
        r_head, r_dep = self.project(rows)
        out = []
        for l in range(self.n_labels):
            bilinear = (r_head @ self.params[f"u{l}"].T) @ r_dep.T
            out.append(bilinear + r_head @ self.params[f"wh{l}"])
        return out


class CrfParams:
    """Linear-chain scores: label-to-label transitions plus start/end bonuses."""

    def __init__(self, n_labels: int, rng: np.random.Generator | None = None):
        self.n_labels = n_labels
        init = (lambda s: ad.normal(rng, s, std=0.01)) if rng is not None else (
            lambda s: ad.parameter(np.zeros(s)))
        self.params = {"trans": init((n_labels, n_labels)),
                       "start": init((n_labels,)), "end": init((n_labels,))}

    def parameters(self) -> dict[str, Tensor]:
        return self.params

    def values(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        p = self.params
        return p["trans"].data, p["start"].data, p["end"].data


def crf_log_likelihood(emissions: Tensor, crf: CrfParams, gold: list[int]) -> Tensor:
    """log P(gold | emissions) = chain score minus the forward log partition."""
    n = emissions.shape[0]
    if n < 1 or len(gold) != n:
        raise ContractError(f"need one gold label per position, got {len(gold)} for {n}")
    if any(not 0 <= y < crf.n_labels for y in gold):
        raise ContractError("gold label index out of range")
    trans, start, end = (crf.params["trans"], crf.params["start"], crf.params["end"])

    gold = list(gold)
    score = emissions[(np.arange(n), gold)].sum() + start[gold[0]] + end[gold[-1]]
    if n > 1:
        score = score + trans[(gold[:-1], gold[1:])].sum()

    alpha = start + emissions[0]
    for t in range(1, n):
        alpha = (alpha.reshape(-1, 1) + trans).logsumexp(axis=0) + emissions[t]
    log_z = (alpha + end).logsumexp(axis=-1)
    return score - log_z


class SrlHead:
    """Predicate/argument role scorer with a shared CRF decoder.

    For every candidate predicate position i the biaffine scorer yields an
    emission matrix over argument-role BIO labels for all positions j; each
    such row decodes as one linear chain. The predicate itself carries the
    verb label inside its own chain, which is how predicates are identified.
    """

    def __init__(self, width: int, proj_dim: int, n_roles: int, rng: np.random.Generator):
        self.n_roles = n_roles
        self.scorer = BiaffineScorer(width, proj_dim, rng, n_labels=n_roles)
        self.crf = CrfParams(n_roles, rng)

    def parameters(self) -> dict[str, Tensor]:
        out = {f"scorer.{k}": v for k, v in self.scorer.parameters().items()}
        out.update({f"crf.{k}": v for k, v in self.crf.parameters().items()})
        return out

    def emissions(self, word_rows: Tensor) -> list[Tensor]:
        """Per-predicate (n, n_roles) emission matrices, predicate = row index."""
        per_label = self.scorer.label_scores(word_rows)  # n_roles x (n, n)
        n = word_rows.shape[0]
        out = []
        for i in range(n):
            cols = [m[i].reshape(-1, 1) for m in per_label]
            out.append(ad.concat(cols, axis=1))
        return out
