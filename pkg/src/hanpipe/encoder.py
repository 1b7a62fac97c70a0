"""Shared sentence encoder: a small trainable transformer.

One hidden vector per position over (BOS, s_1 .. s_n, SEP). Trained from
random initialization; there is no pretraining stage. Also provides the
direction- and distance-aware relative-position attention layer consumed
by the NER head: unscaled logits built from content-content,
content-position and two global bias terms over signed offsets (j - i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError, ContractError
from .vocabulary import BOS_ID, PAD_ID, SEP_ID


class SentenceTooLongError(ContractError):
    """Input exceeds the encoder's maximum length; nothing is truncated silently."""


@dataclass
class EncoderConfig:
    vocab_size: int
    width: int = 64
    layers: int = 2
    heads: int = 4
    max_len: int = 128
    ffn_width: int = 128
    dropout: float = 0.1

    def __post_init__(self):
        if self.width % self.heads != 0:
            raise ConfigError(f"width {self.width} not divisible by head count {self.heads}")
        if min(self.vocab_size, self.width, self.layers, self.heads, self.max_len) < 1:
            raise ConfigError("encoder dimensions must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")


@dataclass
class EncodedSequence:
    """Hidden states for BOS, s_1..s_n, SEP (plus any padding rows)."""
    hidden: Tensor          # (n + 2 + padding) x width
    char_ids: list[int]     # the n raw character ids, without specials
    n: int                  # character count

    def content_rows(self) -> Tensor:
        """Rows for s_1..s_n, dropping BOS/SEP and padding."""
        return self.hidden[1:self.n + 1]

    def padding_bias(self) -> Tensor | None:
        """Row vector masking padded key positions out of attention, or None."""
        total = self.hidden.shape[0]
        if total == self.n + 2:
            return None
        row = np.zeros(total)
        row[self.n + 2:] = -1e30
        return Tensor(row.reshape(1, total))


def _linear_params(rng, d_in, d_out, prefix):
    return {f"{prefix}.w": ad.xavier_uniform(rng, d_in, d_out),
            f"{prefix}.b": ad.zeros(d_out)}


def _norm_params(d, prefix):
    return {f"{prefix}.gain": ad.ones(d), f"{prefix}.bias": ad.zeros(d)}


def _linear(params, prefix, x):
    return x @ params[f"{prefix}.w"] + params[f"{prefix}.b"]


def _norm(params, prefix, x):
    return ad.layer_norm(x, params[f"{prefix}.gain"], params[f"{prefix}.bias"])


class TransformerEncoder:
    def __init__(self, config: EncoderConfig, rng: np.random.Generator):
        self.config = config
        d, f = config.width, config.ffn_width
        # char + pos sum feeds a layer norm; unit variance keeps it well scaled
        emb_std = 1.0 / math.sqrt(2.0)
        p: dict[str, Tensor] = {
            "emb.char": ad.normal(rng, (config.vocab_size, d), std=emb_std),
            "emb.pos": ad.normal(rng, (config.max_len, d), std=emb_std),
        }
        p.update(_norm_params(d, "emb.norm"))
        for i in range(config.layers):
            for name in ("q", "k", "v", "o"):
                p.update(_linear_params(rng, d, d, f"layer{i}.attn.{name}"))
            p.update(_norm_params(d, f"layer{i}.norm1"))
            p.update(_linear_params(rng, d, f, f"layer{i}.ffn.in"))
            p.update(_linear_params(rng, f, d, f"layer{i}.ffn.out"))
            p.update(_norm_params(d, f"layer{i}.norm2"))
        self.params = p

    def parameters(self) -> dict[str, Tensor]:
        return self.params

    def encode(self, char_ids: list[int], training: bool = False,
               rng: np.random.Generator | None = None, pad_to: int | None = None
               ) -> EncodedSequence:
        """Hidden states for one sentence; deterministic when not training.

        ``pad_to`` appends masked padding rows; masked positions never leak
        into content rows, so a padded encode matches the unpadded one.
        """
        cfg = self.config
        for cid in char_ids:
            if not 0 <= cid < cfg.vocab_size:
                raise ContractError(f"character id {cid} outside vocabulary of {cfg.vocab_size}")
        n = len(char_ids)
        if n + 2 > cfg.max_len:
            raise SentenceTooLongError(
                f"sentence of {n} characters exceeds max length {cfg.max_len - 2}")
        ids = [BOS_ID, *char_ids, SEP_ID]
        m = len(ids)
        total = m if pad_to is None else pad_to
        if total < m:
            raise ContractError(f"pad_to {pad_to} shorter than sequence {m}")
        if total > cfg.max_len:
            raise SentenceTooLongError(f"padded length {total} exceeds max length {cfg.max_len}")
        ids = ids + [PAD_ID] * (total - m)

        mask_bias = None
        if total > m:
            row = np.zeros(total)
            row[m:] = -1e30  # finite sentinel; softmax underflows to exact zero
            mask_bias = Tensor(row.reshape(1, total))

        p = self.params
        x = ad.embedding(p["emb.char"], ids) + ad.embedding(p["emb.pos"], range(total))
        x = _norm(p, "emb.norm", x)
        x = ad.dropout(x, cfg.dropout, rng, training)
        for i in range(cfg.layers):
            attn = self._attention(i, x, mask_bias)
            attn = ad.dropout(attn, cfg.dropout, rng, training)
            x = _norm(p, f"layer{i}.norm1", x + attn)
            ffn = _linear(p, f"layer{i}.ffn.out", _linear(p, f"layer{i}.ffn.in", x).gelu())
            ffn = ad.dropout(ffn, cfg.dropout, rng, training)
            x = _norm(p, f"layer{i}.norm2", x + ffn)
        return EncodedSequence(hidden=x, char_ids=list(char_ids), n=n)

    def _attention(self, i: int, x: Tensor, mask_bias: Tensor | None) -> Tensor:
        cfg = self.config
        dh = cfg.width // cfg.heads
        scale = 1.0 / np.sqrt(dh)
        p = self.params
        q = _linear(p, f"layer{i}.attn.q", x)
        k = _linear(p, f"layer{i}.attn.k", x)
        v = _linear(p, f"layer{i}.attn.v", x)
        outs = []
        for h in range(cfg.heads):
            sl = slice(h * dh, (h + 1) * dh)
            logits = (q[:, sl] @ k[:, sl].T) * scale
            if mask_bias is not None:
                logits = logits + mask_bias
            outs.append(logits.softmax(axis=-1) @ v[:, sl])
        return _linear(p, f"layer{i}.attn.o", ad.concat(outs, axis=1))


class RelativeAttentionLayer:
    """Transformer layer whose attention is relative-position aware.

    Per head h the (unscaled) logit between query i and key j is

        q_i k_j + q_i r_{j-i} + u_h k_j + v_h r_{j-i}

    with learned embeddings r over signed offsets, so the layer sees both
    the direction and the distance of every pair.
    """

    def __init__(self, config: EncoderConfig, rng: np.random.Generator, ffn: bool = True):
        self.config = config
        d = config.width
        dh = d // config.heads
        p: dict[str, Tensor] = {}
        for name in ("q", "k", "v", "o"):
            p.update(_linear_params(rng, d, d, f"attn.{name}"))
        p["rel"] = ad.normal(rng, (2 * config.max_len - 1, dh))
        p["u"] = ad.normal(rng, (config.heads, dh))
        p["v"] = ad.normal(rng, (config.heads, dh))
        p.update(_norm_params(d, "norm1"))
        self.ffn = ffn
        if ffn:
            p.update(_linear_params(rng, d, config.ffn_width, "ffn.in"))
            p.update(_linear_params(rng, config.ffn_width, d, "ffn.out"))
            p.update(_norm_params(d, "norm2"))
        self.params = p

    def parameters(self) -> dict[str, Tensor]:
        return self.params

    def attention_logits(self, x: Tensor, head: int = 0) -> Tensor:
        """Raw logits of one head; exposed for the offset-invariance contract."""
        q = _linear(self.params, "attn.q", x)
        k = _linear(self.params, "attn.k", x)
        return self._head_logits(q, k, x.shape[0], head)

    def _masked_logits(self, q, k, m, h, mask_bias):
        logits = self._head_logits(q, k, m, h)
        return logits if mask_bias is None else logits + mask_bias

    def _head_logits(self, q, k, m, h):
        cfg = self.config
        dh = cfg.width // cfg.heads
        sl = slice(h * dh, (h + 1) * dh)
        qh, kh = q[:, sl], k[:, sl]
        center = cfg.max_len - 1
        offsets = np.arange(m)[None, :] - np.arange(m)[:, None] + center
        rows = np.repeat(np.arange(m), m)
        content = qh @ kh.T
        pos = (qh @ self.params["rel"].T)[(rows, offsets.reshape(-1))].reshape(m, m)
        key_bias = (kh @ self.params["u"][h].reshape(-1, 1)).reshape(1, m)
        pos_bias = (self.params["rel"] @ self.params["v"][h].reshape(-1, 1))[
            (offsets.reshape(-1), np.zeros(m * m, dtype=int))].reshape(m, m)
        return content + pos + key_bias + pos_bias

    def forward(self, x: Tensor, training: bool = False,
                rng: np.random.Generator | None = None,
                mask_bias: Tensor | None = None) -> Tensor:
        cfg = self.config
        dh = cfg.width // cfg.heads
        m = x.shape[0]
        p = self.params
        q = _linear(p, "attn.q", x)
        k = _linear(p, "attn.k", x)
        v = _linear(p, "attn.v", x)
        outs = []
        for h in range(cfg.heads):
            logits = self._masked_logits(q, k, m, h, mask_bias)
            outs.append(logits.softmax(axis=-1) @ v[:, h * dh:(h + 1) * dh])
        attn = _linear(p, "attn.o", ad.concat(outs, axis=1))
        attn = ad.dropout(attn, cfg.dropout, rng, training)
        x = _norm(p, "norm1", x + attn)
        if self.ffn:
            f = _linear(p, "ffn.out", _linear(p, "ffn.in", x).gelu())
            f = ad.dropout(f, cfg.dropout, rng, training)
            x = _norm(p, "norm2", x + f)
        return x
