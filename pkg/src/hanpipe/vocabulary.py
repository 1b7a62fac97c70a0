"""Character vocabulary with reserved special ids.

File format: one token per line, line number = id. Ids 0-3 are reserved
for the padding, unknown, sequence-start and separator symbols.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Iterable

PAD, UNK, BOS, SEP = "<pad>", "<unk>", "<cls>", "<sep>"
PAD_ID, UNK_ID, BOS_ID, SEP_ID = 0, 1, 2, 3
SPECIALS = (PAD, UNK, BOS, SEP)


class Vocab:
    def __init__(self, tokens: list[str]):
        if list(tokens[:4]) != list(SPECIALS):
            raise ValueError(f"vocabulary must start with the reserved specials {SPECIALS}")
        self.tokens = list(tokens)
        self._index = {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def encode(self, text: str) -> list[int]:
        return [self.id(ch) for ch in text]

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocab":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(lines)


def build_vocab(texts: Iterable[str], min_count: int = 1) -> Vocab:
    """Count characters and assign ids by (frequency desc, codepoint asc).

    Deterministic: the same corpus always produces byte-identical files.
    """
    counts = Counter()
    for text in texts:
        counts.update(text)
    kept = [ch for ch, c in counts.items() if c >= min_count]
    kept.sort(key=lambda ch: (-counts[ch], ch))
    return Vocab(list(SPECIALS) + kept)
