"""Annotated sentences and corpus file formats.

One CoNLL-U-compatible 10-column file carries segmentation, POS, the
dependency tree (HEAD/DEPREL) and the semantic graph (DEPS as
``head:rel|head:rel``). NER uses a two-column character/BIO format and SRL
a column-per-predicate format; ``json`` round-trips every layer at once.
All files are UTF-8 with blank lines between sentences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .decoders import bio_to_entities, entities_to_bio, tree_violations
from .errors import ContractError, CorpusFormatError


@dataclass
class SrlFrame:
    predicate: int                          # word index, 0-based
    arguments: list[tuple[int, int, str]]   # half-open word spans + role


@dataclass
class AnnotatedSentence:
    """A character sequence plus whichever annotation layers are present.

    Word-level layers index words 1-based with 0 for the virtual root
    (heads, sdp); spans are half-open. SRL uses 0-based word indices.
    """

    text: str
    words: list[tuple[int, int]] | None = None        # char spans
    pos: list[str] | None = None                      # one per word
    entities: list[tuple[int, int, str]] | None = None  # char spans
    heads: list[int] | None = None                    # one per word, 0 = root
    rels: list[str] | None = None                     # one per word
    sdp: list[tuple[int, int, str]] | None = None     # (head word, dep word, rel)
    srl: list[SrlFrame] | None = None

    def n_words(self) -> int:
        return len(self.words) if self.words else 0

    def word_forms(self) -> list[str]:
        return [self.text[s:e] for s, e in self.words or []]

    def violations(self) -> list[str]:
        """Structural problems across all present layers; [] when clean."""
        out = []
        n_char, n_word = len(self.text), self.n_words()
        if self.words is not None:
            pos = 0
            for s, e in self.words:
                if s != pos or e <= s:
                    out.append(f"word spans do not partition the text at {s}")
                    break
                pos = e
            else:
                if pos != n_char:
                    out.append("word spans do not cover the text")
        for name in ("pos", "heads", "rels"):
            layer = getattr(self, name)
            if layer is not None and len(layer) != n_word:
                out.append(f"{name} has {len(layer)} entries for {n_word} words")
        if self.entities is not None:
            for s, e, _ in self.entities:
                if not 0 <= s < e <= n_char:
                    out.append(f"entity span ({s}, {e}) out of bounds")
        if self.heads is not None and len(self.heads) == n_word:
            out.extend(tree_violations(self.heads))
        if self.sdp is not None:
            for h, d, _ in self.sdp:
                if not (0 <= h <= n_word and 1 <= d <= n_word and h != d):
                    out.append(f"semantic edge ({h}, {d}) out of bounds")
        if self.srl is not None:
            for frame in self.srl:
                if not 0 <= frame.predicate < n_word:
                    out.append(f"predicate index {frame.predicate} out of bounds")
                for s, e, _ in frame.arguments:
                    if not 0 <= s < e <= n_word:
                        out.append(f"argument span ({s}, {e}) out of bounds")
        return out


FORMATS = ("conllu", "column-bio", "srl-columns", "json")


def read_corpus(path, fmt: str) -> list[AnnotatedSentence]:
    """Parse a corpus file; malformed input raises with file and line number."""
    path = Path(path)
    if fmt not in FORMATS:
        raise ContractError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
    text = path.read_text(encoding="utf-8")
    reader = {"conllu": _read_conllu, "column-bio": _read_bio,
              "srl-columns": _read_srl, "json": _read_json}[fmt]
    return reader(text, path)


def format_corpus(sentences: list[AnnotatedSentence], fmt: str) -> str:
    if fmt not in FORMATS:
        raise ContractError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
    writer = {"conllu": _format_conllu, "column-bio": _format_bio,
              "srl-columns": _format_srl, "json": _format_json}[fmt]
    return writer(sentences)


def write_corpus(sentences: list[AnnotatedSentence], path, fmt: str) -> None:
    Path(path).write_text(format_corpus(sentences, fmt), encoding="utf-8")


def _blocks(text: str):
    """Yield (starting line number, lines) per blank-line-separated block."""
    lines: list[tuple[int, str]] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            if lines:
                yield lines
                lines = []
            continue
        if line.startswith("#"):
            continue
        lines.append((no, line))
    if lines:
        yield lines


# -- CoNLL-U ------------------------------------------------------------------


def _read_conllu(text: str, path) -> list[AnnotatedSentence]:
    sentences = []
    for block in _blocks(text):
        forms, pos, heads, rels, deps_cells = [], [], [], [], []
        for expect_id, (no, line) in enumerate(block, start=1):
            cols = line.split("\t")
            if len(cols) != 10:
                raise CorpusFormatError(path, no, f"expected 10 columns, found {len(cols)}")
            if not cols[0].isdigit() or int(cols[0]) != expect_id:
                raise CorpusFormatError(path, no, f"expected token id {expect_id}, found {cols[0]!r}")
            if not cols[1]:
                raise CorpusFormatError(path, no, "empty FORM")
            forms.append(cols[1])
            pos.append(cols[3])
            if cols[6] == "_":
                heads.append(None)
            elif cols[6].isdigit():
                heads.append(int(cols[6]))
            else:
                raise CorpusFormatError(path, no, f"HEAD must be an integer or '_', found {cols[6]!r}")
            rels.append(cols[7])
            deps_cells.append(_parse_deps(cols[8], path, no))
        n = len(forms)
        spans, cursor = [], 0
        for form in forms:
            spans.append((cursor, cursor + len(form)))
            cursor += len(form)
        sent = AnnotatedSentence(text="".join(forms), words=spans)
        if any(p != "_" for p in pos):
            sent.pos = pos
        if any(h is not None for h in heads):
            for no, h in zip((no for no, _ in block), heads):
                if h is None:
                    raise CorpusFormatError(path, no, "missing HEAD in a parsed sentence")
                if h > n:
                    raise CorpusFormatError(path, no, f"HEAD {h} out of range for {n} words")
            sent.heads = heads
            sent.rels = rels
        if any(cell is not None for cell in deps_cells):
            edges = []
            for d, cell in enumerate(deps_cells, start=1):
                for h, rel in cell or []:
                    if h > n:
                        raise CorpusFormatError(path, block[d - 1][0],
                                                f"DEPS head {h} out of range for {n} words")
                    edges.append((h, d, rel))
            sent.sdp = edges
        sentences.append(sent)
    return sentences


def _parse_deps(cell: str, path, no) -> list[tuple[int, str]] | None:
    if cell == "_":
        return None
    out = []
    for part in cell.split("|"):
        head, sep, rel = part.partition(":")
        if not sep or not head.isdigit() or not rel:
            raise CorpusFormatError(path, no, f"malformed DEPS entry {part!r}")
        out.append((int(head), rel))
    return out


def _format_conllu(sentences) -> str:
    chunks = []
    for sent in sentences:
        if sent.words is None:
            raise ContractError("conllu output requires word segmentation")
        by_dep: dict[int, list[tuple[int, str]]] = {}
        for h, d, rel in sent.sdp or []:
            by_dep.setdefault(d, []).append((h, rel))
        rows = []
        for i, form in enumerate(sent.word_forms(), start=1):
            upos = sent.pos[i - 1] if sent.pos else "_"
            head = str(sent.heads[i - 1]) if sent.heads else "_"
            rel = sent.rels[i - 1] if sent.rels else "_"
            deps = "|".join(f"{h}:{r}" for h, r in sorted(by_dep.get(i, []))) or "_"
            rows.append("\t".join([str(i), form, "_", upos, "_", "_", head, rel, deps, "_"]))
        chunks.append("\n".join(rows))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


# -- character/BIO ------------------------------------------------------------


def _read_bio(text: str, path) -> list[AnnotatedSentence]:
    sentences = []
    for block in _blocks(text):
        chars, tags = [], []
        for no, line in block:
            cols = line.split("\t")
            if len(cols) != 2:
                raise CorpusFormatError(path, no, f"expected 2 columns, found {len(cols)}")
            if len(cols[0]) != 1:
                raise CorpusFormatError(path, no, f"expected a single character, found {cols[0]!r}")
            if cols[1] != "O" and not (cols[1][:2] in ("B-", "I-") and len(cols[1]) > 2):
                raise CorpusFormatError(path, no, f"malformed BIO tag {cols[1]!r}")
            chars.append(cols[0])
            tags.append(cols[1])
        sentences.append(AnnotatedSentence(text="".join(chars),
                                           entities=bio_to_entities(tags)))
    return sentences


def _format_bio(sentences) -> str:
    chunks = []
    for sent in sentences:
        tags = entities_to_bio(sent.entities or [], len(sent.text))
        chunks.append("\n".join(f"{ch}\t{tag}" for ch, tag in zip(sent.text, tags)))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


# -- SRL columns ---------------------------------------------------------------


def _read_srl(text: str, path) -> list[AnnotatedSentence]:
    sentences = []
    for block in _blocks(text):
        width = len(block[0][1].split("\t"))
        if width < 2:
            raise CorpusFormatError(path, block[0][0], "expected at least 2 columns")
        forms, flags, columns = [], [], [[] for _ in range(width - 2)]
        for no, line in block:
            cols = line.split("\t")
            if len(cols) != width:
                raise CorpusFormatError(path, no, f"expected {width} columns, found {len(cols)}")
            forms.append(cols[0])
            if cols[1] not in ("Y", "_"):
                raise CorpusFormatError(path, no, f"predicate flag must be Y or _, found {cols[1]!r}")
            flags.append(cols[1] == "Y")
            for k, tag in enumerate(cols[2:]):
                columns[k].append(tag)
        predicates = [i for i, f in enumerate(flags) if f]
        if len(predicates) != width - 2:
            raise CorpusFormatError(path, block[0][0],
                                    f"{len(predicates)} predicates but {width - 2} tag columns")
        spans, cursor = [], 0
        for form in forms:
            spans.append((cursor, cursor + len(form)))
            cursor += len(form)
        frames = []
        for pred, tags in zip(predicates, columns):
            try:
                spans_with_roles = bio_to_entities(tags)
            except ContractError as exc:
                raise CorpusFormatError(path, block[0][0], str(exc)) from exc
            args = [(s, e, role) for s, e, role in spans_with_roles if role != "V"]
            frames.append(SrlFrame(predicate=pred, arguments=args))
        sentences.append(AnnotatedSentence(text="".join(forms), words=spans, srl=frames))
    return sentences


def _format_srl(sentences) -> str:
    chunks = []
    for sent in sentences:
        if sent.words is None:
            raise ContractError("srl-columns output requires word segmentation")
        n = sent.n_words()
        frames = sorted(sent.srl or [], key=lambda f: f.predicate)
        pred_set = {f.predicate for f in frames}
        columns = []
        for frame in frames:
            spans = [(frame.predicate, frame.predicate + 1, "V")] + list(frame.arguments)
            columns.append(entities_to_bio(spans, n))
        rows = []
        for i, form in enumerate(sent.word_forms()):
            flag = "Y" if i in pred_set else "_"
            rows.append("\t".join([form, flag] + [col[i] for col in columns]))
        chunks.append("\n".join(rows))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


# -- JSON ----------------------------------------------------------------------


def sentence_to_dict(sent: AnnotatedSentence) -> dict:
    out: dict = {"text": sent.text}
    if sent.words is not None:
        out["words"] = [list(w) for w in sent.words]
    if sent.pos is not None:
        out["pos"] = list(sent.pos)
    if sent.entities is not None:
        out["entities"] = [[s, e, t] for s, e, t in sent.entities]
    if sent.heads is not None:
        out["heads"] = list(sent.heads)
        out["rels"] = list(sent.rels or [])
    if sent.sdp is not None:
        out["sdp"] = [[h, d, r] for h, d, r in sent.sdp]
    if sent.srl is not None:
        out["srl"] = [{"predicate": f.predicate,
                       "arguments": [[s, e, r] for s, e, r in f.arguments]}
                      for f in sent.srl]
    return out


def sentence_from_dict(obj: dict) -> AnnotatedSentence:
    sent = AnnotatedSentence(text=obj["text"])
    if "words" in obj:
        sent.words = [tuple(w) for w in obj["words"]]
    if "pos" in obj:
        sent.pos = list(obj["pos"])
    if "heads" in obj:
        sent.heads = list(obj["heads"])
        sent.rels = list(obj.get("rels", []))
    if "entities" in obj:
        sent.entities = [(s, e, t) for s, e, t in obj["entities"]]
    if "sdp" in obj:
        sent.sdp = [(h, d, r) for h, d, r in obj["sdp"]]
    if "srl" in obj:
        sent.srl = [SrlFrame(predicate=f["predicate"],
                             arguments=[(s, e, r) for s, e, r in f["arguments"]])
                    for f in obj["srl"]]
    return sent


def _read_json(text: str, path) -> list[AnnotatedSentence]:
    try:
        doc = json.loads(text)
        return [sentence_from_dict(obj) for obj in doc["sentences"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CorpusFormatError(path, 1, f"invalid annotation json: {exc}") from exc


def _format_json(sentences) -> str:
    doc = {"sentences": [sentence_to_dict(s) for s in sentences]}
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
