"""Synthetic six-layer corpus so every command runs offline.

A small template grammar over a closed Chinese vocabulary emits sentences
with deterministic segmentation, POS, entities, a projective dependency
tree, a semantic graph and predicate-argument frames. Activity words
(e.g. 工作) appear both as verbs and as objects, so POS is context
dependent rather than a lexicon lookup.

Regenerate the bundled files with ``python -m hanpipe.toydata data/toy``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import AnnotatedSentence, SrlFrame, write_corpus

PERSONS = ["张伟", "王芳", "李强", "刘洋", "陈静", "杨帆"]
PLACES = ["北京", "上海", "广州", "深圳", "杭州"]
ORGS = ["银行", "学校", "医院", "公司", "书店"]
TIMES = ["今天", "明天", "昨天", "周末"]
ADVERBS = ["很", "非常", "已经", "经常"]
VERBS_T = ["喜欢", "帮助", "看见", "批评", "认识"]
VERBS_I = ["工作", "休息", "旅行", "学习"]
NOUNS = ["苹果", "音乐", "电影", "茶", "书"]
STOP = "。"


def _entity_type(word: str) -> str | None:
    if word in PERSONS:
        return "PER"
    if word in PLACES:
        return "LOC"
    if word in ORGS:
        return "ORG"
    return None


def _assemble(words: list[str], pos: list[str], heads: list[int], rels: list[str],
              sdp: list[tuple[int, int, str]], frames: list[SrlFrame]) -> AnnotatedSentence:
    spans, cursor = [], 0
    for w in words:
        spans.append((cursor, cursor + len(w)))
        cursor += len(w)
    text = "".join(words)
    entities = []
    for (s, e), w in zip(spans, words):
        kind = _entity_type(w)
        if kind:
            entities.append((s, e, kind))
    # dependent-major edge order matches what corpus readers reconstruct
    sdp = sorted(sdp, key=lambda e: (e[1], e[0]))
    return AnnotatedSentence(text=text, words=spans, pos=pos, entities=entities,
                             heads=heads, rels=rels, sdp=sdp, srl=frames)


def _simple_transitive(rng) -> AnnotatedSentence:
    # NAME VT OBJ 。 -- the object slot reuses activity verbs as nouns
    subj = rng.choice(PERSONS)
    verb = rng.choice(VERBS_T)
    obj = rng.choice(NOUNS + VERBS_I + ORGS + PERSONS)
    words = [subj, verb, obj, STOP]
    pos = ["NR", "VV", "NR" if obj in PERSONS else "NN", "PU"]
    heads = [2, 0, 2, 2]
    rels = ["subj", "root", "obj", "punct"]
    sdp = [(0, 2, "Root"), (2, 1, "Agt"), (2, 3, "Pat"), (2, 4, "mPunc")]
    frames = [SrlFrame(predicate=1, arguments=[(0, 1, "A0"), (2, 3, "A1")])]
    return _assemble(words, pos, heads, rels, sdp, frames)


def _locative_intransitive(rng) -> AnnotatedSentence:
    # NAME 在 PLACE/ORG VI 。
    subj = rng.choice(PERSONS)
    site = rng.choice(PLACES + ORGS)
    verb = rng.choice(VERBS_I)
    words = [subj, "在", site, verb, STOP]
    pos = ["NR", "P", "NR" if site in PLACES else "NN", "VV", "PU"]
    heads = [4, 4, 2, 0, 4]
    rels = ["subj", "prep", "pobj", "root", "punct"]
    sdp = [(0, 4, "Root"), (4, 1, "Agt"), (4, 3, "Loc"), (3, 2, "mPrep"), (4, 5, "mPunc")]
    frames = [SrlFrame(predicate=3, arguments=[(0, 1, "A0"), (1, 3, "AM-LOC")])]
    return _assemble(words, pos, heads, rels, sdp, frames)


def _timed_transitive(rng) -> AnnotatedSentence:
    # TIME NAME AD VT NAME 。
    when = rng.choice(TIMES)
    subj, obj = rng.choice(PERSONS, size=2, replace=False)
    adv = rng.choice(ADVERBS)
    verb = rng.choice(VERBS_T)
    words = [when, subj, adv, verb, obj, STOP]
    pos = ["NT", "NR", "AD", "VV", "NR", "PU"]
    heads = [4, 4, 4, 0, 4, 4]
    rels = ["tmod", "subj", "adv", "root", "obj", "punct"]
    sdp = [(0, 4, "Root"), (4, 1, "Time"), (4, 2, "Agt"), (4, 3, "Mann"),
           (4, 5, "Pat"), (4, 6, "mPunc")]
    frames = [SrlFrame(predicate=3, arguments=[
        (0, 1, "AM-TMP"), (1, 2, "A0"), (2, 3, "AM-ADV"), (4, 5, "A1")])]
    return _assemble(words, pos, heads, rels, sdp, frames)


def _adverbial_intransitive(rng) -> AnnotatedSentence:
    # NAME AD VI 。
    subj = rng.choice(PERSONS)
    adv = rng.choice(ADVERBS)
    verb = rng.choice(VERBS_I)
    words = [subj, adv, verb, STOP]
    pos = ["NR", "AD", "VV", "PU"]
    heads = [3, 3, 0, 3]
    rels = ["subj", "adv", "root", "punct"]
    sdp = [(0, 3, "Root"), (3, 1, "Agt"), (3, 2, "Mann"), (3, 4, "mPunc")]
    frames = [SrlFrame(predicate=2, arguments=[(0, 1, "A0"), (1, 2, "AM-ADV")])]
    return _assemble(words, pos, heads, rels, sdp, frames)


def _timed_locative_transitive(rng) -> AnnotatedSentence:
    # TIME NAME 在 PLACE VT OBJ 。
    when = rng.choice(TIMES)
    subj = rng.choice(PERSONS)
    place = rng.choice(PLACES)
    verb = rng.choice(VERBS_T)
    obj = rng.choice(NOUNS + VERBS_I)
    words = [when, subj, "在", place, verb, obj, STOP]
    pos = ["NT", "NR", "P", "NR", "VV", "NN", "PU"]
    heads = [5, 5, 5, 3, 0, 5, 5]
    rels = ["tmod", "subj", "prep", "pobj", "root", "obj", "punct"]
    sdp = [(0, 5, "Root"), (5, 1, "Time"), (5, 2, "Agt"), (5, 4, "Loc"),
           (4, 3, "mPrep"), (5, 6, "Pat"), (5, 7, "mPunc")]
    frames = [SrlFrame(predicate=4, arguments=[
        (0, 1, "AM-TMP"), (1, 2, "A0"), (2, 4, "AM-LOC"), (5, 6, "A1")])]
    return _assemble(words, pos, heads, rels, sdp, frames)


def _conjoined_events(rng) -> AnnotatedSentence:
    # NAME VT OBJ 的 NAME 。 is avoided; instead: NAME 看见 NAME 在 PLACE VI 。
    subj, other = rng.choice(PERSONS, size=2, replace=False)
    place = rng.choice(PLACES)
    verb = rng.choice(VERBS_I)
    words = [subj, "看见", other, "在", place, verb, STOP]
    pos = ["NR", "VV", "NR", "P", "NR", "VV", "PU"]
    # inner clause (VI) is the complement of 看见; both verbs are predicates,
    # and the inner subject keeps two semantic heads (Pat of the outer verb,
    # Agt of the inner one)
    heads = [2, 0, 6, 6, 4, 2, 2]
    rels = ["subj", "root", "subj", "prep", "pobj", "comp", "punct"]
    sdp = [(0, 2, "Root"), (2, 1, "Agt"), (2, 3, "Pat"), (2, 6, "dCont"),
           (6, 3, "Agt"), (6, 5, "Loc"), (5, 4, "mPrep"), (2, 7, "mPunc")]
    frames = [
        SrlFrame(predicate=1, arguments=[(0, 1, "A0"), (2, 6, "A1")]),
        SrlFrame(predicate=5, arguments=[(2, 3, "A0"), (3, 5, "AM-LOC")]),
    ]
    return _assemble(words, pos, heads, rels, sdp, frames)


TEMPLATES = [_simple_transitive, _locative_intransitive, _timed_transitive,
             _adverbial_intransitive, _timed_locative_transitive, _conjoined_events]


def generate(n_sentences: int = 100, seed: int = 2026) -> list[AnnotatedSentence]:
    """Deterministic corpus of n unique sentences with all six layers."""
    rng = np.random.default_rng(seed)
    seen, out = set(), []
    while len(out) < n_sentences:
        sent = TEMPLATES[int(rng.integers(len(TEMPLATES)))](rng)
        if sent.text in seen:
            continue
        problems = sent.violations()
        if problems:
            raise AssertionError(f"toy generator produced invalid sentence: {problems}")
        seen.add(sent.text)
        out.append(sent)
    return out


def write_files(directory, n_sentences: int = 100, seed: int = 2026) -> dict[str, Path]:
    """Write train.conllu / ner.bio / srl.columns (+ raw.txt) under directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sentences = generate(n_sentences, seed)
    paths = {
        "conllu": directory / "train.conllu",
        "bio": directory / "ner.bio",
        "srl": directory / "srl.columns",
        "raw": directory / "raw.txt",
    }
    write_corpus(sentences, paths["conllu"], "conllu")
    write_corpus(sentences, paths["bio"], "column-bio")
    write_corpus(sentences, paths["srl"], "srl-columns")
    paths["raw"].write_text("\n".join(s.text for s in sentences) + "\n", encoding="utf-8")
    return paths


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "data/toy"
    for name, path in write_files(target).items():
        print(f"wrote {path}")
