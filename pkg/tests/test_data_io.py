import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hanpipe import toydata
from hanpipe.data import (
    AnnotatedSentence,
    SrlFrame,
    read_corpus,
    write_corpus,
)
from hanpipe.errors import ContractError, CorpusFormatError
from hanpipe.vocabulary import SPECIALS, UNK_ID, Vocab, build_vocab

TWO_TOKEN = """\
1\t他们\t_\tNR\t_\t_\t2\tsubj\t2:Agt\t_
2\t工作\t_\tVV\t_\t_\t0\troot\t0:Root\t_
"""


class TestConllu:
    def test_two_token_block(self, tmp_path):
        path = tmp_path / "a.conllu"
        path.write_text(TWO_TOKEN, encoding="utf-8")
        sents = read_corpus(path, "conllu")
        assert len(sents) == 1
        sent = sents[0]
        assert sent.text == "他们工作"
        assert sent.words == [(0, 2), (2, 4)]
        assert sent.heads == [2, 0]
        assert sent.rels == ["subj", "root"]
        assert sent.pos == ["NR", "VV"]

    def test_deps_cell_two_edges(self, tmp_path):
        path = tmp_path / "b.conllu"
        path.write_text("1\t水\t_\t_\t_\t_\t_\t_\t1:A|2:B\t_\n2\t果\t_\t_\t_\t_\t_\t_\t_\t_\n",
                        encoding="utf-8")
        sent = read_corpus(path, "conllu")[0]
        assert sent.sdp == [(1, 1, "A"), (2, 1, "B")]
        assert sent.heads is None

    def test_round_trip(self, tmp_path):
        sents = toydata.generate(20, seed=1)
        for s in sents:
            s.entities = None
            s.srl = None
        path = tmp_path / "c.conllu"
        write_corpus(sents, path, "conllu")
        assert read_corpus(path, "conllu") == sents

    def test_rewrite_is_identity(self, tmp_path):
        sents = toydata.generate(10, seed=2)
        for s in sents:
            s.entities = None
            s.srl = None
        a, b = tmp_path / "a", tmp_path / "b"
        write_corpus(sents, a, "conllu")
        write_corpus(read_corpus(a, "conllu"), b, "conllu")
        assert a.read_bytes() == b.read_bytes()

    def test_empty_list_empty_file(self, tmp_path):
        path = tmp_path / "empty.conllu"
        write_corpus([], path, "conllu")
        assert path.read_text() == ""
        assert read_corpus(path, "conllu") == []

    def test_segmentation_only_uses_placeholders(self, tmp_path):
        sent = AnnotatedSentence(text="你好", words=[(0, 2)])
        path = tmp_path / "seg.conllu"
        write_corpus([sent], path, "conllu")
        assert path.read_text(encoding="utf-8") == "1\t你好\t_\t_\t_\t_\t_\t_\t_\t_\n"
        assert read_corpus(path, "conllu") == [sent]

    @pytest.mark.parametrize("bad,msg", [
        ("1\t你\t_\t_\t_\t_\t2\tx\t_\n", "10 columns"),
        ("7\t你\t_\t_\t_\t_\t2\tx\t_\t_\n", "token id"),
        ("1\t你\t_\t_\t_\t_\tbad\tx\t_\t_\n", "HEAD"),
        ("1\t你\t_\t_\t_\t_\t1\tx\tZZZ\t_\n", "DEPS"),
        ("1\t你\t_\t_\t_\t_\t9\tx\t_\t_\n", "out of range"),
    ])
    def test_malformed_lines_name_location(self, tmp_path, bad, msg):
        path = tmp_path / "bad.conllu"
        path.write_text(bad, encoding="utf-8")
        with pytest.raises(CorpusFormatError, match=msg) as err:
            read_corpus(path, "conllu")
        assert ":1:" in str(err.value)


class TestColumnBio:
    def test_round_trip(self, tmp_path):
        sents = [AnnotatedSentence(text=s.text, entities=s.entities)
                 for s in toydata.generate(20, seed=3)]
        path = tmp_path / "a.bio"
        write_corpus(sents, path, "column-bio")
        assert read_corpus(path, "column-bio") == sents

    def test_no_entities_round_trips_empty(self, tmp_path):
        sents = [AnnotatedSentence(text="平安", entities=[])]
        path = tmp_path / "b.bio"
        write_corpus(sents, path, "column-bio")
        assert read_corpus(path, "column-bio") == sents

    def test_malformed_tag_rejected(self, tmp_path):
        path = tmp_path / "bad.bio"
        path.write_text("你\tB-\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError, match="BIO"):
            read_corpus(path, "column-bio")


class TestSrlColumns:
    def test_round_trip(self, tmp_path):
        sents = [AnnotatedSentence(text=s.text, words=s.words, srl=s.srl)
                 for s in toydata.generate(20, seed=4)]
        path = tmp_path / "a.srl"
        write_corpus(sents, path, "srl-columns")
        assert read_corpus(path, "srl-columns") == sents

    def test_predicate_count_must_match_columns(self, tmp_path):
        path = tmp_path / "bad.srl"
        path.write_text("工作\tY\tB-V\tO\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError, match="predicates"):
            read_corpus(path, "srl-columns")

    def test_bad_flag_rejected(self, tmp_path):
        path = tmp_path / "bad2.srl"
        path.write_text("工作\tQ\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError, match="flag"):
            read_corpus(path, "srl-columns")


class TestJson:
    def test_full_round_trip(self, tmp_path):
        sents = toydata.generate(20, seed=5)
        path = tmp_path / "a.json"
        write_corpus(sents, path, "json")
        assert read_corpus(path, "json") == sents

    def test_invalid_json_located(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(CorpusFormatError):
            read_corpus(path, "json")


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ContractError, match="format"):
        read_corpus(tmp_path / "x", "tsv")


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["conllu", "column-bio", "srl-columns", "json"]))
def test_round_trip_property_over_generated_corpora(seed, fmt):
    import tempfile

    sents = toydata.generate(5, seed=seed)
    if fmt == "conllu":
        for s in sents:
            s.entities = None
            s.srl = None
    elif fmt == "column-bio":
        sents = [AnnotatedSentence(text=s.text, entities=s.entities) for s in sents]
    elif fmt == "srl-columns":
        sents = [AnnotatedSentence(text=s.text, words=s.words, srl=s.srl) for s in sents]
    with tempfile.TemporaryDirectory() as tmp:
        path = f"{tmp}/corpus"
        write_corpus(sents, path, fmt)
        assert read_corpus(path, fmt) == sents


class TestVocab:
    def test_build_counts_and_specials(self):
        vocab = build_vocab(["aab", "b"])
        assert vocab.tokens[:4] == list(SPECIALS)
        assert set(vocab.tokens[4:]) == {"a", "b"}
        assert vocab.id("a") != vocab.id("b")

    def test_unseen_maps_to_unk(self):
        vocab = build_vocab(["ab"])
        assert vocab.id("z") == UNK_ID

    def test_min_count_filters(self):
        vocab = build_vocab(["aab"], min_count=2)
        assert "a" in vocab and "b" not in vocab

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        build_vocab(["天地人和"] * 3).save(a)
        build_vocab(["天地人和"] * 3).save(b)
        assert a.read_bytes() == b.read_bytes()

    def test_save_load_round_trip(self, tmp_path):
        vocab = build_vocab(["语言处理"])
        vocab.save(tmp_path / "v.txt")
        loaded = Vocab.load(tmp_path / "v.txt")
        assert loaded.tokens == vocab.tokens

    def test_frequency_then_codepoint_order(self):
        vocab = build_vocab(["bbca", "ca"])
        # b:2 c:2 a:2 -> tie broken by codepoint; all have count 2
        assert vocab.tokens[4:] == ["a", "b", "c"]


def test_sentence_violations_detect_problems():
    sent = AnnotatedSentence(text="abc", words=[(0, 2), (2, 3)], pos=["A"])
    assert any("pos" in v for v in sent.violations())
    sent = AnnotatedSentence(text="abc", words=[(0, 1), (2, 3)])
    assert any("partition" in v for v in sent.violations())
    sent = AnnotatedSentence(text="ab", words=[(0, 1), (1, 2)], heads=[2, 1], rels=["a", "b"])
    assert any("cycle" in v for v in sent.violations())
    good = AnnotatedSentence(text="ab", words=[(0, 1), (1, 2)], heads=[2, 0], rels=["a", "b"],
                             srl=[SrlFrame(predicate=1, arguments=[(0, 1, "A0")])])
    assert good.violations() == []
