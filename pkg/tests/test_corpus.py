import gzip
import json
import string

import pytest
from hypothesis import given, settings, strategies as st

from seven.corpus import (
    GAP,
    Vocabulary,
    build_vocabulary,
    default_stopwords,
    iter_tokens,
    load_stopwords,
    read_text,
    segment_sentences,
    tokenize,
)
from seven.errors import DataError

from conftest import DATA_DIR, make_vocab


@pytest.fixture(scope="module")
def fixture_doc():
    with open(DATA_DIR / "segmentation_fixture.json", encoding="utf-8") as fh:
        return json.load(fh)


class TestSegmentation:
    def test_two_plain_sentences(self):
        assert segment_sentences("A b. C d.") == ["A b.", "C d."]

    def test_empty_input(self):
        assert segment_sentences("") == []

    def test_whitespace_only(self):
        assert segment_sentences("  \n\t ") == []

    def test_no_terminal_punctuation(self):
        assert segment_sentences("no punctuation here") == ["no punctuation here"]

    def test_lowercase_continuation_not_split(self):
        assert segment_sentences("It was 5 p.m. when we left. Then rain.") == [
            "It was 5 p.m. when we left.",
            "Then rain.",
        ]

    def test_hand_labeled_fixture(self, fixture_doc):
        total = 0
        for block in fixture_doc["paragraphs"]:
            got = segment_sentences(block["text"])
            assert got == block["sentences"], block["text"]
            total += len(got)
        assert total == 50

    def test_nothing_lost_except_whitespace(self, fixture_doc):
        for block in fixture_doc["paragraphs"]:
            joined = "".join(segment_sentences(block["text"]))
            stripped = "".join(block["text"].split())
            assert "".join(joined.split()) == stripped


class TestTokenize:
    def test_stopword_removal(self):
        got = tokenize("the lion hunts the zebra", frozenset({"the"}))
        assert got == ["lion", "hunts", "zebra"]

    def test_punctuation_boundaries(self):
        assert tokenize("a, b; c", frozenset()) == ["a", "b", "c"]

    def test_case_insensitive_stopwords_preserved_case(self):
        got = tokenize("The Lion", frozenset({"the"}))
        assert got == ["Lion"]

    def test_lowercase_flag(self):
        assert tokenize("The Lion", frozenset(), lowercase=True) == ["the", "lion"]

    def test_hand_labeled_fixture(self, fixture_doc):
        stop = frozenset(fixture_doc["stopwords"])
        for block in fixture_doc["paragraphs"]:
            for sent, expect in zip(block["sentences"], block["tokens"]):
                assert tokenize(sent, stop) == expect, sent

    def test_vocab_mapping_drop(self):
        vocab = make_vocab(["lion", "zebra"])
        got = tokenize("lion stalks zebra", frozenset(), vocab)
        assert got == [vocab.id("lion"), vocab.id("zebra")]

    def test_vocab_mapping_gap(self):
        vocab = make_vocab(["lion", "zebra"])
        got = tokenize("lion stalks zebra", frozenset(), vocab, oov_mode="gap")
        assert got == [vocab.id("lion"), GAP, vocab.id("zebra")]

    def test_bad_oov_mode(self):
        with pytest.raises(ValueError):
            tokenize("x", frozenset(), make_vocab(["x"]), oov_mode="explode")


class TestVocabulary:
    def test_plurality(self):
        v = build_vocabulary(["a", "a", "b"], 1)
        assert v.words == ["a"]
        assert v.freqs == [2]

    def test_tie_break_lexicographic(self):
        v = build_vocabulary(["a", "b", "a", "b"], 2)
        assert v.words == ["a", "b"]

    def test_fewer_distinct_than_requested_warns(self, caplog):
        with caplog.at_level("WARNING"):
            v = build_vocabulary(["x", "y"], 10)
        assert set(v.words) == {"x", "y"}
        assert any("distinct" in r.message for r in caplog.records)

    def test_stopwords_never_enter(self):
        v = build_vocabulary(["the", "the", "cat"], 5, frozenset({"the"}))
        assert v.words == ["cat"]

    def test_matches_naive_count_sort_oracle(self, rng):
        alphabet = [f"w{k}" for k in range(200)]
        weights = 1.0 / (1 + rng.permutation(200))
        weights /= weights.sum()
        tokens = [alphabet[k] for k in rng.choice(200, size=50_000, p=weights)]

        counts: dict = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        ranked = sorted(counts)                      # lexicographic first,
        ranked.sort(key=counts.get, reverse=True)    # then stable by count
        expect = ranked[:100]

        v = build_vocabulary(iter(tokens), 100)
        assert v.words == expect
        assert v.freqs == [counts[w] for w in expect]

    def test_frequency_non_increasing(self, rng):
        tokens = [f"t{k}" for k in rng.integers(0, 40, size=2000)]
        v = build_vocabulary(tokens, 40)
        assert all(v.freqs[i] >= v.freqs[i + 1] for i in range(len(v) - 1))

    def test_ids_dense(self):
        v = build_vocabulary(["c", "b", "a"], 3)
        assert sorted(v.id(w) for w in v.words) == [0, 1, 2]

    def test_save_load_round_trip(self, tmp_path):
        v = build_vocabulary(["b", "b", "a", "c", "c", "c"], 3)
        path = tmp_path / "vocab.tsv"
        v.save(path)
        loaded = Vocabulary.load(path)
        assert loaded.words == v.words
        assert loaded.freqs == v.freqs
        assert path.read_text().splitlines()[0] == "c\t3"

    def test_load_rejects_bad_rows(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("word only one field\n")
        with pytest.raises(DataError):
            Vocabulary.load(path)
        path.write_text("a\tnotanumber\n")
        with pytest.raises(DataError):
            Vocabulary.load(path)
        path.write_text("a\t1\nb\t5\n")
        with pytest.raises(DataError):
            Vocabulary.load(path)

    def test_duplicate_words_rejected(self):
        with pytest.raises(DataError):
            Vocabulary(["a", "a"], [2, 1])

    def test_size_must_be_positive(self):
        with pytest.raises(ValueError):
            build_vocabulary(["a"], 0)


class TestFiles:
    def test_gzip_input(self, tmp_path):
        path = tmp_path / "c.txt.gz"
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            fh.write("Alpha beta. Gamma delta.")
        assert read_text(path) == "Alpha beta. Gamma delta."
        toks = list(iter_tokens([path], frozenset()))
        assert toks == ["Alpha", "beta", "Gamma", "delta"]

    def test_invalid_utf8_reports_offset(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_bytes(b"ok \xff\xfe")
        with pytest.raises(DataError, match="byte 3"):
            read_text(path)

    def test_stopword_file_comments(self, tmp_path):
        path = tmp_path / "stop.txt"
        path.write_text("# a comment\nThe\nand\n\n# more\nof\n")
        assert load_stopwords(path) == frozenset({"the", "and", "of"})

    def test_default_stopwords_nonempty(self):
        sw = default_stopwords()
        assert "the" in sw and "and" in sw
        assert len(sw) > 100


words_strategy = st.lists(
    st.text(alphabet=string.ascii_letters, min_size=1, max_size=8),
    min_size=1,
    max_size=60,
)


class TestProperties:
    @given(words_strategy)
    @settings(max_examples=60, deadline=None)
    def test_token_conservation(self, words):
        # Every non-stopword word survives segmentation + tokenization.
        text = " ".join(words)
        out = []
        for sent in segment_sentences(text):
            out.extend(tokenize(sent, frozenset()))
        assert out == words

    @given(words_strategy)
    @settings(max_examples=60, deadline=None)
    def test_vocabulary_ordering_invariant(self, words):
        v = build_vocabulary(words, len(set(words)))
        for i in range(len(v) - 1):
            assert v.freqs[i] >= v.freqs[i + 1]
            if v.freqs[i] == v.freqs[i + 1]:
                assert v.words[i] < v.words[i + 1]

    @given(st.text(max_size=300))
    @settings(max_examples=60, deadline=None)
    def test_segmentation_deterministic_and_lossless(self, text):
        first = segment_sentences(text)
        assert first == segment_sentences(text)
        assert "".join("".join(first).split()) == "".join(text.split())
