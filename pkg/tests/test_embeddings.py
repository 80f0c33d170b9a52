import struct

import numpy as np
import pytest

from seven.embeddings import load_embeddings, save_embeddings
from seven.errors import DataError

from conftest import make_vocab


def write_binary(path, entries, dim):
    """Independent binary writer: header line, then word, space, f32 payload."""
    with open(path, "wb") as fh:
        fh.write(f"{len(entries)} {dim}\n".encode())
        for word, vec in entries:
            fh.write(word.encode("utf-8") + b" ")
            fh.write(struct.pack(f"<{dim}f", *vec))
            fh.write(b"\n")


class TestTextFormat:
    def test_direct_read(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 0\nb 0 1\n")
        store = load_embeddings(path, make_vocab(["a", "b"]))
        assert store.dim == 2
        assert store.coverage == 1.0
        np.testing.assert_array_equal(store.get(0), [1.0, 0.0])
        np.testing.assert_array_equal(store.get(1), [0.0, 1.0])

    def test_partial_coverage(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 0\nb 0 1\n")
        vocab = make_vocab(["a", "c"])
        store = load_embeddings(path, vocab)
        assert store.coverage == 0.5
        assert store.get(vocab.id("c")) is None
        assert not store.has(vocab.id("c"))

    def test_header_line_accepted(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("2 3\na 1 2 3\nb 4 5 6\n")
        store = load_embeddings(path, make_vocab(["a", "b"]))
        assert store.dim == 3

    def test_inconsistent_dim_reports_line(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 0\nb 0 1 5\n")
        with pytest.raises(DataError, match="vec.txt:2"):
            load_embeddings(path, make_vocab(["a", "b"]))

    def test_zero_intersection_rejected(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 0\n")
        with pytest.raises(DataError, match="no overlap"):
            load_embeddings(path, make_vocab(["x"]))

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 nan\n")
        with pytest.raises(DataError, match="non-finite"):
            load_embeddings(path, make_vocab(["a"]))

    def test_duplicate_word_keeps_first(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 0\na 9 9\n")
        store = load_embeddings(path, make_vocab(["a"]))
        np.testing.assert_array_equal(store.get(0), [1.0, 0.0])


class TestBinaryFormat:
    def test_round_trip_against_independent_writer(self, tmp_path, rng):
        words = [f"w{k}" for k in range(50)]
        vecs = rng.normal(size=(50, 8)).astype(np.float32)
        path = tmp_path / "vec.bin"
        write_binary(path, list(zip(words, vecs)), 8)
        vocab = make_vocab(words)
        store = load_embeddings(path, vocab, binary=True)
        for k, w in enumerate(words):
            np.testing.assert_array_equal(store.get(vocab.id(w)), vecs[k])

    def test_sniffing_binary(self, tmp_path, rng):
        path = tmp_path / "vec.bin"
        vecs = rng.normal(size=(4, 16)).astype(np.float32)
        write_binary(path, [(f"w{k}", vecs[k]) for k in range(4)], 16)
        store = load_embeddings(path, make_vocab([f"w{k}" for k in range(4)]))
        assert store.dim == 16

    def test_sniffing_text_with_header(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("2 2\na 1 2\nb 3 4\n")
        store = load_embeddings(path, make_vocab(["a", "b"]))
        assert store.dim == 2
        np.testing.assert_array_equal(store.get(0), [1.0, 2.0])

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "vec.bin"
        path.write_bytes(b"2 4\nword " + b"\x00" * 7)
        with pytest.raises(DataError, match="truncated"):
            load_embeddings(path, make_vocab(["word"]), binary=True)


class TestStore:
    def test_vectors_read_only(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 0\n")
        store = load_embeddings(path, make_vocab(["a"]))
        with pytest.raises(ValueError):
            store.get(0)[0] = 5.0

    def test_rowmap(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("b 1 0\n")
        vocab = make_vocab(["a", "b"])
        store = load_embeddings(path, vocab)
        rm = store.rowmap(len(vocab))
        assert rm[vocab.id("a")] == -1
        assert rm[vocab.id("b")] == 0

    def test_load_deterministic(self, tmp_path, rng):
        path = tmp_path / "vec.txt"
        rows = "\n".join(
            f"w{k} " + " ".join(f"{x:.6f}" for x in rng.normal(size=5))
            for k in range(30)
        )
        path.write_text(rows + "\n")
        vocab = make_vocab([f"w{k}" for k in range(30)])
        s1 = load_embeddings(path, vocab)
        s2 = load_embeddings(path, vocab)
        np.testing.assert_array_equal(s1.vectors, s2.vectors)
        assert s1.rows == s2.rows


class TestSaveLoad:
    def test_bit_identical_round_trip_10k(self, tmp_path, rng):
        # float32 survives a 9-significant-digit text round trip exactly.
        words = [f"tok{k:05d}" for k in range(10_000)]
        vocab = make_vocab(words)
        path = tmp_path / "orig.txt"
        with open(path, "w") as fh:
            for w in words:
                vals = " ".join(f"{x:.5f}" for x in rng.normal(size=6))
                fh.write(f"{w} {vals}\n")
        store = load_embeddings(path, vocab)
        out = tmp_path / "saved.txt"
        save_embeddings(store, vocab, out)
        again = load_embeddings(out, vocab)
        assert again.dim == store.dim
        np.testing.assert_array_equal(again.vectors, store.vectors)
        assert again.rows == store.rows
