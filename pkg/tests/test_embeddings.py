import numpy as np
import pytest

from passagerank.embeddings import (
    compose_paragraph_embedding,
    embed_tokens,
    load_sentence_embeddings,
    load_word_embeddings,
    split_sentences,
    write_sentence_embeddings,
)
from passagerank.text import build_vocab


def write_word_file(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for token, values in rows:
            fh.write(token + " " + " ".join(repr(float(v)) for v in values) + "\n")


class TestWordEmbeddings:
    def test_basic_parse(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = [("alpha", rng.normal(size=300)), ("beta", rng.normal(size=300))]
        path = tmp_path / "vectors.txt"
        write_word_file(path, rows)
        table = load_word_embeddings(path)
        assert len(table) == 2
        assert table.dimension == 300

    def test_inconsistent_dimension_rejected(self, tmp_path):
        path = tmp_path / "vectors.txt"
        write_word_file(path, [("a", np.zeros(300)), ("b", np.zeros(299))])
        with pytest.raises(ValueError, match="inconsistent"):
            load_word_embeddings(path)

    def test_unparseable_value_rejected(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("a 0.5 oops 0.25\n")
        with pytest.raises(ValueError, match="unparseable"):
            load_word_embeddings(path)

    def test_duplicate_token_last_wins(self, tmp_path, caplog):
        path = tmp_path / "vectors.txt"
        write_word_file(path, [("tok", [1.0, 2.0]), ("tok", [3.0, 4.0])])
        with caplog.at_level("WARNING"):
            table = load_word_embeddings(path)
        assert np.array_equal(table["tok"], [3.0, 4.0])
        assert any("duplicate token" in r.message for r in caplog.records)

    def test_round_trip_against_generator(self, tmp_path):
        rng = np.random.default_rng(5)
        rows = [(f"word{i}", rng.normal(size=16)) for i in range(50)]
        path = tmp_path / "vectors.txt"
        write_word_file(path, rows)
        table = load_word_embeddings(path)
        assert len(table) == 50
        for token, values in rows:
            assert np.array_equal(table[token], np.asarray(values))

    def test_content_hash_tracks_values(self, tmp_path):
        path = tmp_path / "vectors.txt"
        write_word_file(path, [("a", [1.0, 2.0]), ("b", [3.0, 4.0])])
        table = load_word_embeddings(path)
        before = table.content_hash()
        assert before == load_word_embeddings(path).content_hash()
        table.vectors["a"][0] = 99.0
        assert table.content_hash() != before


class TestSentenceStore:
    def test_empty_store_round_trip(self, tmp_path):
        path = tmp_path / "store.seb"
        write_sentence_embeddings(path, {})
        store = load_sentence_embeddings(path)
        assert len(store) == 0

    def test_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(1)
        vectors = {f"s{i}": rng.normal(size=4096).astype(np.float32) for i in range(3)}
        path = tmp_path / "store.seb"
        write_sentence_embeddings(path, vectors)
        store = load_sentence_embeddings(path)
        assert store.dimension == 4096
        assert set(store.vectors) == set(vectors)
        for key, vec in vectors.items():
            assert store[key].dtype == np.float32
            assert np.array_equal(store[key], vec)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "store.seb"
        path.write_bytes(b"XXXX\x00\x00\x00\x00")
        with pytest.raises(ValueError, match="magic"):
            load_sentence_embeddings(path)

    def test_truncated(self, tmp_path):
        rng = np.random.default_rng(2)
        path = tmp_path / "store.seb"
        write_sentence_embeddings(path, {"a": rng.normal(size=8).astype(np.float32)})
        data = path.read_bytes()
        path.write_bytes(data[:-5])
        with pytest.raises(ValueError, match="truncated"):
            load_sentence_embeddings(path)

    def test_duplicate_identifier(self, tmp_path):
        import struct

        path = tmp_path / "store.seb"
        record = struct.pack("<H", 1) + b"a" + struct.pack("<I", 1) + struct.pack("<f", 0.5)
        path.write_bytes(b"SEB1" + struct.pack("<I", 2) + record + record)
        with pytest.raises(ValueError, match="duplicate"):
            load_sentence_embeddings(path)

    def test_mixed_dimensions_rejected(self, tmp_path):
        import struct

        path = tmp_path / "store.seb"
        rec1 = struct.pack("<H", 1) + b"a" + struct.pack("<I", 2) + struct.pack("<ff", 1, 2)
        rec2 = struct.pack("<H", 1) + b"b" + struct.pack("<I", 1) + struct.pack("<f", 3)
        path.write_bytes(b"SEB1" + struct.pack("<I", 2) + rec1 + rec2)
        with pytest.raises(ValueError, match="inconsistent"):
            load_sentence_embeddings(path)


class TestComposeParagraph:
    def test_single_sentence_identity(self):
        vec = np.array([1.0, -2.0, 3.0])
        assert np.array_equal(compose_paragraph_embedding([vec]), vec)

    def test_additive_inverse(self):
        vec = np.random.default_rng(0).normal(size=8)
        assert np.array_equal(compose_paragraph_embedding([vec, -vec]), np.zeros(8))

    def test_matches_scalar_loop_oracle(self):
        rng = np.random.default_rng(4)
        vectors = [rng.normal(size=6) for _ in range(3)]
        expected = np.zeros(6)
        for vec in vectors:
            for i in range(6):
                expected[i] = expected[i] + vec[i]
        assert np.array_equal(compose_paragraph_embedding(vectors), expected)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(9)
        # integer-valued vectors sum exactly, so permutations compare equal
        vectors = [rng.integers(-5, 6, size=10).astype(np.float64) for _ in range(6)]
        base = compose_paragraph_embedding(vectors)
        for _ in range(5):
            order = rng.permutation(len(vectors))
            assert np.array_equal(compose_paragraph_embedding([vectors[i] for i in order]), base)
        floats = [rng.normal(size=10) for _ in range(6)]
        base = compose_paragraph_embedding(floats)
        shuffled = compose_paragraph_embedding(floats[::-1])
        assert np.allclose(shuffled, base, rtol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            compose_paragraph_embedding([])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            compose_paragraph_embedding([np.zeros(3), np.zeros(4)])


class TestSplitSentences:
    def test_basic(self):
        text = "First one. Second one! A third? Last"
        assert split_sentences(text) == ["First one.", "Second one!", "A third?", "Last"]

    def test_no_terminal_punctuation(self):
        assert split_sentences("just one chunk") == ["just one chunk"]

    def test_empty(self):
        assert split_sentences("") == []


class TestEmbedTokens:
    @pytest.fixture
    def table(self, tmp_path):
        rng = np.random.default_rng(6)
        rows = [(f"w{i}", rng.normal(size=300)) for i in range(10)]
        path = tmp_path / "vectors.txt"
        write_word_file(path, rows)
        return load_word_embeddings(path)

    def test_all_out_of_vocabulary(self, table):
        vocab = build_vocab([["w0", "w1"]], min_count=1)
        matrix = embed_tokens(table, ["nope", "missing"], vocab)
        assert matrix.shape == (0, 300)

    def test_order_preserved_and_unknown_skipped(self, table):
        vocab = build_vocab([["w0", "w1"]], min_count=1)
        matrix = embed_tokens(table, ["w0", "UNKNOWN", "w1"], vocab)
        assert matrix.shape == (2, 300)
        assert np.array_equal(matrix[0], table["w0"])
        assert np.array_equal(matrix[1], table["w1"])

    def test_vocab_filters_known_tokens(self, table):
        vocab = build_vocab([["w0"]], min_count=1)
        matrix = embed_tokens(table, ["w0", "w1"], vocab)
        assert matrix.shape == (1, 300)

    def test_rows_equal_direct_lookups(self, table):
        tokens = [f"w{i}" for i in range(10)]
        vocab = build_vocab([tokens], min_count=1)
        matrix = embed_tokens(table, tokens, vocab)
        for row, tok in zip(matrix, tokens):
            assert np.array_equal(row, table[tok])

    def test_none_vocab_means_table_only(self, table):
        matrix = embed_tokens(table, ["w3", "zzz"], None)
        assert matrix.shape == (1, 300)
