import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusforge.tokenizer import tokenize_word
from corpusforge.vocab import (
    ConfigError,
    VocabConfig,
    VocabFormatError,
    Vocabulary,
    apply_merge,
    build_alphabet,
    count_words,
    header_path,
    load_vocab,
    merged_piece,
    pair_counts,
    read_word_counts,
    save_vocab,
    train_bpe,
    word_symbols,
    write_word_counts,
)

from oracles import count_pair_nonoverlapping, naive_bpe, random_toy_corpus

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


class TestCountWords:
    def test_uncased(self):
        counts = count_words(["Ana are mere. Ana"], VocabConfig(casing="uncased"))
        assert counts == {"ana": 2, "are": 1, "mere": 1, ".": 1}

    def test_cased(self):
        assert count_words(["Ana ana"], VocabConfig(casing="cased")) == {"Ana": 1, "ana": 1}

    def test_strip_accents(self):
        counts = count_words(["Șopârlița"], VocabConfig(casing="uncased", strip_accents=True))
        assert counts == {"soparlita": 1}

    def test_hyphenated_clitics_stay_whole(self):
        assert count_words(["Nu-mi place."]) == {"Nu-mi": 1, "place": 1, ".": 1}

    def test_workers_agree(self, ro_lines):
        assert count_words(ro_lines * 3, workers=2) == count_words(ro_lines * 3)


class TestAlphabet:
    def test_weighted_by_frequency(self):
        # a: 2+1, b: 2, c: 1
        assert build_alphabet({"ab": 2, "ac": 1}, 2) == {"a", "b"}

    def test_cap_above_distinct(self):
        assert build_alphabet({"ab": 2, "ac": 1}, 10) == {"a", "b", "c"}

    def test_tie_goes_to_lower_codepoint(self):
        assert build_alphabet({"aa": 1, "bb": 1}, 1) == {"a"}

    def test_empty(self):
        assert build_alphabet({}, 5) == frozenset()


class TestPairCounting:
    @pytest.mark.parametrize(
        "symbols, pair, expected",
        [
            (["a", "##a", "##a", "##a"], ("##a", "##a"), 1),
            (["a", "##a", "##a", "##a", "##a"], ("##a", "##a"), 2),
            (["a", "##b", "##a", "##b"], ("a", "##b"), 1),
            (["a", "##b", "##b", "##b", "##b"], ("##b", "##b"), 2),
        ],
    )
    def test_non_overlapping(self, symbols, pair, expected):
        assert pair_counts(symbols)[pair] == expected
        assert count_pair_nonoverlapping(symbols, pair) == expected

    @given(st.text(alphabet="ab", min_size=1, max_size=12))
    def test_matches_oracle(self, word):
        symbols = word_symbols(word)
        counts = pair_counts(symbols)
        for pair in set(zip(symbols, symbols[1:])):
            assert counts[pair] == count_pair_nonoverlapping(symbols, pair)

    @given(st.text(alphabet="ab", min_size=1, max_size=12))
    def test_merge_consumes_every_counted_pair(self, word):
        symbols = word_symbols(word)
        for (a, b), n in pair_counts(symbols).items():
            merged = apply_merge(symbols, a, b, merged_piece(a, b))
            assert len(merged) == len(symbols) - n


class TestTrainBpe:
    def test_first_merge_toy(self):
        corpus = {"abab": 10, "abc": 5}
        vocab = train_bpe(corpus, VocabConfig(vocab_size=30))
        assert vocab.merges[0] == ("a", "##b")
        assert "ab" in vocab.pieces
        # frequency of (a, ##b): once in "abab" (x10) and once in "abc" (x5)
        freq = sum(f * count_pair_nonoverlapping(["a"] + ["##" + c for c in w[1:]], ("a", "##b")) for w, f in corpus.items())
        assert freq == 15

    def test_single_word(self):
        vocab = train_bpe({"a": 1})
        assert vocab.pieces == SPECIALS + ["a"]
        assert vocab.merges == []

    def test_repeated_letter_matches_oracle(self):
        vocab = train_bpe({"aaaa": 3}, VocabConfig(vocab_size=30))
        pieces, merges = naive_bpe({"aaaa": 3}, 30)
        assert vocab.pieces == pieces and vocab.merges == merges
        # (##a, ##a) and (a, ##a) both occur 3 times; "#" sorts before "a"
        assert merges == [("##a", "##a"), ("##aa", "##a"), ("a", "##aaa")]

    def test_matches_oracle_on_random_corpora(self):
        rng = random.Random(1)
        for _ in range(25):
            corpus = random_toy_corpus(rng)
            size = rng.randint(15, 120)
            ours = train_bpe(corpus, VocabConfig(vocab_size=size))
            assert (ours.pieces, ours.merges) == naive_bpe(corpus, size)

    def test_alphabet_cap_excludes_rare_words(self):
        corpus = {"aab": 5, "ab": 5, "az": 1}
        vocab = train_bpe(corpus, VocabConfig(vocab_size=20, alphabet_cap=2))
        assert vocab.alphabet == {"a", "b"}
        assert not any("z" in p for p in vocab.pieces)

    def test_min_pair_frequency_stops(self):
        vocab = train_bpe({"abcd": 1}, VocabConfig(vocab_size=50))
        assert vocab.merges == []
        vocab = train_bpe({"abcd": 1}, VocabConfig(vocab_size=50, min_pair_frequency=1))
        assert "abcd" in vocab.pieces

    def test_size_too_small_is_config_error(self):
        with pytest.raises(ConfigError):
            train_bpe({"abcdefgh": 3}, VocabConfig(vocab_size=10))

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            train_bpe({})

    def test_invariants(self, ro_vocab):
        v = ro_vocab
        assert len(v) <= 600
        assert [v.piece_to_id[p] for p in v.pieces] == list(range(len(v)))
        assert v.pieces[:5] == SPECIALS
        for left, right in v.merges:
            assert right.startswith("##")
            assert merged_piece(left, right) in v.piece_to_id
        # every learned piece is the output of a recorded merge, in order of appearance
        outputs = []
        for left, right in v.merges:
            piece = merged_piece(left, right)
            if piece not in outputs:
                outputs.append(piece)
        base = [p for p in v.pieces[5:] if len(p.removeprefix("##")) == 1]
        assert v.pieces == SPECIALS + base + outputs

    def test_training_words_never_unk(self, ro_lines, ro_vocab):
        for word in count_words(ro_lines):
            if set(word) <= ro_vocab.alphabet:
                assert tokenize_word(word, ro_vocab) != ["[UNK]"]

    def test_deterministic_bytes(self, ro_lines, tmp_path):
        config = VocabConfig(vocab_size=300)
        a = train_bpe(count_words(ro_lines, config), config)
        b = train_bpe(count_words(list(reversed(ro_lines)), config, workers=2), config)
        save_vocab(a, tmp_path / "a.txt")
        save_vocab(b, tmp_path / "b.txt")
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
        assert header_path(tmp_path / "a.txt").read_bytes() == header_path(tmp_path / "b.txt").read_bytes()


def replay_merge_counts(corpus, merges):
    """Exact count of each chosen pair at the moment it was merged."""
    segs = {w: word_symbols(w) for w in corpus}
    chosen = []
    for left, right in merges:
        chosen.append(sum(corpus[w] * count_pair_nonoverlapping(s, (left, right)) for w, s in segs.items()))
        segs = {w: apply_merge(s, left, right, merged_piece(left, right)) for w, s in segs.items()}
    return chosen


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.text(alphabet="abc", min_size=1, max_size=6), st.integers(1, 9), min_size=1, max_size=12))
def test_merge_counts_non_increasing(corpus):
    vocab = train_bpe(corpus, VocabConfig(vocab_size=60))
    counts = replay_merge_counts(corpus, vocab.merges)
    assert all(x >= y for x, y in zip(counts, counts[1:]))


class TestPersistence:
    def test_round_trip(self, ro_vocab, tmp_path):
        path = tmp_path / "vocab.txt"
        save_vocab(ro_vocab, path)
        loaded = load_vocab(path)
        assert loaded == ro_vocab
        assert loaded.piece_to_id == ro_vocab.piece_to_id

    def test_round_trip_uncased(self, ro_vocab_uncased, tmp_path):
        path = tmp_path / "vocab.txt"
        save_vocab(ro_vocab_uncased, path)
        assert load_vocab(path) == ro_vocab_uncased

    def test_one_piece_per_line(self, ro_vocab, tmp_path):
        path = tmp_path / "vocab.txt"
        save_vocab(ro_vocab, path)
        assert path.read_text(encoding="utf-8").split("\n")[:-1] == ro_vocab.pieces

    def test_duplicate_piece_names_line(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("\n".join(SPECIALS + ["a", "##b", "a"]) + "\n", encoding="utf-8")
        with pytest.raises(VocabFormatError, match=r"vocab.txt:8") as info:
            load_vocab(path)
        assert info.value.line == 8

    def test_empty_file(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("", encoding="utf-8")
        with pytest.raises(VocabFormatError, match="special tokens"):
            load_vocab(path)

    def test_missing_unk(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("[PAD]\na\n", encoding="utf-8")
        with pytest.raises(VocabFormatError, match=r"\[UNK\]"):
            load_vocab(path)

    def test_bare_bert_vocab_loads(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("\n".join(SPECIALS + ["a", "##b", "ab"]) + "\n", encoding="utf-8")
        vocab = load_vocab(path)
        assert vocab.special_tokens == tuple(SPECIALS)
        assert vocab.casing == "cased" and vocab.piece_to_id["ab"] == 7

    def test_malformed_header(self, ro_vocab, tmp_path):
        path = tmp_path / "vocab.txt"
        save_vocab(ro_vocab, path)
        header_path(path).write_text("{not json", encoding="utf-8")
        with pytest.raises(VocabFormatError, match="malformed header"):
            load_vocab(path)

    def test_word_counts_tsv(self, tmp_path, ro_lines):
        counts = count_words(ro_lines)
        write_word_counts(tmp_path / "wc.tsv", counts)
        assert read_word_counts(tmp_path / "wc.tsv") == counts

    def test_word_counts_tsv_error(self, tmp_path):
        (tmp_path / "wc.tsv").write_text("ok\t3\nbroken line\n", encoding="utf-8")
        with pytest.raises(VocabFormatError, match=":2"):
            read_word_counts(tmp_path / "wc.tsv")


def test_vocabulary_rejects_duplicates():
    with pytest.raises(ValueError):
        Vocabulary(pieces=SPECIALS + ["a", "a"])


def test_config_validation():
    with pytest.raises(ConfigError):
        VocabConfig(casing="mixed")
    with pytest.raises(ConfigError):
        VocabConfig(alphabet_cap=0)
    with pytest.raises(ConfigError):
        VocabConfig(vocab_size=5)
