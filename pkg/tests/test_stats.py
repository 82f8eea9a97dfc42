import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpusforge.stats import (
    CorpusCounts,
    CorpusStats,
    allocate_quotas,
    corpus_rng,
    corpus_stats,
    read_manifest,
    reservoir_sample,
    sample_dev,
)


def write_corpora(tmp_path, sizes):
    paths = {}
    for name, n in sizes.items():
        path = tmp_path / f"{name}.txt"
        path.write_text("".join(f"{name} linia {i}\n" for i in range(n)), encoding="utf-8")
        paths[name] = path
    return paths


class TestCounts:
    def test_hand_count(self):
        stats = corpus_stats({"wiki": [b"a b\n", b"c"]})
        assert stats.per_corpus["wiki"] == CorpusCounts(lines=2, words=3, bytes=5)

    def test_empty_input_set(self):
        stats = corpus_stats({})
        assert stats.total == CorpusCounts(0, 0, 0)
        assert stats.to_dict()["total"] == {"lines": 0, "words": 0, "bytes": 0}

    def test_bytes_are_utf8(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("ș\n", encoding="utf-8")
        assert corpus_stats({"c": path}).total == CorpusCounts(1, 1, 3)

    def test_total_sums(self):
        stats = CorpusStats({"a": CorpusCounts(1, 2, 3), "b": CorpusCounts(10, 20, 30)})
        assert stats.total == CorpusCounts(11, 22, 33)

    def test_table_scaling(self):
        stats = CorpusStats({"opus": CorpusCounts(55_100_000, 635_000_000, 3_800_000_000)})
        table = stats.format_table()
        assert "55.1 M" in table and "635.0 M" in table and "3.8 GB" in table
        assert table.splitlines()[-1].startswith("Total")


class TestQuotas:
    def test_proportional_example(self):
        assert allocate_quotas({"opus": 551_000, "oscar": 336_000, "wiki": 15_000}, 5000) == {"opus": 3054, "oscar": 1863, "wiki": 83}

    def test_exact_when_divisible(self):
        assert allocate_quotas({"a": 30, "b": 10}, 4) == {"a": 3, "b": 1}

    def test_ties_go_to_first_listed(self):
        assert allocate_quotas({"a": 1, "b": 1}, 1) == {"a": 1, "b": 0}

    def test_n_exceeds_total(self):
        with pytest.raises(ValueError):
            allocate_quotas({"a": 3}, 4)

    @given(st.lists(st.integers(0, 10_000), min_size=1, max_size=6), st.data())
    def test_sum_and_bounds(self, counts, data):
        lines = {f"c{i}": c for i, c in enumerate(counts)}
        total = sum(counts)
        n = data.draw(st.integers(0, total))
        quotas = allocate_quotas(lines, n)
        assert sum(quotas.values()) == n
        for name, q in quotas.items():
            exact = n * lines[name] / total if total else 0
            assert abs(q - exact) < 1 + 1e-9
            assert 0 <= q <= lines[name]


class TestReservoir:
    def test_k_equals_length_is_everything(self):
        items = list(range(17))
        assert [x for _, x in reservoir_sample(items, 17, random.Random(0))] == items

    def test_k_zero(self):
        assert reservoir_sample(range(5), 0, random.Random(0)) == []

    def test_sorted_and_distinct(self):
        sample = reservoir_sample(range(1000), 50, random.Random(3))
        idx = [i for i, _ in sample]
        assert idx == sorted(set(idx)) and len(idx) == 50

    def test_roughly_uniform(self):
        hits = [0] * 10
        for s in range(2000):
            for i, _ in reservoir_sample(range(10), 3, random.Random(s)):
                hits[i] += 1
        # expected 600 each
        assert all(500 < h < 700 for h in hits)

    def test_rng_stable_per_name(self):
        assert corpus_rng(7, "wiki").random() == corpus_rng(7, "wiki").random()
        assert corpus_rng(7, "wiki").random() != corpus_rng(7, "opus").random()


class TestSampleDev:
    def test_whole_corpus_when_n_equals_lines(self, tmp_path):
        paths = write_corpora(tmp_path, {"wiki": 20})
        dev = sample_dev(paths, n=20, seed=1)
        assert dev.lines == [f"wiki linia {i}" for i in range(20)]

    def test_quotas_sum(self, tmp_path):
        paths = write_corpora(tmp_path, {"opus": 551, "oscar": 336, "wiki": 15})
        dev = sample_dev(paths, n=500, seed=0)
        assert sum(dev.quotas.values()) == 500 == len(dev.lines) == len(dev.manifest)

    def test_same_seed_same_bytes(self, tmp_path):
        paths = write_corpora(tmp_path, {"opus": 300, "wiki": 40})
        out = []
        for run in range(2):
            dev_path, man_path = tmp_path / f"dev{run}.txt", tmp_path / f"man{run}.tsv"
            sample_dev(paths, n=100, seed=42, dev_path=dev_path, manifest_path=man_path)
            out.append((dev_path.read_bytes(), man_path.read_bytes()))
        assert out[0] == out[1]

    def test_different_seed_differs(self, tmp_path):
        paths = write_corpora(tmp_path, {"opus": 300})
        assert sample_dev(paths, n=50, seed=1).lines != sample_dev(paths, n=50, seed=2).lines

    def test_train_dev_partition(self, tmp_path):
        paths = write_corpora(tmp_path, {"opus": 120, "wiki": 30})
        man_path = tmp_path / "manifest.tsv"
        dev = sample_dev(paths, n=40, seed=5, manifest_path=man_path, train_dir=tmp_path / "train")
        manifest = read_manifest(man_path)
        assert manifest == dev.manifest
        assert len(set(manifest)) == len(manifest)
        for name, path in paths.items():
            original = path.read_text(encoding="utf-8").splitlines()
            train = (tmp_path / "train" / f"{name}.txt").read_text(encoding="utf-8").splitlines()
            held = [original[i] for n, i in manifest if n == name]
            assert not set(train) & set(held)
            assert sorted(train + held) == sorted(original)

    def test_n_too_large(self, tmp_path):
        paths = write_corpora(tmp_path, {"wiki": 5})
        with pytest.raises(ValueError):
            sample_dev(paths, n=6)

    def test_bad_manifest(self, tmp_path):
        (tmp_path / "m.tsv").write_text("wiki\tx\n", encoding="utf-8")
        with pytest.raises(ValueError, match=":1"):
            read_manifest(tmp_path / "m.tsv")


class TestWeights:
    def test_words_weight(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        a.write_text("unu doi trei patru\n" * 10, encoding="utf-8")
        b.write_text("unu\n" * 10, encoding="utf-8")
        assert sample_dev({"a": a, "b": b}, n=10).quotas == {"a": 5, "b": 5}
        assert sample_dev({"a": a, "b": b}, n=10, weight="words").quotas == {"a": 8, "b": 2}

    def test_quota_beyond_lines(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        a.write_text("x " * 100 + "\n", encoding="utf-8")
        b.write_text("y\n" * 10, encoding="utf-8")
        with pytest.raises(ValueError, match="exceeds"):
            sample_dev({"a": a, "b": b}, n=5, weight="words")

    def test_unknown_weight(self, tmp_path):
        with pytest.raises(ValueError):
            sample_dev({}, n=0, weight="pages")
