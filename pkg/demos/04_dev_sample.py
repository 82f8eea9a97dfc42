"""
Corpus statistics and a proportional dev sample
===============================================

Each corpus contributes to the held-out sample in proportion to its line
count; quotas use largest-remainder rounding so they always add up.
"""

from corpusforge.stats import CorpusCounts, CorpusStats, allocate_quotas, corpus_stats, sample_dev

from _data import OUT, sample_lines

# quotas for corpora with 55.1M, 33.6M and 1.5M lines
print(allocate_quotas({"opus": 55_100_000, "oscar": 33_600_000, "wiki": 1_500_000}, 5000))

# a table in the usual M / GB units
table = CorpusStats({
    "OPUS": CorpusCounts(55_100_000, 635_000_000, 3_800_000_000),
    "OSCAR": CorpusCounts(33_600_000, 1_725_800_000, 11_000_000_000),
    "Wikipedia": CorpusCounts(1_500_000, 60_500_000, 400_000_000),
})
print(table.format_table())

# split the sample file into two pretend corpora and draw 10 dev lines
lines = sample_lines()
paths = {}
for name, part in (("wiki", lines[:70]), ("news", lines[70:])):
    paths[name] = OUT / f"{name}.txt"
    paths[name].write_text("\n".join(part) + "\n", encoding="utf-8")

print(corpus_stats(paths).to_json(indent=2))
dev = sample_dev(paths, n=10, seed=7, dev_path=OUT / "dev.txt", manifest_path=OUT / "dev.tsv", train_dir=OUT / "train")
print(dev.quotas)
for (name, index), line in zip(dev.manifest, dev.lines):
    print(f"{name}:{index}  {line[:60]}")

# same seed, same sample
again = sample_dev(paths, n=10, seed=7)
assert again.lines == dev.lines
