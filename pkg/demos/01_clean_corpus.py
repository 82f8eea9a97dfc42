"""
Cleaning a noisy line stream
============================

Raw web text carries broken hyphenation, stray URLs, mixed dash and quote
forms, cedilla letters where Romanian wants comma-below, and plenty of lines
that are not prose at all. The cleaner drops the junk and repairs the rest.
"""

import io

from corpusforge.cleaner import CleanConfig, clean_line, clean_stream, filter_line

from _data import OUT, sample_lines

# single lines first: the repair cascade on a few familiar breakages
for raw in [
    "Ea a- mi spus că viteza maximă este 50 km/ h pe acest drum.",
    "Inflaţia a fost de 12, 5% anul trecut \u2014 vezi www.exemplu.ro/raport",
    "Scrieţi-ne la redactie@exemplu.ro pentru “corecturi”.",
]:
    text, verdict = clean_line(raw)
    print(repr(raw))
    print("  ->", repr(text), verdict.repairs_applied)

# lines that get dropped, and the rule that fired first
for raw in ["prea scurt", "2019 2020 2021 2022 2023 2024 2025", "!!! ??? ... ### *** --- +++ ///"]:
    print(repr(raw), "->", filter_line(raw).drop_rule)

# thresholds are plain config fields
strict = CleanConfig(min_line_chars=60)
print(filter_line("Ana are mere și pere în grădina bunicii.", strict))

# a whole stream: bytes in, text out, plus a report of what happened
noisy = sample_lines()[:20] + ["12345 67890 11111 22222", "Vezi http://x.ro/a pentru  detalii   despre  acest articol."]
records = [line.encode("utf-8") + b"\n" for line in noisy]
out = io.StringIO()
report = clean_stream(records, out)
print(report.to_json(indent=2))

(OUT / "clean.txt").write_text(out.getvalue(), encoding="utf-8")
