"""Word splitting and word normalization shared by training and inference.

Vocabulary counting and tokenization must agree on what a "word" is, so both
go through :func:`pretokenize` and :func:`normalize_text` here.
"""

from __future__ import annotations

import unicodedata


def is_punctuation(ch: str) -> bool:
    cp = ord(ch)
    # ASCII symbols such as "$" or "^" are not Unicode P* but are split all the same
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(ch).startswith("P")


def _split_token(token: str) -> list[str]:
    words = []
    start = 0
    last = len(token) - 1
    for i, ch in enumerate(token):
        if not is_punctuation(ch):
            continue
        # keep intra-word hyphens: "a-mi", "dintr-o", "2019-2020"
        if ch == "-" and 0 < i < last and token[i - 1].isalnum() and token[i + 1].isalnum():
            continue
        if start < i:
            words.append(token[start:i])
        words.append(ch)
        start = i + 1
    if start <= last:
        words.append(token[start:])
    return words


def pretokenize(text: str) -> list[str]:
    """Split on whitespace, then isolate every punctuation character as its own word.

    >>> pretokenize("Ana are mere. Ana")
    ['Ana', 'are', 'mere', '.', 'Ana']
    >>> pretokenize("Nu-mi place (deloc)!")
    ['Nu-mi', 'place', '(', 'deloc', ')', '!']
    """
    words = []
    for token in text.split():
        if token.isalnum():
            words.append(token)
        else:
            words.extend(_split_token(token))
    return words


def strip_accents(text: str) -> str:
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(ch for ch in decomposed if unicodedata.category(ch) != "Mn")


def normalize_text(text: str, lowercase: bool, remove_accents: bool) -> str:
    if lowercase:
        text = text.lower()
    if text.isascii():
        return text
    if remove_accents:
        return unicodedata.normalize("NFC", strip_accents(text))
    return unicodedata.normalize("NFC", text)
