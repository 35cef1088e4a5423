"""Tokenization, vocabulary construction, answer normalization, and
positive/negative passage labeling.

Tokenizer rule (deterministic, documented here and in docs/formats.md):
lowercase the text, split into maximal runs of word characters versus runs of
non-word non-space characters, then drop every token that contains no letter
or digit. Hyphens and apostrophes are boundaries, so "Ecuador's" yields
["ecuador", "s"] and "well-known" yields ["well", "known"]. Penn-Treebank
bracket escapes (-LRB-, -RRB-, ...) are treated as punctuation artifacts and
dropped whole.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

TokenSeq = list[str]

_TOKEN_RE = re.compile(r"\w+|[^\w\s]+")
_BRACKET_ESCAPES = {"-lrb-", "-rrb-", "-lsb-", "-rsb-", "-lcb-", "-rcb-"}
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")


def tokenize(text: str) -> TokenSeq:
    """Lowercase, split on whitespace and word/punctuation boundaries, and
    drop punctuation-only tokens. Empty input gives an empty sequence."""
    tokens: TokenSeq = []
    for chunk in text.lower().split():
        if chunk in _BRACKET_ESCAPES:
            continue
        for tok in _TOKEN_RE.findall(chunk):
            if any(c.isalnum() for c in tok):
                tokens.append(tok)
    return tokens


@dataclass
class Vocabulary:
    """Dense token -> index map retaining only tokens seen at least
    min_count times in the construction corpus.

    Indices are assigned by descending corpus frequency, ties broken
    alphabetically, so construction is deterministic.
    """

    token_to_index: dict[str, int]
    min_count: int = 5

    @property
    def size(self) -> int:
        return len(self.token_to_index)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def __len__(self) -> int:
        return len(self.token_to_index)

    def index(self, token: str) -> int:
        return self.token_to_index[token]

    def tokens(self) -> list[str]:
        """Tokens ordered by index."""
        ordered = sorted(self.token_to_index.items(), key=lambda kv: kv[1])
        return [tok for tok, _ in ordered]

    def save(self, path) -> None:
        """One token per line; the line number is the index."""
        with open(path, "w", encoding="utf-8") as fh:
            for tok in self.tokens():
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path, min_count: int = 5) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            mapping = {line.rstrip("\n"): i for i, line in enumerate(fh) if line.rstrip("\n")}
        return cls(mapping, min_count)


def build_vocab(corpus: Iterable[TokenSeq], min_count: int = 5) -> Vocabulary:
    """Retain exactly the tokens whose corpus frequency is >= min_count."""
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts: Counter[str] = Counter()
    for seq in corpus:
        counts.update(seq)
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocabulary({tok: i for i, tok in enumerate(kept)}, min_count)


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation, drop articles (a, an, the), collapse
    whitespace. Follows the standard extractive-QA convention."""
    text = text.lower().translate(_PUNCT_TABLE)
    text = _ARTICLE_RE.sub(" ", text)
    return " ".join(text.split())


def contains_answer(passage_text: str, answers: Sequence[str]) -> bool:
    """True iff the normalized passage contains some normalized answer as a
    contiguous token subsequence (token-boundary match, not raw substring).

    An answer that normalizes to the empty string never matches.
    """
    if not answers:
        raise ValueError("answers must be nonempty")
    passage_tokens = normalize_answer(passage_text).split()
    for answer in answers:
        answer_tokens = normalize_answer(answer).split()
        if not answer_tokens or len(answer_tokens) > len(passage_tokens):
            continue
        first = answer_tokens[0]
        for i in range(len(passage_tokens) - len(answer_tokens) + 1):
            if passage_tokens[i] == first and (
                passage_tokens[i : i + len(answer_tokens)] == answer_tokens
            ):
                return True
    return False
