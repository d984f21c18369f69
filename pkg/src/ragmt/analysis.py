"""Domain-shift diagnostics: OOV rates and per-10k term frequencies."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .text import word_tokenize

Tokenizer = Callable[[str], list[str]]

TOKENIZER_DESCRIPTION = "lowercase, split on whitespace, strip surrounding punctuation"


@dataclass(frozen=True)
class Vocab:
    tokens: frozenset[str]
    token_count: int


@dataclass
class TermFrequencyRow:
    term: str
    corpus_label: str
    raw_count: int
    total_tokens: int

    @property
    def count_per_10k(self) -> float:
        if self.total_tokens == 0:
            return 0.0
        return self.raw_count * 10000.0 / self.total_tokens


@dataclass
class TermFrequencyReport:
    rows: list[TermFrequencyRow] = field(default_factory=list)


def build_vocab(texts: Iterable[str], tokenizer: Tokenizer = word_tokenize) -> Vocab:
    tokens: set[str] = set()
    count = 0
    for text in texts:
        toks = tokenizer(text)
        tokens.update(toks)
        count += len(toks)
    return Vocab(tokens=frozenset(tokens), token_count=count)


def oov_rate(
    vocab: Vocab,
    texts: Iterable[str],
    tokenizer: Tokenizer = word_tokenize,
    level: str = "token",
) -> float:
    """Fraction of evaluation tokens (or types) absent from the vocabulary.

    ``level`` is "token" (each occurrence counts) or "type" (each distinct
    word counts once). Empty input yields 0.0 by convention.
    """
    if level not in ("token", "type"):
        raise ValueError(f"level must be 'token' or 'type', got {level!r}")
    counts: Counter = Counter()
    for text in texts:
        counts.update(tokenizer(text))
    if level == "type":
        total = len(counts)
        missing = sum(1 for tok in counts if tok not in vocab.tokens)
    else:
        total = sum(counts.values())
        missing = sum(c for tok, c in counts.items() if tok not in vocab.tokens)
    if total == 0:
        return 0.0
    return missing / total


def oov_report(
    train_texts: Iterable[str],
    eval_texts: Iterable[str],
    tokenizer: Tokenizer = word_tokenize,
) -> dict:
    """Both token- and type-level OOV rates with the tokenizer recorded."""
    eval_texts = list(eval_texts)
    vocab = build_vocab(train_texts, tokenizer)
    eval_token_count = sum(len(tokenizer(t)) for t in eval_texts)
    return {
        "tokenizer": TOKENIZER_DESCRIPTION if tokenizer is word_tokenize else "custom",
        "train_vocab_size": len(vocab.tokens),
        "train_token_count": vocab.token_count,
        "eval_token_count": eval_token_count,
        "eval_empty": eval_token_count == 0,
        "oov_rate_token": oov_rate(vocab, eval_texts, tokenizer, level="token"),
        "oov_rate_type": oov_rate(vocab, eval_texts, tokenizer, level="type"),
    }


def term_frequency(
    texts: Iterable[str],
    terms: list[str],
    tokenizer: Tokenizer = word_tokenize,
    corpus_label: str = "corpus",
) -> TermFrequencyReport:
    """Per-10k-token counts for each term, case-insensitive."""
    if not terms:
        raise ValueError("terms must be non-empty")
    counts: Counter = Counter()
    total = 0
    for text in texts:
        toks = tokenizer(text)
        counts.update(toks)
        total += len(toks)
    rows = [
        TermFrequencyRow(
            term=term,
            corpus_label=corpus_label,
            raw_count=counts.get(term.lower(), 0),
            total_tokens=total,
        )
        for term in terms
    ]
    return TermFrequencyReport(rows=rows)
