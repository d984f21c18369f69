"""Native chrF++ and pooled-count BLEU for corpus and sentence scoring.

chrF++ follows the published definition: character n-grams (orders
1..char_order) extracted with whitespace removed, word n-grams (orders
1..word_order) over punctuation-separated tokens, precision/recall averaged
over effective orders, combined with F-beta. Corpus scores pool n-gram
statistics over segments rather than averaging sentence scores.
"""

from __future__ import annotations

import hashlib
import json
import math
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

_PUNCTS = set(string.punctuation)

BLEU_SMOOTHING_EPSILON = 1e-9


@dataclass(frozen=True)
class ChrfParams:
    char_order: int = 6
    word_order: int = 2
    beta: float = 2.0

    def __post_init__(self):
        if self.char_order < 1:
            raise ValueError("char_order must be >= 1")
        if self.word_order < 0:
            raise ValueError("word_order must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be positive")


class WhitespaceTokenizer:
    """Fallback subword tokenizer: plain whitespace splitting.

    Scores computed with it are plain token BLEU, not spBLEU; the report
    labels them accordingly.
    """

    name = "whitespace"
    is_subword_model = False

    def tokenize(self, text: str) -> list[str]:
        return text.split()


class SentencePieceTokenizer:
    """Subword tokenizer backed by an external SentencePiece model file."""

    is_subword_model = True

    def __init__(self, model_path: str | Path):
        try:
            import sentencepiece
        except ImportError as exc:
            raise RuntimeError(
                "sentencepiece is required for subword BLEU; install it or "
                "use the whitespace tokenizer"
            ) from exc
        self._sp = sentencepiece.SentencePieceProcessor(model_file=str(model_path))
        self.name = f"sentencepiece:{Path(model_path).name}"

    def tokenize(self, text: str) -> list[str]:
        return self._sp.encode(text, out_type=str)


@dataclass
class SentenceScore:
    id: str
    bleu: float
    chrf: float


@dataclass
class EvalReport:
    corpus_bleu: float
    corpus_chrf: float
    per_sentence: list[SentenceScore]
    config_fingerprint: str
    bleu_label: str = "BLEU(whitespace)"
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "corpus_bleu": round(self.corpus_bleu, 2),
            "corpus_chrf": round(self.corpus_chrf, 2),
            "bleu_label": self.bleu_label,
            "config_fingerprint": self.config_fingerprint,
            "metadata": self.metadata,
            "per_sentence": [
                {"id": s.id, "bleu": round(s.bleu, 2), "chrf": round(s.chrf, 2)}
                for s in self.per_sentence
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            corpus_bleu=data["corpus_bleu"],
            corpus_chrf=data["corpus_chrf"],
            per_sentence=[SentenceScore(**s) for s in data.get("per_sentence", [])],
            config_fingerprint=data.get("config_fingerprint", ""),
            bleu_label=data.get("bleu_label", "BLEU(whitespace)"),
            metadata=data.get("metadata", {}),
        )

    @classmethod
    def load(cls, path: str | Path) -> "EvalReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def config_fingerprint(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True, ensure_ascii=False).encode()
    ).hexdigest()[:16]


# ---------------------------------------------------------------------------
# chrF++


def _char_ngram_counts(text: str, order: int) -> Counter:
    squeezed = "".join(text.split())
    return Counter(squeezed[i : i + order] for i in range(len(squeezed) - order + 1))


def _separate_punctuation(text: str) -> list[str]:
    """Split off a single leading or trailing punctuation mark per word."""
    tokens = []
    for w in text.split():
        if len(w) == 1:
            tokens.append(w)
        elif w[-1] in _PUNCTS:
            tokens.extend([w[:-1], w[-1]])
        elif w[0] in _PUNCTS:
            tokens.extend([w[0], w[1:]])
        else:
            tokens.append(w)
    return tokens


def _word_ngram_counts(tokens: list[str], order: int) -> Counter:
    return Counter(
        " ".join(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


def _segment_statistics(hyp: str, ref: str, params: ChrfParams) -> list[int]:
    """Per order: (hyp count, ref count, match count), chars then words."""
    stats: list[int] = []
    for order in range(1, params.char_order + 1):
        h = _char_ngram_counts(hyp, order)
        r = _char_ngram_counts(ref, order)
        stats += [sum(h.values()), sum(r.values()), sum((h & r).values())]
    if params.word_order > 0:
        h_toks = _separate_punctuation(hyp)
        r_toks = _separate_punctuation(ref)
        for order in range(1, params.word_order + 1):
            h = _word_ngram_counts(h_toks, order)
            r = _word_ngram_counts(r_toks, order)
            stats += [sum(h.values()), sum(r.values()), sum((h & r).values())]
    return stats


def _f_score(stats: list[int], params: ChrfParams) -> float:
    n_orders = params.char_order + params.word_order
    factor = params.beta**2
    avg_prec = avg_rec = 0.0
    effective = 0
    for i in range(n_orders):
        n_hyp, n_ref, n_match = stats[3 * i : 3 * i + 3]
        if n_hyp > 0 and n_ref > 0:
            avg_prec += n_match / n_hyp
            avg_rec += n_match / n_ref
            effective += 1
    if effective == 0:
        return 0.0
    avg_prec /= effective
    avg_rec /= effective
    denom = factor * avg_prec + avg_rec
    if denom == 0:
        return 0.0
    return 100.0 * (1 + factor) * avg_prec * avg_rec / denom


def chrf_pp(hypothesis: str, reference: str, params: ChrfParams = ChrfParams()) -> float:
    """Sentence-level chrF++ in [0, 100]."""
    return _f_score(_segment_statistics(hypothesis, reference, params), params)


def corpus_chrf(
    hypotheses: list[str], references: list[str], params: ChrfParams = ChrfParams()
) -> float:
    """Corpus-level chrF++ over pooled n-gram statistics."""
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise ValueError("need at least one hypothesis/reference pair")
    pooled = [0] * (3 * (params.char_order + params.word_order))
    for hyp, ref in zip(hypotheses, references):
        for i, v in enumerate(_segment_statistics(hyp, ref, params)):
            pooled[i] += v
    return _f_score(pooled, params)


# ---------------------------------------------------------------------------
# BLEU


def _bleu_statistics(hyp_tokens: list[str], ref_tokens: list[str], max_order: int):
    matches = [0] * max_order
    totals = [0] * max_order
    for order in range(1, max_order + 1):
        h = _word_ngram_counts(hyp_tokens, order)
        r = _word_ngram_counts(ref_tokens, order)
        totals[order - 1] = sum(h.values())
        matches[order - 1] = sum((h & r).values())
    return matches, totals


def _bleu_from_pooled(matches, totals, hyp_len, ref_len, max_order=4) -> float:
    if hyp_len == 0:
        return 0.0
    log_sum = 0.0
    for m, t in zip(matches, totals):
        if t == 0:
            precision = BLEU_SMOOTHING_EPSILON
        elif m == 0:
            precision = BLEU_SMOOTHING_EPSILON
        else:
            precision = m / t
        log_sum += math.log(precision)
    geo_mean = math.exp(log_sum / max_order)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * geo_mean


def corpus_bleu(
    hypotheses: list[str],
    references: list[str],
    tokenizer=None,
    max_order: int = 4,
) -> float:
    """Pooled-count BLEU with brevity penalty and epsilon smoothing."""
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise ValueError("need at least one hypothesis/reference pair")
    tokenizer = tokenizer or WhitespaceTokenizer()
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        h_toks = tokenizer.tokenize(hyp)
        r_toks = tokenizer.tokenize(ref)
        hyp_len += len(h_toks)
        ref_len += len(r_toks)
        m, t = _bleu_statistics(h_toks, r_toks, max_order)
        for i in range(max_order):
            matches[i] += m[i]
            totals[i] += t[i]
    return _bleu_from_pooled(matches, totals, hyp_len, ref_len, max_order)


def sentence_bleu(hypothesis: str, reference: str, tokenizer=None) -> float:
    return corpus_bleu([hypothesis], [reference], tokenizer=tokenizer)


def evaluate(
    ids: list[str],
    hypotheses: list[str],
    references: list[str],
    tokenizer=None,
    chrf_params: ChrfParams = ChrfParams(),
    config: dict | None = None,
) -> EvalReport:
    """Corpus + per-sentence scoring bundled into one report."""
    if not (len(ids) == len(hypotheses) == len(references)):
        raise ValueError("ids, hypotheses, and references must align")
    tokenizer = tokenizer or WhitespaceTokenizer()
    per_sentence = [
        SentenceScore(
            id=i,
            bleu=sentence_bleu(h, r, tokenizer=tokenizer),
            chrf=chrf_pp(h, r, chrf_params),
        )
        for i, h, r in zip(ids, hypotheses, references)
    ]
    label = "spBLEU" if tokenizer.is_subword_model else f"BLEU({tokenizer.name})"
    return EvalReport(
        corpus_bleu=corpus_bleu(hypotheses, references, tokenizer=tokenizer),
        corpus_chrf=corpus_chrf(hypotheses, references, chrf_params),
        per_sentence=per_sentence,
        config_fingerprint=config_fingerprint(config or {}),
        bleu_label=label,
        metadata={
            "tokenizer": tokenizer.name,
            "bleu_smoothing": f"epsilon={BLEU_SMOOTHING_EPSILON}",
            "chrf_char_order": chrf_params.char_order,
            "chrf_word_order": chrf_params.word_order,
            "chrf_beta": chrf_params.beta,
        },
    )
