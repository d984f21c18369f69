"""In-context example retrieval over the English source side.

Four sentence strategies (BM25, dense cosine, diversity-aware character
n-gram greedy, word-level fuzzy matching) plus lexicon retrieval (fuzzy
top-n and full dictionary). All retrievers are deterministic; ties break
by ascending pair id so sweeps reproduce exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import LexiconEntry, ParallelPair
from .text import char_ngrams, word_tokenize

STRATEGIES = ("BM25", "DENSE", "CHRF_CW", "FUZZY_WORD")


@dataclass
class RetrievedExample:
    pair: ParallelPair
    score: float
    strategy: str
    matched_token: str | None = None


@dataclass
class RetrievedLexicon:
    entry: LexiconEntry
    score: float
    query_word: str


def corpus_fingerprint(pairs: list[ParallelPair]) -> str:
    """Content hash of a pair list, for keying persisted indices."""
    h = hashlib.sha256()
    for p in pairs:
        h.update(f"{p.id}\x1f{p.source_text}\x1f{p.target_text}\x1f{p.origin}\x1e".encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# BM25


class Bm25Index:
    """Inverted-index BM25 over tokenized source texts.

    idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1), the standard Okapi+1 form.
    """

    def __init__(self, pairs: list[ParallelPair], k1: float = 1.5, b: float = 0.75):
        if k1 <= 0:
            raise ValueError("k1 must be positive")
        if not 0.0 <= b <= 1.0:
            raise ValueError("b must be in [0, 1]")
        self.pairs = list(pairs)
        self.k1 = k1
        self.b = b
        self.doc_tokens = [word_tokenize(p.source_text) for p in self.pairs]
        self.doc_lens = [len(toks) for toks in self.doc_tokens]
        self.avgdl = (sum(self.doc_lens) / len(self.doc_lens)) if self.pairs else 0.0
        # term -> {doc_index: term frequency}
        self.postings: dict[str, dict[int, int]] = {}
        for idx, toks in enumerate(self.doc_tokens):
            for term, tf in Counter(toks).items():
                self.postings.setdefault(term, {})[idx] = tf
        n = len(self.pairs)
        self.idf = {
            term: math.log((n - len(docs) + 0.5) / (len(docs) + 0.5) + 1.0)
            for term, docs in self.postings.items()
        }
        self.fingerprint = corpus_fingerprint(self.pairs)

    def score_document(self, query_tokens: list[str], doc_index: int) -> float:
        dl = self.doc_lens[doc_index]
        norm = self.k1 * (1.0 - self.b + self.b * dl / self.avgdl) if self.avgdl else 0.0
        score = 0.0
        for term in query_tokens:
            docs = self.postings.get(term)
            if not docs:
                continue
            tf = docs.get(doc_index, 0)
            if tf:
                score += self.idf[term] * tf * (self.k1 + 1.0) / (tf + norm)
        return score

    def save(self, path: str | Path) -> None:
        payload = {
            "kind": "bm25",
            "version": 1,
            "fingerprint": self.fingerprint,
            "k1": self.k1,
            "b": self.b,
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, pairs: list[ParallelPair]) -> "Bm25Index":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("kind") != "bm25":
            raise ValueError(f"{path} is not a BM25 index sidecar")
        if payload["fingerprint"] != corpus_fingerprint(pairs):
            raise ValueError("index sidecar does not match the supplied corpus")
        return cls(pairs, k1=payload["k1"], b=payload["b"])


def bm25_retrieve(index: Bm25Index, query: str, k: int) -> list[RetrievedExample]:
    """Top-k by BM25 score; zero-score documents are dropped."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not index.pairs:
        raise ValueError("BM25 index is empty")
    query_tokens = word_tokenize(query)
    # only documents sharing a term can score > 0
    candidates: set[int] = set()
    for term in set(query_tokens):
        candidates.update(index.postings.get(term, ()))
    scored = [
        (index.score_document(query_tokens, idx), idx)
        for idx in candidates
    ]
    scored = [(s, idx) for s, idx in scored if s > 0.0]
    scored.sort(key=lambda item: (-item[0], index.pairs[item[1]].id))
    return [
        RetrievedExample(pair=index.pairs[idx], score=s, strategy="BM25")
        for s, idx in scored[:k]
    ]


# ---------------------------------------------------------------------------
# Dense retrieval


class EmbeddingIndex:
    """Unit-normalized embedding matrix aligned with a pair list."""

    def __init__(self, pairs: list[ParallelPair], vectors: np.ndarray, provider_fingerprint: str):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(pairs):
            raise ValueError(
                f"need one vector per pair: {vectors.shape[0]} vectors, {len(pairs)} pairs"
            )
        norms = np.linalg.norm(vectors, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-6):
            raise ValueError("embedding vectors must be unit-normalized")
        self.pairs = list(pairs)
        self.vectors = vectors
        self.dimension = vectors.shape[1]
        self.provider_fingerprint = provider_fingerprint
        self.fingerprint = corpus_fingerprint(self.pairs)

    def save(self, path: str | Path) -> None:
        payload = {
            "kind": "embedding",
            "version": 1,
            "fingerprint": self.fingerprint,
            "provider_fingerprint": self.provider_fingerprint,
            "vectors": self.vectors.tolist(),
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(
        cls, path: str | Path, pairs: list[ParallelPair], provider_fingerprint: str
    ) -> "EmbeddingIndex":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("kind") != "embedding":
            raise ValueError(f"{path} is not an embedding index sidecar")
        if payload["fingerprint"] != corpus_fingerprint(pairs):
            raise ValueError("index sidecar does not match the supplied corpus")
        if payload["provider_fingerprint"] != provider_fingerprint:
            raise ValueError(
                "stale embedding index: provider fingerprint "
                f"{payload['provider_fingerprint']!r} != {provider_fingerprint!r}"
            )
        return cls(pairs, np.array(payload["vectors"]), provider_fingerprint)


def normalize_vector(vector) -> np.ndarray:
    v = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalize a zero vector")
    return v / norm


def dense_retrieve(index: EmbeddingIndex, query_vector, k: int) -> list[RetrievedExample]:
    """Top-k by cosine similarity (dot product of unit vectors)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = np.asarray(query_vector, dtype=np.float64)
    if q.shape != (index.dimension,):
        raise ValueError(
            f"query dimension {q.shape[0] if q.ndim == 1 else q.shape} "
            f"!= index dimension {index.dimension}"
        )
    scores = index.vectors @ q
    order = sorted(range(len(index.pairs)), key=lambda i: (-scores[i], index.pairs[i].id))
    return [
        RetrievedExample(pair=index.pairs[i], score=float(scores[i]), strategy="DENSE")
        for i in order[:k]
    ]


# ---------------------------------------------------------------------------
# ChrF-counterweighted greedy retrieval


def chrf_counterweighted_retrieve(
    pairs: list[ParallelPair],
    query: str,
    k: int,
    gamma: float = 0.5,
    n_min: int = 2,
    n_max: int = 6,
) -> list[RetrievedExample]:
    """Greedy diverse selection by character n-gram overlap with the query.

    Each query n-gram carries a residual weight (initially 1.0). A candidate
    scores the sum of residual weights of its distinct n-grams shared with
    the query, divided by the candidate's distinct n-gram count. Selecting a
    candidate decays the residual weight of every shared query n-gram by
    gamma, steering later picks toward uncovered material. A candidate whose
    source text is byte-identical to an already selected one is skipped while
    any distinct candidate still has positive score.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not query.strip():
        raise ValueError("query must be non-empty")
    query_grams = set(char_ngrams(query, n_min, n_max))
    weights = {g: 1.0 for g in query_grams}

    profiles = []
    for idx, pair in enumerate(pairs):
        grams = set(char_ngrams(pair.source_text, n_min, n_max))
        profiles.append((idx, pair, grams, grams & query_grams))

    selected: list[RetrievedExample] = []
    selected_texts: set[str] = set()
    remaining = list(profiles)
    while remaining and len(selected) < k:
        best = None
        best_dup = None
        for idx, pair, grams, shared in remaining:
            if not grams:
                score = 0.0
            else:
                score = sum(weights[g] for g in shared) / len(grams)
            key = (-score, pair.id)
            if gamma < 1.0 and pair.source_text in selected_texts:
                if best_dup is None or key < best_dup[0]:
                    best_dup = (key, idx, pair, shared, score)
            else:
                if best is None or key < best[0]:
                    best = (key, idx, pair, shared, score)
        if best is None or (best[4] <= 0.0 and best_dup is not None and best_dup[4] > 0.0):
            best = best_dup
        if best is None:
            break
        _, idx, pair, shared, score = best
        selected.append(RetrievedExample(pair=pair, score=score, strategy="CHRF_CW"))
        selected_texts.add(pair.source_text)
        for g in shared:
            weights[g] *= gamma
        remaining = [item for item in remaining if item[0] != idx]
    return selected


# ---------------------------------------------------------------------------
# Fuzzy word matching


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def normalized_levenshtein(a: str, b: str) -> float:
    """1 - distance / max length, in [0, 1]; 1.0 when both strings empty."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def fuzzy_word_retrieve(
    pairs: list[ParallelPair],
    query: str,
    n: int,
    threshold: float = 0.5,
) -> list[RetrievedExample]:
    """Per query word, the top-n sentences by best-token fuzzy similarity.

    Results are unioned across query words and deduplicated by pair id
    (keeping the highest score and its matched token), so the effective
    volume scales with sentence length: at most n * len(query tokens).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    query_tokens = word_tokenize(query)
    doc_tokens = [sorted(set(word_tokenize(p.source_text))) for p in pairs]

    best_by_id: dict[str, RetrievedExample] = {}
    for token in query_tokens:
        scored = []
        for pair, toks in zip(pairs, doc_tokens):
            best = 0.0
            for cand in toks:
                sim = normalized_levenshtein(token, cand)
                if sim > best:
                    best = sim
                    if best == 1.0:
                        break
            if best >= threshold:
                scored.append((best, pair))
        scored.sort(key=lambda item: (-item[0], item[1].id))
        for sim, pair in scored[:n]:
            existing = best_by_id.get(pair.id)
            if existing is None or sim > existing.score:
                best_by_id[pair.id] = RetrievedExample(
                    pair=pair, score=sim, strategy="FUZZY_WORD", matched_token=token
                )
    results = list(best_by_id.values())
    results.sort(key=lambda r: (-r.score, r.pair.id))
    return results


# ---------------------------------------------------------------------------
# Lexicon retrieval


def lexicon_fuzzy_retrieve(
    lexicon: list[LexiconEntry],
    query: str,
    n: int,
    threshold: float = 0.5,
) -> list[RetrievedLexicon]:
    """Per query word, the top-n lexicon entries by fuzzy headword match."""
    if n < 1:
        raise ValueError("n must be >= 1")
    query_tokens = word_tokenize(query)
    best: dict[tuple, RetrievedLexicon] = {}
    for token in query_tokens:
        scored = []
        for entry in lexicon:
            sim = normalized_levenshtein(token, entry.source_word.lower())
            if sim >= threshold:
                scored.append((sim, entry))
        scored.sort(key=lambda item: (-item[0], item[1].source_word))
        for sim, entry in scored[:n]:
            key = (entry.source_word, entry.pos, entry.target_word)
            if key not in best or sim > best[key].score:
                best[key] = RetrievedLexicon(entry=entry, score=sim, query_word=token)
    results = list(best.values())
    results.sort(key=lambda r: (-r.score, r.entry.source_word))
    return results


def lexicon_full(lexicon: list[LexiconEntry]) -> list[RetrievedLexicon]:
    """The whole dictionary as static context, input order preserved."""
    return [RetrievedLexicon(entry=e, score=1.0, query_word="") for e in lexicon]
