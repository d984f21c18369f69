"""Scoring machine translations with chrF++ and pooled-count BLEU.

chrF++ (character n-grams of order 1-6 plus word n-grams of order 1-2,
F-beta with beta=2) is the headline metric for morphologically rich
low-resource targets; BLEU over whitespace tokens is reported alongside.
The demo drafts include two classic low-resource NMT failure modes -- a
repetition loop and a hallucinated name -- and the per-sentence scores
make both visible.

    python3 demos/03_scoring_translations.py
"""

from pathlib import Path

from ragmt.corpus import load_parallel
from ragmt.metrics import evaluate
from ragmt.pipeline import load_drafts

DATA = Path(__file__).resolve().parent / "data"

test_pairs = load_parallel(DATA / "test.tsv")
drafts = load_drafts(DATA / "drafts.tsv")

ids = [p.id for p in test_pairs]
hyps = [drafts[p.id] for p in test_pairs]
refs = [p.target_text for p in test_pairs]

report = evaluate(ids, hyps, refs)

print(f"corpus {report.bleu_label}: {report.corpus_bleu:6.2f}")
print(f"corpus chrF++:          {report.corpus_chrf:6.2f}")
print()
print(f"{'id':<10} {'BLEU':>7} {'chrF++':>7}")
for s in report.per_sentence:
    print(f"{s.id:<10} {s.bleu:7.2f} {s.chrf:7.2f}")
print()

# ---------------------------------------------------------------------------
# The two degenerate drafts stand out at the bottom of the ranking.

worst = sorted(report.per_sentence, key=lambda s: s.chrf)[:2]
by_id = {p.id: p for p in test_pairs}
for s in worst:
    print(f"low scorer {s.id} (chrF++ {s.chrf:.2f}):")
    print("  draft:    ", drafts[s.id])
    print("  reference:", by_id[s.id].target_text)
print()

# ---------------------------------------------------------------------------
# Why corpus BLEU pools n-gram counts instead of averaging sentence
# scores: short sentences with zero 4-gram matches would otherwise drag
# the average toward zero.

from ragmt.metrics import corpus_bleu, sentence_bleu  # noqa: E402

pooled = corpus_bleu(hyps, refs)
averaged = sum(sentence_bleu(h, r) for h, r in zip(hyps, refs)) / len(hyps)
print(f"pooled corpus BLEU:            {pooled:6.2f}")
print(f"mean of sentence BLEU scores:  {averaged:6.2f}  (not the same thing)")
