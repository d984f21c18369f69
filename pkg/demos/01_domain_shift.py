"""Measuring the domain gap between training data and a held-out test set.

A model trained on one portion of a Bible (here: New Testament verses plus
a few grammar-book sentences) meets very different vocabulary when it is
asked to translate another portion (Old Testament narrative). This script
quantifies the gap with out-of-vocabulary (OOV) rates and per-10k term
frequencies, using the small demo corpus that ships with the package.

Run from the repository root:

    python3 demos/01_domain_shift.py
"""

from pathlib import Path

from ragmt.analysis import build_vocab, oov_report, term_frequency
from ragmt.corpus import load_parallel

DATA = Path(__file__).resolve().parent / "data"

train_pairs = load_parallel(DATA / "corpus.tsv")
test_pairs = load_parallel(DATA / "test.tsv")

train_texts = [p.source_text for p in train_pairs]
test_texts = [p.source_text for p in test_pairs]

# ---------------------------------------------------------------------------
# OOV rates: what fraction of the test side has the model never seen?

report = oov_report(train_texts, test_texts)
print("training pairs:      ", len(train_pairs))
print("test pairs:          ", len(test_pairs))
print("train vocab size:    ", report["train_vocab_size"])
print("tokenizer:           ", report["tokenizer"])
print(f"token-level OOV rate: {report['oov_rate_token']:.1%}")
print(f"type-level OOV rate:  {report['oov_rate_type']:.1%}")
print()

# An in-domain comparison: hold out the last five training verses and
# measure OOV against the rest. The gap between the two numbers is the
# domain shift.
in_train = train_texts[:-5]
in_eval = train_texts[-5:]
in_domain = oov_report(in_train, in_eval)
print(f"in-domain OOV (held-out train verses): {in_domain['oov_rate_token']:.1%}")
print(f"cross-domain OOV (test verses):        {report['oov_rate_token']:.1%}")
print()

# ---------------------------------------------------------------------------
# Term frequency: narrative vocabulary that dominates the test set can be
# rare or absent in training, and vice versa.

probe_terms = ["god", "created", "light", "darkness", "father", "kingdom"]
for label, texts in (("train", train_texts), ("test", test_texts)):
    tf = term_frequency(texts, probe_terms, corpus_label=label)
    print(f"per-10k-token counts in {label}:")
    for row in tf.rows:
        print(f"  {row.term:<10} {row.raw_count:>3} raw  {row.count_per_10k:8.1f} /10k")
    print()

# ---------------------------------------------------------------------------
# Which exact test words are unseen?

vocab = build_vocab(train_texts)
from ragmt.text import word_tokenize  # noqa: E402

unseen = sorted({
    tok for text in test_texts for tok in word_tokenize(text)
    if tok not in vocab.tokens
})
print("unseen test-side words:", ", ".join(unseen))
