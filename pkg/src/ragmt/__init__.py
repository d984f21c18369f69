"""Retrieval-augmented LLM post-editing for low-resource machine translation.

The package covers the full experiment loop: corpus loading and partitioning,
domain-shift analysis, in-context example retrieval (sparse, dense, diversity-
aware, and word-level fuzzy), prompt rendering, provider access with caching
and replay, chrF++/BLEU scoring, and the sweep/compare harness.
"""

__version__ = "0.1.0"
