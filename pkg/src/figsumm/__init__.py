"""figsumm: figure-caption generation treated as text summarization.

Corpus construction (mention detection, source-text assembly), non-neural
baselines, length-normalized overlap metrics, and annotation analysis,
plus an HTTP service for blinded human annotation.
"""

__version__ = "0.1.0"
