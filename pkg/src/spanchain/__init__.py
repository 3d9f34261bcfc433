"""Structured-prediction toolkit for span tasks: tag codecs with legality
repair, constrained linear-chain CRF decoding and training, ensemble span
merging, boundary fixing, gazetteer boosting, nesting resolution,
repetition post-processing, and the matching evaluation metrics."""

__version__ = "0.1.0"
