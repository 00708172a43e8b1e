"""Verification toolkit for text-guided image edits.

Computes difference-caption metrics (model precision / hallucination rate),
detects unintended artifacts from segmentation detection exports, generates
grounded difference captions through hosted vision-language providers with
record/replay, scores models on the binary verification questions against
human labels, augments training data, and collects human annotations over
HTTP.
"""

__version__ = "0.1.0"
