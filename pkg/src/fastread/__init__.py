"""FASTREAD: an active-learning workbench for primary-study selection.

Screens large candidate-study lists with a human (or oracle) in the loop:
a linear SVM over tf-idf features proposes which study to read next, the
reviewer codes it relevant/irrelevant, and the model retrains on the
growing label set until the review is done.
"""

__version__ = "0.1.0"
