"""Robustness-aware radiomics: perturbed segmentations, ICC profiling, robust
feature selection, and response prediction on CT lesion cohorts."""

__version__ = "0.1.0"
