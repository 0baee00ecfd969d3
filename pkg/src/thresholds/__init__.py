"""Numerical experiments on statistical-computational thresholds: detection,
low-degree bounds, free energies, Markov chains, overlap gaps and SK certificates."""
__version__ = "0.1.0"
