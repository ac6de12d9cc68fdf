"""Simulation and verification toolkit for separately exchangeable arrays.

Samples multi-index data with separately exchangeable structure from latent
uniform factors, decomposes empirical means into orthogonal per-index-set
components, builds transversal partitions of index lattices, and checks
moment bounds for suprema of the resulting empirical processes against
entropy-based envelopes at small scale.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND
