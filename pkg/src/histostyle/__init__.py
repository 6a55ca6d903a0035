"""Histology-style transfer for grayscale endomicroscopy images.

Subpackages cover the fixed feature-extraction network and its tensor
kernels, the pixel-space optimizer, image utilities, the two-property
quality-scoring data model with its statistics, and the CLI/review service.
"""

__version__ = "0.1.0"
