"""metriclab: a desk-scale laboratory for group word metrics, spectral
embedding obstructions, wreath-product imbeddings and Euclidean distortion."""

__version__ = "0.1.0"

from .kernels import BACKEND as kernel_backend  # noqa: F401
