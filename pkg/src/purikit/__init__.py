"""purikit: image-transformation robustness toolkit.

Implements JPEG / Lanczos-resize transformation chains, a region-wise
purification pipeline with pluggable super-resolution backends, native
full-reference quality metrics, a synthetic bounded-perturbation
simulator, and a config-driven evaluation harness.
"""

__version__ = "0.1.0"
