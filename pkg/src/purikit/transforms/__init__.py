"""Real-world image transformations: JPEG, resampling, and chains."""

from .chain import (Jpeg, Resize, TransformChain, apply_chain, parse_chain,
                    parse_step)
from .jpeg import (QuantTables, format_quant_tables, jpeg_decode, jpeg_encode,
                   jpeg_roundtrip, quant_tables_for_quality)
from .resample import (LANCZOS3, ResampleKernel, kernel_by_name, resample)

__all__ = [
    "Jpeg", "Resize", "TransformChain", "apply_chain", "parse_chain",
    "parse_step", "QuantTables", "format_quant_tables", "jpeg_decode",
    "jpeg_encode", "jpeg_roundtrip", "quant_tables_for_quality",
    "LANCZOS3", "ResampleKernel", "kernel_by_name", "resample",
]
