"""Pure-numpy kernel implementations (fallback path, no JIT).

The array kernels are vectorized; the entropy codec is the shared serial
source from scan_codec run under plain CPython.
"""

import numpy as np

from .scan_codec import encode_scan, decode_scan  # noqa: F401  (re-exported)

NAME = "numpy"

# orthonormal 8-point DCT-II matrix
_D = np.empty((8, 8), dtype=np.float64)
for _u in range(8):
    _c = np.sqrt(1.0 / 8.0) if _u == 0 else 0.5
    for _x in range(8):
        _D[_u, _x] = _c * np.cos((2 * _x + 1) * _u * np.pi / 16.0)
_DT = np.ascontiguousarray(_D.T)


def gather_rows(plane, idx, w):
    """Weighted gather along axis 0 with per-output renormalization.

    plane : (H, W) float64
    idx   : (O, T) int64 source rows per output row (already clamped)
    w     : (O, T) float64 raw tap weights

    out[o, c] = sum_t w[o,t] * plane[idx[o,t], c] / sum_t w[o,t]

    Accumulation runs in tap order so the numba twin is bit-identical.
    """
    taps = idx.shape[1]
    out = np.take(plane, idx[:, 0], axis=0)
    out *= w[:, 0][:, None]
    den = w[:, 0].copy()
    buf = np.empty_like(out)
    for t in range(1, taps):
        np.take(plane, idx[:, t], axis=0, out=buf)
        buf *= w[:, t][:, None]
        out += buf
        den += w[:, t]
    out /= den[:, None]
    return out


def fdct8x8(blocks):
    """Forward 8x8 DCT-II (orthonormal) over a stack of blocks (n, 8, 8)."""
    return _D @ blocks @ _DT


def idct8x8_islow(deq):
    """Integer inverse DCT matching the classic libjpeg slow path.

    deq : (n, 64) int64 dequantized coefficients, natural order.
    Returns (n, 64) uint8 samples (level shift +128 and clamp applied).

    13-bit fixed-point constants, two passes with rounding descales of
    11 and 18 bits; all-integer, so results are exact across backends.
    """
    n = deq.shape[0]
    b = deq.reshape(n, 8, 8)

    # pass 1 runs down coefficient columns (lane axis = column)
    cols = _butterfly([b[:, v, :] for v in range(8)], 1 << 10, 11)
    ws = np.empty((n, 8, 8), dtype=np.int64)
    for k in range(8):
        ws[:, k, :] = cols[k]

    # pass 2 runs along workspace rows (lane axis = row)
    rows = _butterfly([ws[:, :, u] for u in range(8)], 1 << 17, 18)
    res = np.empty((n, 8, 8), dtype=np.int64)
    for k in range(8):
        res[:, :, k] = rows[k]

    return np.clip(res + 128, 0, 255).astype(np.uint8).reshape(n, 64)


def _butterfly(r, round_add, shift_out):
    """One 1-D islow butterfly over eight stacked lanes r[0..7]."""
    z2 = r[2]
    z3 = r[6]
    z1 = (z2 + z3) * 4433            # 0.541196100
    tmp2 = z1 - z3 * 15137           # 1.847759065
    tmp3 = z1 + z2 * 6270            # 0.765366865
    z2 = r[0]
    z3 = r[4]
    tmp0 = (z2 + z3) << 13
    tmp1 = (z2 - z3) << 13
    tmp10 = tmp0 + tmp3
    tmp13 = tmp0 - tmp3
    tmp11 = tmp1 + tmp2
    tmp12 = tmp1 - tmp2

    t0 = r[7]
    t1 = r[5]
    t2 = r[3]
    t3 = r[1]
    z1 = t0 + t3
    z2 = t1 + t2
    z3 = t0 + t2
    z4 = t1 + t3
    z5 = (z3 + z4) * 9633            # 1.175875602
    t0 = t0 * 2446                   # 0.298631336
    t1 = t1 * 16819                  # 2.053119869
    t2 = t2 * 25172                  # 3.072711026
    t3 = t3 * 12299                  # 1.501321110
    z1 = z1 * -7373                  # 0.899976223
    z2 = z2 * -20995                 # 2.562915447
    z3 = z3 * -16069                 # 1.961570560
    z4 = z4 * -3196                  # 0.390180644
    z3 = z3 + z5
    z4 = z4 + z5
    t0 = t0 + z1 + z3
    t1 = t1 + z2 + z4
    t2 = t2 + z2 + z3
    t3 = t3 + z1 + z4

    return ((tmp10 + t3 + round_add) >> shift_out,
            (tmp11 + t2 + round_add) >> shift_out,
            (tmp12 + t1 + round_add) >> shift_out,
            (tmp13 + t0 + round_add) >> shift_out,
            (tmp13 - t0 + round_add) >> shift_out,
            (tmp12 - t1 + round_add) >> shift_out,
            (tmp11 - t2 + round_add) >> shift_out,
            (tmp10 - t3 + round_add) >> shift_out)
