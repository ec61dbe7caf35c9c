"""Numba-compiled kernel implementations (default path).

Importing this module requires numba; the kernels package falls back to
the numpy backend when the import fails or when PURIKIT_KERNELS=numpy.
"""

import numpy as np
from numba import njit

from . import scan_codec

NAME = "numba"

_D = np.empty((8, 8), dtype=np.float64)
for _u in range(8):
    _c = np.sqrt(1.0 / 8.0) if _u == 0 else 0.5
    for _x in range(8):
        _D[_u, _x] = _c * np.cos((2 * _x + 1) * _u * np.pi / 16.0)


@njit(cache=True)
def _gather_rows(plane, idx, w):
    n_out, taps = idx.shape
    width = plane.shape[1]
    out = np.empty((n_out, width), dtype=np.float64)
    for i in range(n_out):
        den = w[i, 0]
        for t in range(1, taps):
            den += w[i, t]
        for j in range(width):
            acc = w[i, 0] * plane[idx[i, 0], j]
            for t in range(1, taps):
                acc += w[i, t] * plane[idx[i, t], j]
            out[i, j] = acc / den
    return out


def gather_rows(plane, idx, w):
    """Weighted gather along axis 0; see the numpy twin for the contract."""
    return _gather_rows(plane, idx, w)


@njit(cache=True)
def _fdct8x8(blocks, d):
    n = blocks.shape[0]
    out = np.empty((n, 8, 8), dtype=np.float64)
    tmp = np.empty((8, 8), dtype=np.float64)
    for b in range(n):
        for u in range(8):
            for x in range(8):
                acc = 0.0
                for k in range(8):
                    acc += d[u, k] * blocks[b, k, x]
                tmp[u, x] = acc
        for u in range(8):
            for v in range(8):
                acc = 0.0
                for k in range(8):
                    acc += tmp[u, k] * d[v, k]
                out[b, u, v] = acc
    return out


def fdct8x8(blocks):
    """Forward 8x8 DCT-II (orthonormal) over a stack of blocks (n, 8, 8)."""
    return _fdct8x8(blocks, _D)


@njit(cache=True)
def idct8x8_islow(deq):
    """Integer inverse DCT (libjpeg slow path); see the numpy twin."""
    n = deq.shape[0]
    out = np.empty((n, 64), dtype=np.uint8)
    ws = np.empty(64, dtype=np.int64)
    for b in range(n):
        blk = deq[b]
        for c in range(8):
            z2 = blk[16 + c]
            z3 = blk[48 + c]
            z1 = (z2 + z3) * 4433
            tmp2 = z1 - z3 * 15137
            tmp3 = z1 + z2 * 6270
            z2 = blk[c]
            z3 = blk[32 + c]
            tmp0 = (z2 + z3) << 13
            tmp1 = (z2 - z3) << 13
            tmp10 = tmp0 + tmp3
            tmp13 = tmp0 - tmp3
            tmp11 = tmp1 + tmp2
            tmp12 = tmp1 - tmp2
            t0 = blk[56 + c]
            t1 = blk[40 + c]
            t2 = blk[24 + c]
            t3 = blk[8 + c]
            z1 = t0 + t3
            z2 = t1 + t2
            z3 = t0 + t2
            z4 = t1 + t3
            z5 = (z3 + z4) * 9633
            t0 = t0 * 2446
            t1 = t1 * 16819
            t2 = t2 * 25172
            t3 = t3 * 12299
            z1 = z1 * -7373
            z2 = z2 * -20995
            z3 = z3 * -16069
            z4 = z4 * -3196
            z3 = z3 + z5
            z4 = z4 + z5
            t0 = t0 + z1 + z3
            t1 = t1 + z2 + z4
            t2 = t2 + z2 + z3
            t3 = t3 + z1 + z4
            ws[c] = (tmp10 + t3 + 1024) >> 11
            ws[8 + c] = (tmp11 + t2 + 1024) >> 11
            ws[16 + c] = (tmp12 + t1 + 1024) >> 11
            ws[24 + c] = (tmp13 + t0 + 1024) >> 11
            ws[32 + c] = (tmp13 - t0 + 1024) >> 11
            ws[40 + c] = (tmp12 - t1 + 1024) >> 11
            ws[48 + c] = (tmp11 - t2 + 1024) >> 11
            ws[56 + c] = (tmp10 - t3 + 1024) >> 11
        for r in range(8):
            o = r * 8
            z2 = ws[o + 2]
            z3 = ws[o + 6]
            z1 = (z2 + z3) * 4433
            tmp2 = z1 - z3 * 15137
            tmp3 = z1 + z2 * 6270
            z2 = ws[o]
            z3 = ws[o + 4]
            tmp0 = (z2 + z3) << 13
            tmp1 = (z2 - z3) << 13
            tmp10 = tmp0 + tmp3
            tmp13 = tmp0 - tmp3
            tmp11 = tmp1 + tmp2
            tmp12 = tmp1 - tmp2
            t0 = ws[o + 7]
            t1 = ws[o + 5]
            t2 = ws[o + 3]
            t3 = ws[o + 1]
            z1 = t0 + t3
            z2 = t1 + t2
            z3 = t0 + t2
            z4 = t1 + t3
            z5 = (z3 + z4) * 9633
            t0 = t0 * 2446
            t1 = t1 * 16819
            t2 = t2 * 25172
            t3 = t3 * 12299
            z1 = z1 * -7373
            z2 = z2 * -20995
            z3 = z3 * -16069
            z4 = z4 * -3196
            z3 = z3 + z5
            z4 = z4 + z5
            t0 = t0 + z1 + z3
            t1 = t1 + z2 + z4
            t2 = t2 + z2 + z3
            t3 = t3 + z1 + z4
            v0 = ((tmp10 + t3 + 131072) >> 18) + 128
            v1 = ((tmp11 + t2 + 131072) >> 18) + 128
            v2 = ((tmp12 + t1 + 131072) >> 18) + 128
            v3 = ((tmp13 + t0 + 131072) >> 18) + 128
            v4 = ((tmp13 - t0 + 131072) >> 18) + 128
            v5 = ((tmp12 - t1 + 131072) >> 18) + 128
            v6 = ((tmp11 - t2 + 131072) >> 18) + 128
            v7 = ((tmp10 - t3 + 131072) >> 18) + 128
            out[b, o] = min(max(v0, 0), 255)
            out[b, o + 1] = min(max(v1, 0), 255)
            out[b, o + 2] = min(max(v2, 0), 255)
            out[b, o + 3] = min(max(v3, 0), 255)
            out[b, o + 4] = min(max(v4, 0), 255)
            out[b, o + 5] = min(max(v5, 0), 255)
            out[b, o + 6] = min(max(v6, 0), 255)
            out[b, o + 7] = min(max(v7, 0), 255)
    return out


# Compile the shared serial codec source under nopython mode.
encode_scan = njit(cache=True)(scan_codec.encode_scan)
decode_scan = njit(cache=True)(scan_codec.decode_scan)
