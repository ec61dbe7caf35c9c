"""Baseline sequential JPEG codec (JFIF, Huffman, 8-bit).

Encoding: JFIF color conversion, optional 4:2:0 chroma downsampling,
float DCT, IJG-scaled quantization tables, the standard example Huffman
tables, byte-stuffed entropy coding.  Output is byte-deterministic.

Decoding: marker parse, Huffman decode (restart markers honored),
dequantize, integer slow-path IDCT, triangle-filter chroma upsampling,
fixed-point YCbCr->RGB.  These integer stages reproduce the classic
libjpeg decode pipeline sample-exactly, which keeps cross-codec deltas
inside one 8-bit step.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import kernels
from ..errors import (EncodeError, MalformedStream, QualityOutOfRange,
                      UnsupportedJpegFeature)
from ..imgcore import ImageF, rgb_to_ycbcr

# natural (row-major) index of each zigzag position
ZIGZAG = np.array([
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
], dtype=np.int64)

# base quantization tables (ITU-T T.81 Annex K, natural order)
BASE_LUMINANCE = np.array([
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
], dtype=np.int64).reshape(8, 8)

BASE_CHROMINANCE = np.array([
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
], dtype=np.int64).reshape(8, 8)

# standard example Huffman tables (bits list, then symbol values)
DC_LUM_BITS = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
DC_LUM_VALS = list(range(12))
DC_CHR_BITS = [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0]
DC_CHR_VALS = list(range(12))
AC_LUM_BITS = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D]
AC_LUM_VALS = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
    0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
    0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72,
    0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75,
    0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3,
    0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
    0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9,
    0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4,
    0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA,
]
AC_CHR_BITS = [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77]
AC_CHR_VALS = [
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41,
    0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
    0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0, 0x15, 0x62, 0x72, 0xD1,
    0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
    0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44,
    0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
    0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74,
    0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
    0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A,
    0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
    0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7,
    0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
    0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4,
    0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA,
]

# fixed-point YCbCr->RGB tables (16-bit scale, chroma centered at 128)
_X = np.arange(256, dtype=np.int64) - 128
_CR_R = (91881 * _X + 32768) >> 16
_CB_B = (116130 * _X + 32768) >> 16
_CR_G = -46802 * _X
_CB_G = -22554 * _X + 32768


@dataclass(frozen=True)
class QuantTables:
    """Luminance and chrominance quantization tables (natural order, 8x8)."""

    luminance: np.ndarray
    chrominance: np.ndarray


def quant_tables_for_quality(q: int) -> QuantTables:
    """IJG quality scaling of the base tables.

    scale = 5000/q below 50, else 200 - 2q; each entry becomes
    clamp(floor((base * scale + 50) / 100), 1, 255).
    """
    if not isinstance(q, int) or isinstance(q, bool) or not 1 <= q <= 100:
        raise QualityOutOfRange(f"quality must be an integer in [1, 100], got {q!r}")
    scale = 5000 // q if q < 50 else 200 - 2 * q
    lum = np.clip((BASE_LUMINANCE * scale + 50) // 100, 1, 255)
    chrom = np.clip((BASE_CHROMINANCE * scale + 50) // 100, 1, 255)
    return QuantTables(lum, chrom)


def _build_encode_table(bits, vals, width):
    code = np.zeros((width,), dtype=np.int32)
    size = np.zeros((width,), dtype=np.int32)
    c = 0
    k = 0
    for l in range(1, 17):
        for _ in range(bits[l - 1]):
            code[vals[k]] = c
            size[vals[k]] = l
            c += 1
            k += 1
        c <<= 1
    return code, size


def _build_decode_table(bits, vals):
    maxcode = np.full(17, -1, dtype=np.int64)
    valoff = np.zeros(17, dtype=np.int64)
    huffval = np.zeros(256, dtype=np.int32)
    huffval[:len(vals)] = vals
    code = 0
    k = 0
    for l in range(1, 17):
        n = bits[l - 1]
        if n:
            valoff[l] = k - code
            code += n
            k += n
            maxcode[l] = code - 1
        code <<= 1
    return maxcode, valoff, huffval


@lru_cache(maxsize=1)
def _encode_tables():
    dc_code = np.zeros((2, 16), dtype=np.int32)
    dc_size = np.zeros((2, 16), dtype=np.int32)
    ac_code = np.zeros((2, 256), dtype=np.int32)
    ac_size = np.zeros((2, 256), dtype=np.int32)
    dc_code[0], dc_size[0] = _build_encode_table(DC_LUM_BITS, DC_LUM_VALS, 16)
    dc_code[1], dc_size[1] = _build_encode_table(DC_CHR_BITS, DC_CHR_VALS, 16)
    ac_code[0], ac_size[0] = _build_encode_table(AC_LUM_BITS, AC_LUM_VALS, 256)
    ac_code[1], ac_size[1] = _build_encode_table(AC_CHR_BITS, AC_CHR_VALS, 256)
    return dc_code, dc_size, ac_code, ac_size


@lru_cache(maxsize=64)
def _scan_layout(samp, mcus_x, mcus_y, blocks_wide, dc_slots, ac_slots):
    """Scan-order block indices and per-block table/predictor selectors."""
    offsets = []
    total = 0
    for ci, (hq, vq) in enumerate(samp):
        offsets.append(total)
        total += (mcus_y * vq) * blocks_wide[ci]
    order = np.empty(total, dtype=np.int64)
    dc_sel = np.empty(total, dtype=np.uint8)
    ac_sel = np.empty(total, dtype=np.uint8)
    pred_sel = np.empty(total, dtype=np.uint8)
    pos = 0
    for my in range(mcus_y):
        for mx in range(mcus_x):
            for ci, (hq, vq) in enumerate(samp):
                bw = blocks_wide[ci]
                for by in range(vq):
                    for bx in range(hq):
                        order[pos] = offsets[ci] + (my * vq + by) * bw + (mx * hq + bx)
                        dc_sel[pos] = dc_slots[ci]
                        ac_sel[pos] = ac_slots[ci]
                        pred_sel[pos] = ci
                        pos += 1
    return order, dc_sel, ac_sel, pred_sel


def _pad_edge(plane, rows, cols):
    h, w = plane.shape
    if rows == h and cols == w:
        return plane
    return np.pad(plane, ((0, rows - h), (0, cols - w)), mode="edge")


def _box2(plane):
    """2x2 box mean with edge replication for odd dimensions."""
    h, w = plane.shape
    p = _pad_edge(plane, h + (h & 1), w + (w & 1))
    return 0.25 * (p[0::2, 0::2] + p[0::2, 1::2] + p[1::2, 0::2] + p[1::2, 1::2])


def _plane_to_blocks(plane):
    bh, bw = plane.shape[0] // 8, plane.shape[1] // 8
    return plane.reshape(bh, 8, bw, 8).transpose(0, 2, 1, 3).reshape(-1, 8, 8)


def _blocks_to_plane(blocks, bh, bw):
    return blocks.reshape(bh, bw, 8, 8).transpose(0, 2, 1, 3).reshape(bh * 8, bw * 8)


def jpeg_encode(img: ImageF, q: int, subsampling: str = "4:2:0") -> bytes:
    """Encode to a baseline JFIF byte stream. Deterministic for fixed inputs."""
    if subsampling not in ("4:4:4", "4:2:0"):
        raise ValueError(f"subsampling must be '4:4:4' or '4:2:0', got {subsampling!r}")
    w, h = img.width, img.height
    if w > 65535 or h > 65535:
        raise EncodeError(f"image {w}x{h} exceeds the 16-bit JPEG dimension limit")
    qt = quant_tables_for_quality(q)

    if img.channels == 1:
        planes = [img.data[0] * 255.0]
        samp = ((1, 1),)
        quant_sel = (0,)
        dc_slots = (0,)
        ac_slots = (0,)
    else:
        ycc = rgb_to_ycbcr(img).data * 255.0
        cb, cr = ycc[1], ycc[2]
        if subsampling == "4:2:0":
            cb, cr = _box2(cb), _box2(cr)
            samp = ((2, 2), (1, 1), (1, 1))
        else:
            samp = ((1, 1), (1, 1), (1, 1))
        planes = [ycc[0], cb, cr]
        quant_sel = (0, 1, 1)
        dc_slots = (0, 1, 1)
        ac_slots = (0, 1, 1)

    hmax = max(s[0] for s in samp)
    vmax = max(s[1] for s in samp)
    mcus_x = -(-w // (8 * hmax))
    mcus_y = -(-h // (8 * vmax))

    qtabs = (qt.luminance.astype(np.float64), qt.chrominance.astype(np.float64))
    zz_parts = []
    blocks_wide = []
    for ci, plane in enumerate(planes):
        hq, vq = samp[ci]
        bw, bh = mcus_x * hq, mcus_y * vq
        padded = _pad_edge(plane, bh * 8, bw * 8)
        blocks = np.ascontiguousarray(_plane_to_blocks(padded) - 128.0)
        coefs = kernels.fdct8x8(blocks) / qtabs[quant_sel[ci]]
        quant = np.trunc(coefs + np.copysign(0.5, coefs)).astype(np.int32)
        zz_parts.append(quant.reshape(-1, 64)[:, ZIGZAG])
        blocks_wide.append(bw)

    order, dc_sel, ac_sel, pred_sel = _scan_layout(
        samp, mcus_x, mcus_y, tuple(blocks_wide), dc_slots, ac_slots)
    scan_blocks = np.ascontiguousarray(np.concatenate(zz_parts)[order])
    dc_code, dc_size, ac_code, ac_size = _encode_tables()
    buf, nbytes = kernels.encode_scan(scan_blocks, dc_sel, ac_sel, pred_sel,
                                      dc_code, dc_size, ac_code, ac_size)

    out = bytearray()
    out += b"\xff\xd8"  # SOI
    out += b"\xff\xe0" + struct.pack(">H", 16) + b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00"
    # DQT segments (zigzag order)
    ntables = 1 if img.channels == 1 else 2
    for tid in range(ntables):
        table = (qt.luminance, qt.chrominance)[tid].reshape(64)[ZIGZAG]
        out += b"\xff\xdb" + struct.pack(">HB", 67, tid) + bytes(int(v) for v in table)
    # SOF0
    ncomp = img.channels
    out += b"\xff\xc0" + struct.pack(">HBHHB", 8 + 3 * ncomp, 8, h, w, ncomp)
    for ci in range(ncomp):
        out += struct.pack("BBB", ci + 1, (samp[ci][0] << 4) | samp[ci][1], quant_sel[ci])
    # DHT
    hufftabs = [(0x00, DC_LUM_BITS, DC_LUM_VALS), (0x10, AC_LUM_BITS, AC_LUM_VALS)]
    if ncomp == 3:
        hufftabs += [(0x01, DC_CHR_BITS, DC_CHR_VALS), (0x11, AC_CHR_BITS, AC_CHR_VALS)]
    for tc_th, bits, vals in hufftabs:
        out += b"\xff\xc4" + struct.pack(">HB", 19 + len(vals), tc_th)
        out += bytes(bits) + bytes(vals)
    # SOS
    out += b"\xff\xda" + struct.pack(">HB", 6 + 2 * ncomp, ncomp)
    for ci in range(ncomp):
        out += struct.pack("BB", ci + 1, (dc_slots[ci] << 4) | ac_slots[ci])
    out += b"\x00\x3f\x00"
    out += bytes(buf[:nbytes])
    out += b"\xff\xd9"  # EOI
    return bytes(out)


def _h2v1_fancy(plane):
    p = plane.astype(np.int64)
    left = np.concatenate([p[:, :1], p[:, :-1]], axis=1)
    right = np.concatenate([p[:, 1:], p[:, -1:]], axis=1)
    out = np.empty((p.shape[0], p.shape[1] * 2), dtype=np.int64)
    out[:, 0::2] = (3 * p + left + 1) >> 2
    out[:, 1::2] = (3 * p + right + 2) >> 2
    return out.astype(np.uint8)


def _h2v2_fancy(plane):
    p = plane.astype(np.int64)
    up = np.concatenate([p[:1], p[:-1]], axis=0)
    down = np.concatenate([p[1:], p[-1:]], axis=0)
    cs = np.empty((p.shape[0] * 2, p.shape[1]), dtype=np.int64)
    cs[0::2] = 3 * p + up
    cs[1::2] = 3 * p + down
    left = np.concatenate([cs[:, :1], cs[:, :-1]], axis=1)
    right = np.concatenate([cs[:, 1:], cs[:, -1:]], axis=1)
    out = np.empty((cs.shape[0], cs.shape[1] * 2), dtype=np.int64)
    out[:, 0::2] = (3 * cs + left + 8) >> 4
    out[:, 1::2] = (3 * cs + right + 7) >> 4
    return out.astype(np.uint8)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def u8(self):
        if self.pos >= len(self.data):
            raise MalformedStream("unexpected end of stream")
        v = self.data[self.pos]
        self.pos += 1
        return v

    def u16(self):
        return (self.u8() << 8) | self.u8()

    def take(self, n):
        if self.pos + n > len(self.data):
            raise MalformedStream("unexpected end of stream")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def jpeg_decode(data: bytes) -> ImageF:
    """Decode a baseline JFIF stream; samples land on the k/255 lattice."""
    r = _Reader(data)
    if r.u16() != 0xFFD8:
        raise MalformedStream("missing SOI marker")

    qtables = {}
    dc_tabs = {}
    ac_tabs = {}
    restart_interval = 0
    frame = None

    while True:
        marker = r.u8()
        if marker != 0xFF:
            raise MalformedStream(f"expected marker, got byte {marker:#x}")
        code = r.u8()
        while code == 0xFF:  # fill bytes
            code = r.u8()
        if code == 0xD8:
            raise MalformedStream("nested SOI")
        if code == 0xD9:
            raise MalformedStream("EOI before scan data")
        if code in (0x01,) or 0xD0 <= code <= 0xD7:
            continue  # standalone markers
        seglen = r.u16()
        if seglen < 2:
            raise MalformedStream("segment length underflow")
        seg = r.take(seglen - 2)

        if code == 0xDB:  # DQT
            s = _Reader(seg)
            while s.pos < len(seg):
                pq_tq = s.u8()
                if pq_tq >> 4 != 0:
                    raise UnsupportedJpegFeature("16-bit quantization tables")
                table = np.zeros(64, dtype=np.int64)
                raw = s.take(64)
                table[ZIGZAG] = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
                qtables[pq_tq & 15] = table
        elif code == 0xC4:  # DHT
            s = _Reader(seg)
            while s.pos < len(seg):
                tc_th = s.u8()
                bits = list(s.take(16))
                vals = list(s.take(sum(bits)))
                tab = _build_decode_table(bits, vals)
                if tc_th >> 4 == 0:
                    dc_tabs[tc_th & 15] = tab
                else:
                    ac_tabs[tc_th & 15] = tab
        elif code == 0xDD:  # DRI
            restart_interval = (seg[0] << 8) | seg[1]
        elif code in (0xC0, 0xC1):  # baseline / extended sequential
            s = _Reader(seg)
            prec = s.u8()
            if prec != 8:
                raise UnsupportedJpegFeature(f"{prec}-bit samples")
            height, width = s.u16(), s.u16()
            if height == 0 or width == 0:
                raise MalformedStream("zero frame dimension (DNL unsupported)")
            ncomp = s.u8()
            if ncomp not in (1, 3):
                raise UnsupportedJpegFeature(f"{ncomp}-component images")
            comps = []
            for _ in range(ncomp):
                cid = s.u8()
                hv = s.u8()
                tq = s.u8()
                comps.append({"id": cid, "h": hv >> 4, "v": hv & 15, "tq": tq})
            frame = {"w": width, "h": height, "comps": comps}
        elif code == 0xC2:
            raise UnsupportedJpegFeature("progressive JPEG")
        elif code in (0xC3, 0xC5, 0xC6, 0xC7, 0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF):
            raise UnsupportedJpegFeature(f"SOF{code - 0xC0} coding process")
        elif code == 0xDA:  # SOS
            if frame is None:
                raise MalformedStream("SOS before SOF")
            s = _Reader(seg)
            ns = s.u8()
            if ns != len(frame["comps"]):
                raise UnsupportedJpegFeature("multi-scan sequential JPEG")
            scan_comps = []
            by_id = {c["id"]: c for c in frame["comps"]}
            for _ in range(ns):
                cs = s.u8()
                td_ta = s.u8()
                if cs not in by_id:
                    raise MalformedStream(f"scan references unknown component {cs}")
                scan_comps.append((by_id[cs], td_ta >> 4, td_ta & 15))
            return _decode_scan_payload(data[r.pos:], frame, scan_comps,
                                        qtables, dc_tabs, ac_tabs,
                                        restart_interval)
        # all other segments (APPn, COM) are skipped


def _decode_scan_payload(payload, frame, scan_comps, qtables, dc_tabs, ac_tabs,
                         restart_interval):
    w, h = frame["w"], frame["h"]
    comps = [sc[0] for sc in scan_comps]
    if len(comps) == 1:
        # non-interleaved scan: one data unit per MCU, plain 8x8 tiling
        comps = [dict(comps[0], h=1, v=1)]
    hmax = max(c["h"] for c in comps)
    vmax = max(c["v"] for c in comps)
    if hmax not in (1, 2) or vmax not in (1, 2):
        raise UnsupportedJpegFeature(f"sampling factors {hmax}x{vmax}")
    for c in comps:
        if c["h"] not in (1, 2) or c["v"] not in (1, 2):
            raise UnsupportedJpegFeature("sampling factor outside {1,2}")
        if hmax % c["h"] or vmax % c["v"]:
            raise UnsupportedJpegFeature("non-integer sampling ratio")
        if c["tq"] not in qtables:
            raise MalformedStream(f"missing quantization table {c['tq']}")

    mcus_x = -(-w // (8 * hmax))
    mcus_y = -(-h // (8 * vmax))
    samp = tuple((c["h"], c["v"]) for c in comps)
    blocks_wide = tuple(mcus_x * c["h"] for c in comps)

    # decode tables stacked by slot
    def stack(tabs):
        maxcode = np.full((4, 17), -1, dtype=np.int64)
        valoff = np.zeros((4, 17), dtype=np.int64)
        huffval = np.zeros((4, 256), dtype=np.int32)
        for slot, (mc, vo, hv) in tabs.items():
            if 0 <= slot < 4:
                maxcode[slot], valoff[slot], huffval[slot] = mc, vo, hv
        return maxcode, valoff, huffval

    dc_maxcode, dc_valoff, dc_huffval = stack(dc_tabs)
    ac_maxcode, ac_valoff, ac_huffval = stack(ac_tabs)
    for _, td, ta in scan_comps:
        if td not in dc_tabs or ta not in ac_tabs:
            raise MalformedStream("scan references undefined Huffman table")

    dc_slots = tuple(sc[1] for sc in scan_comps)
    ac_slots = tuple(sc[2] for sc in scan_comps)
    order, dc_sel, ac_sel, pred_sel = _scan_layout(
        samp, mcus_x, mcus_y, blocks_wide, dc_slots, ac_slots)

    total = order.shape[0]
    scan_zz = np.zeros((total, 64), dtype=np.int32)
    data_arr = np.frombuffer(payload, dtype=np.uint8)
    blocks_per_mcu = sum(hq * vq for hq, vq in samp)
    status = kernels.decode_scan(data_arr, scan_zz, dc_sel, ac_sel, pred_sel,
                                 dc_maxcode, dc_valoff, dc_huffval,
                                 ac_maxcode, ac_valoff, ac_huffval,
                                 blocks_per_mcu, restart_interval)
    if status == kernels.SCAN_TRUNCATED:
        raise MalformedStream("truncated entropy-coded data")
    if status != kernels.SCAN_OK:
        raise MalformedStream("corrupt entropy-coded data")

    nat = np.empty_like(scan_zz)
    nat[order] = scan_zz  # back to per-component block order, still zigzag
    natural = np.empty_like(nat)
    natural[:, ZIGZAG] = nat

    planes = []
    offset = 0
    for ci, c in enumerate(comps):
        bw = blocks_wide[ci]
        bh = mcus_y * c["v"]
        nblk = bh * bw
        deq = natural[offset:offset + nblk].astype(np.int64) * qtables[c["tq"]][None, :]
        samples = kernels.idct8x8_islow(deq)
        plane = _blocks_to_plane(samples, bh, bw)
        cw = -(-w * c["h"] // hmax)
        ch = -(-h * c["v"] // vmax)
        plane = plane[:ch, :cw]
        rx, ry = hmax // c["h"], vmax // c["v"]
        if rx == 2 and ry == 2:
            plane = _h2v2_fancy(plane)
        elif rx == 2:
            plane = _h2v1_fancy(plane)
        elif ry == 2:
            plane = np.repeat(plane, 2, axis=0)
        planes.append(plane[:h, :w])
        offset += nblk

    if len(planes) == 1:
        rgb = planes[0][None, :, :].astype(np.float64)
    else:
        y = planes[0].astype(np.int64)
        cb = planes[1].astype(np.int64)
        cr = planes[2].astype(np.int64)
        red = np.clip(y + _CR_R[cr], 0, 255)
        green = np.clip(y + ((_CB_G[cb] + _CR_G[cr]) >> 16), 0, 255)
        blue = np.clip(y + _CB_B[cb], 0, 255)
        rgb = np.stack([red, green, blue]).astype(np.float64)
    return ImageF(rgb / 255.0)


def jpeg_roundtrip(img: ImageF, q: int, subsampling: str = "4:2:0") -> ImageF:
    """Encode-then-decode convenience used by transform chains."""
    return jpeg_decode(jpeg_encode(img, q, subsampling))


def format_quant_tables(qt: QuantTables) -> str:
    lines = ["luminance:"]
    for row in qt.luminance:
        lines.append("  " + " ".join(f"{v:3d}" for v in row))
    lines.append("chrominance:")
    for row in qt.chrominance:
        lines.append("  " + " ".join(f"{v:3d}" for v in row))
    return "\n".join(lines)
