"""Baseline entropy-coded scan codec (Huffman + bit packing).

Both functions are written in the numba-compatible subset (plain loops,
flat numpy arrays, no Python objects) so the numba backend can compile
this exact source and the numpy backend can run it as-is.  The work is
inherently serial bit twiddling, which is why it lives behind the kernel
dispatch instead of being vectorized.

Scalars are routed through int(): numba types them as int64, while under
CPython they become native ints, which keeps the interpreter path fast
and avoids numpy scalar promotion surprises (uint8/int32 wraparound).
"""

import numpy as np

# decode_scan status codes
SCAN_OK = 0
SCAN_TRUNCATED = 1
SCAN_BAD_CODE = 2
SCAN_BAD_MARKER = 3


def encode_scan(blocks_zz, dc_sel, ac_sel, pred_sel,
                dc_code, dc_size, ac_code, ac_size):
    """Entropy-encode quantized blocks (zigzag order) into a stuffed byte stream.

    blocks_zz : (n, 64) int32, scan order
    dc_sel/ac_sel : (n,) uint8 Huffman table slot per block
    pred_sel : (n,) uint8 DC predictor slot per block
    dc_code/dc_size : (slots, 16) int32 code and bit length per DC category
    ac_code/ac_size : (slots, 256) int32 per run/size symbol

    Returns (buf, nbytes); buf is oversized, the caller trims to nbytes.
    """
    n = blocks_zz.shape[0]
    buf = np.empty(n * 448 + 64, dtype=np.uint8)
    preds = np.zeros(4, dtype=np.int64)
    pos = 0
    acc = 0
    nbits = 0
    for b in range(n):
        blk = blocks_zz[b]
        dct = dc_sel[b]
        act = ac_sel[b]
        prd = pred_sel[b]

        # DC: category + magnitude bits of the prediction difference
        dc = int(blk[0])
        diff = dc - int(preds[prd])
        preds[prd] = dc
        mag = diff if diff >= 0 else -diff
        ssss = 0
        while mag != 0:
            mag >>= 1
            ssss += 1
        acc = (acc << int(dc_size[dct, ssss])) | int(dc_code[dct, ssss])
        nbits += int(dc_size[dct, ssss])
        if ssss > 0:
            v = diff if diff >= 0 else diff + (1 << ssss) - 1
            acc = (acc << ssss) | v
            nbits += ssss
        while nbits >= 8:
            nbits -= 8
            byte = (acc >> nbits) & 0xFF
            buf[pos] = byte
            pos += 1
            if byte == 0xFF:
                buf[pos] = 0
                pos += 1
        acc &= (1 << nbits) - 1

        # AC: run-length of zeros + category, ZRL for runs of 16
        run = 0
        for k in range(1, 64):
            v = int(blk[k])
            if v == 0:
                run += 1
                continue
            while run > 15:
                acc = (acc << int(ac_size[act, 0xF0])) | int(ac_code[act, 0xF0])
                nbits += int(ac_size[act, 0xF0])
                run -= 16
                while nbits >= 8:
                    nbits -= 8
                    byte = (acc >> nbits) & 0xFF
                    buf[pos] = byte
                    pos += 1
                    if byte == 0xFF:
                        buf[pos] = 0
                        pos += 1
                acc &= (1 << nbits) - 1
            mag = v if v >= 0 else -v
            ssss = 0
            while mag != 0:
                mag >>= 1
                ssss += 1
            sym = run * 16 + ssss
            acc = (acc << int(ac_size[act, sym])) | int(ac_code[act, sym])
            nbits += int(ac_size[act, sym])
            vv = v if v >= 0 else v + (1 << ssss) - 1
            acc = (acc << ssss) | vv
            nbits += ssss
            run = 0
            while nbits >= 8:
                nbits -= 8
                byte = (acc >> nbits) & 0xFF
                buf[pos] = byte
                pos += 1
                if byte == 0xFF:
                    buf[pos] = 0
                    pos += 1
            acc &= (1 << nbits) - 1
        if run > 0:
            acc = (acc << int(ac_size[act, 0x00])) | int(ac_code[act, 0x00])
            nbits += int(ac_size[act, 0x00])
            while nbits >= 8:
                nbits -= 8
                byte = (acc >> nbits) & 0xFF
                buf[pos] = byte
                pos += 1
                if byte == 0xFF:
                    buf[pos] = 0
                    pos += 1
            acc &= (1 << nbits) - 1

    # flush, padding the final partial byte with 1s
    if nbits > 0:
        pad = 8 - nbits
        byte = ((acc << pad) | ((1 << pad) - 1)) & 0xFF
        buf[pos] = byte
        pos += 1
        if byte == 0xFF:
            buf[pos] = 0
            pos += 1
    return buf, pos


def decode_scan(data, blocks_zz, dc_sel, ac_sel, pred_sel,
                dc_maxcode, dc_valoff, dc_huffval,
                ac_maxcode, ac_valoff, ac_huffval,
                blocks_per_mcu, restart_interval):
    """Entropy-decode a stuffed scan byte stream into zigzag-order blocks.

    data : (m,) uint8, raw bytes from just after SOS to end of file
    blocks_zz : (n, 64) int32 output, caller-zeroed
    dc_maxcode/ac_maxcode : (slots, 17) int64, index = code length
    dc_valoff/ac_valoff : (slots, 17) int64, valptr[l] - mincode[l]
    dc_huffval/ac_huffval : (slots, 256) int32

    Returns a status code (SCAN_* above).
    """
    n = blocks_zz.shape[0]
    m = len(data)
    preds = np.zeros(4, dtype=np.int64)
    pos = 0
    acc = 0
    nbits = 0
    mcu = 0
    next_rst = 0
    for b in range(n):
        if restart_interval > 0 and b % blocks_per_mcu == 0:
            if mcu > 0 and mcu % restart_interval == 0:
                # byte-align, expect RSTn, reset DC predictors
                acc = 0
                nbits = 0
                if pos + 1 >= m:
                    return SCAN_TRUNCATED
                if int(data[pos]) != 0xFF or int(data[pos + 1]) != 0xD0 + next_rst:
                    return SCAN_BAD_MARKER
                pos += 2
                next_rst = (next_rst + 1) & 7
                for i in range(4):
                    preds[i] = 0
            mcu += 1

        blk = blocks_zz[b]
        dct = dc_sel[b]
        act = ac_sel[b]
        prd = pred_sel[b]

        # DC symbol
        code = 0
        length = 0
        while True:
            if nbits == 0:
                if pos >= m:
                    return SCAN_TRUNCATED
                byte = int(data[pos])
                pos += 1
                if byte == 0xFF:
                    if pos >= m:
                        return SCAN_TRUNCATED
                    if int(data[pos]) == 0x00:
                        pos += 1
                    else:
                        return SCAN_BAD_MARKER
                acc = byte
                nbits = 8
            nbits -= 1
            code = (code << 1) | ((acc >> nbits) & 1)
            length += 1
            if length > 16:
                return SCAN_BAD_CODE
            if code <= int(dc_maxcode[dct, length]):
                break
        ssss = int(dc_huffval[dct, code + int(dc_valoff[dct, length])])
        diff = 0
        if ssss > 0:
            v = 0
            for _ in range(ssss):
                if nbits == 0:
                    if pos >= m:
                        return SCAN_TRUNCATED
                    byte = int(data[pos])
                    pos += 1
                    if byte == 0xFF:
                        if pos >= m:
                            return SCAN_TRUNCATED
                        if int(data[pos]) == 0x00:
                            pos += 1
                        else:
                            return SCAN_BAD_MARKER
                    acc = byte
                    nbits = 8
                nbits -= 1
                v = (v << 1) | ((acc >> nbits) & 1)
            if v < (1 << (ssss - 1)):
                v += ((-1) << ssss) + 1
            diff = v
        preds[prd] += diff
        blk[0] = preds[prd]

        # AC symbols
        k = 1
        while k < 64:
            code = 0
            length = 0
            while True:
                if nbits == 0:
                    if pos >= m:
                        return SCAN_TRUNCATED
                    byte = int(data[pos])
                    pos += 1
                    if byte == 0xFF:
                        if pos >= m:
                            return SCAN_TRUNCATED
                        if int(data[pos]) == 0x00:
                            pos += 1
                        else:
                            return SCAN_BAD_MARKER
                    acc = byte
                    nbits = 8
                nbits -= 1
                code = (code << 1) | ((acc >> nbits) & 1)
                length += 1
                if length > 16:
                    return SCAN_BAD_CODE
                if code <= int(ac_maxcode[act, length]):
                    break
            rs = int(ac_huffval[act, code + int(ac_valoff[act, length])])
            r = rs >> 4
            s = rs & 15
            if s == 0:
                if r == 15:
                    k += 16
                    continue
                break  # EOB
            k += r
            if k > 63:
                return SCAN_BAD_CODE
            v = 0
            for _ in range(s):
                if nbits == 0:
                    if pos >= m:
                        return SCAN_TRUNCATED
                    byte = int(data[pos])
                    pos += 1
                    if byte == 0xFF:
                        if pos >= m:
                            return SCAN_TRUNCATED
                        if int(data[pos]) == 0x00:
                            pos += 1
                        else:
                            return SCAN_BAD_MARKER
                    acc = byte
                    nbits = 8
                nbits -= 1
                v = (v << 1) | ((acc >> nbits) & 1)
            if v < (1 << (s - 1)):
                v += ((-1) << s) + 1
            blk[k] = v
            k += 1
    return SCAN_OK
