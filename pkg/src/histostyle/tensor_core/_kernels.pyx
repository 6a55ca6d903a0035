# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled packing/pooling loops backing the convolution and pooling ops.

Kept signature-compatible with ``_kernels_np``; the GEMM itself stays in
NumPy/BLAS, these kernels only do the cache-unfriendly gather/scatter work.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def im2col(cnp.float32_t[:, :, ::1] padded, int kh, int kw, int stride):
    cdef int c = padded.shape[0]
    cdef int hp = padded.shape[1]
    cdef int wp = padded.shape[2]
    cdef int ho = (hp - kh) // stride + 1
    cdef int wo = (wp - kw) // stride + 1
    out_arr = np.empty((c * kh * kw, ho * wo), dtype=np.float32)
    cdef cnp.float32_t[:, ::1] out = out_arr
    cdef int ch, i, j, oy, ox, row
    with nogil:
        for ch in range(c):
            for i in range(kh):
                for j in range(kw):
                    row = (ch * kh + i) * kw + j
                    for oy in range(ho):
                        for ox in range(wo):
                            out[row, oy * wo + ox] = padded[ch, oy * stride + i, ox * stride + j]
    return out_arr


def col2im(cnp.float32_t[:, ::1] cols, int c, int hp, int wp, int kh, int kw, int stride):
    cdef int ho = (hp - kh) // stride + 1
    cdef int wo = (wp - kw) // stride + 1
    out_arr = np.zeros((c, hp, wp), dtype=np.float32)
    cdef cnp.float32_t[:, :, ::1] out = out_arr
    cdef int ch, i, j, oy, ox, row
    with nogil:
        for ch in range(c):
            for i in range(kh):
                for j in range(kw):
                    row = (ch * kh + i) * kw + j
                    for oy in range(ho):
                        for ox in range(wo):
                            out[ch, oy * stride + i, ox * stride + j] += cols[row, oy * wo + ox]
    return out_arr


def maxpool2x2(cnp.float32_t[:, :, ::1] x):
    cdef int c = x.shape[0]
    cdef int h = x.shape[1]
    cdef int w = x.shape[2]
    cdef int ho = h // 2
    cdef int wo = w // 2
    out_arr = np.empty((c, ho, wo), dtype=np.float32)
    idx_arr = np.empty((c, ho, wo), dtype=np.int64)
    cdef cnp.float32_t[:, :, ::1] out = out_arr
    cdef cnp.int64_t[:, :, ::1] idx = idx_arr
    cdef int ch, oy, ox, dy, dx
    cdef float best, v
    cdef long best_at
    with nogil:
        for ch in range(c):
            for oy in range(ho):
                for ox in range(wo):
                    best = x[ch, 2 * oy, 2 * ox]
                    best_at = (2 * oy) * w + 2 * ox
                    for dy in range(2):
                        for dx in range(2):
                            v = x[ch, 2 * oy + dy, 2 * ox + dx]
                            if v > best:
                                best = v
                                best_at = (2 * oy + dy) * w + 2 * ox + dx
                    out[ch, oy, ox] = best
                    idx[ch, oy, ox] = best_at
    return out_arr, idx_arr


def maxpool2x2_backward(cnp.float32_t[:, :, ::1] grad_out, cnp.int64_t[:, :, ::1] argmax, int h, int w):
    cdef int c = grad_out.shape[0]
    cdef int ho = grad_out.shape[1]
    cdef int wo = grad_out.shape[2]
    out_arr = np.zeros((c, h, w), dtype=np.float32)
    cdef cnp.float32_t[:, :, ::1] out = out_arr
    cdef int ch, oy, ox
    cdef long at
    with nogil:
        for ch in range(c):
            for oy in range(ho):
                for ox in range(wo):
                    at = argmax[ch, oy, ox]
                    out[ch, at // w, at % w] += grad_out[ch, oy, ox]
    return out_arr
