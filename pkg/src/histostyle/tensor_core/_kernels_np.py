"""Pure-NumPy implementations of the hot packing/pooling loops.

Same call signatures as the compiled ``_kernels`` extension; selected as a
fallback when the extension is unavailable (or forced via
``HISTOSTYLE_FORCE_NUMPY=1``).  All functions take and return C-contiguous
float32 arrays.
"""

import numpy as np


def im2col(padded: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    """Unfold (C, Hp, Wp) into a (C*kh*kw, Ho*Wo) patch matrix."""
    c, hp, wp = padded.shape
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    win = np.lib.stride_tricks.sliding_window_view(padded, (kh, kw), axis=(1, 2))
    win = win[:, ::stride, ::stride]  # (C, Ho, Wo, kh, kw)
    cols = win.transpose(0, 3, 4, 1, 2).reshape(c * kh * kw, ho * wo)
    return np.ascontiguousarray(cols, dtype=np.float32)


def col2im(cols: np.ndarray, c: int, hp: int, wp: int, kh: int, kw: int, stride: int) -> np.ndarray:
    """Scatter-add a patch matrix back onto a zeroed (C, Hp, Wp) canvas."""
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    out = np.zeros((c, hp, wp), dtype=np.float32)
    patches = cols.reshape(c, kh, kw, ho, wo)
    for i in range(kh):
        for j in range(kw):
            out[:, i:i + ho * stride:stride, j:j + wo * stride:stride] += patches[:, i, j]
    return out


def maxpool2x2(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """2x2 stride-2 max pool of an even-sized (C, H, W) array.

    Returns the pooled array and, per output cell, the flat (h*W + w) index
    of the winning input element (first occurrence on ties).
    """
    c, h, w = x.shape
    win = x.reshape(c, h // 2, 2, w // 2, 2).transpose(0, 1, 3, 2, 4).reshape(c, h // 2, w // 2, 4)
    local = win.argmax(axis=3)
    out = np.take_along_axis(win, local[..., None], axis=3)[..., 0]
    ii, jj = np.meshgrid(np.arange(h // 2), np.arange(w // 2), indexing="ij")
    rows = 2 * ii[None] + local // 2
    cols = 2 * jj[None] + local % 2
    flat = (rows * w + cols).astype(np.int64)
    return np.ascontiguousarray(out, dtype=np.float32), np.ascontiguousarray(flat)


def maxpool2x2_backward(grad_out: np.ndarray, argmax: np.ndarray, h: int, w: int) -> np.ndarray:
    """Route pooled gradients back to their argmax positions on a (C, H, W) canvas."""
    c = grad_out.shape[0]
    out = np.zeros((c, h * w), dtype=np.float32)
    # Windows are disjoint, so each flat index appears at most once per channel.
    np.put_along_axis(out, argmax.reshape(c, -1), grad_out.reshape(c, -1), axis=1)
    return out.reshape(c, h, w)
