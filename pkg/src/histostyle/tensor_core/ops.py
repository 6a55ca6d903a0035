"""Dense-tensor ops for a fixed convolutional network.

Tensors are C-contiguous float32 ndarrays laid out (channels, height, width);
there is no batch axis.  Only the input-gradient backward passes exist —
weights are frozen, so weight gradients are never needed.

Convolution goes through an im2col/GEMM path (spelled out in the kernel
backends); the naive direct form lives only in the test suite as an oracle.
"""

from dataclasses import dataclass

import numpy as np

from . import backend


def as_tensor(x) -> np.ndarray:
    """Coerce to the canonical float32 C-contiguous rank-3 layout."""
    t = np.ascontiguousarray(x, dtype=np.float32)
    if t.ndim != 3:
        raise ValueError(f"expected rank-3 (C, H, W) tensor, got shape {t.shape}")
    return t


@dataclass(frozen=True)
class GramMatrix:
    """Channel inner-product matrix of a feature map over spatial positions.

    ``values`` is exactly symmetric (computed once, mirrored).  ``m_spatial``
    keeps the source H*W so magnitudes can be normalized later.
    """

    n_channels: int
    values: np.ndarray
    m_spatial: int


@dataclass(frozen=True)
class PoolRouting:
    """Backward-routing record produced by ``pool2d_forward``."""

    mode: str
    input_shape: tuple[int, int, int]
    padded_shape: tuple[int, int, int]
    argmax: np.ndarray | None  # flat (h*Wp + w) winners, max mode only


def _check_conv_args(weights: np.ndarray, bias: np.ndarray, in_channels: int) -> None:
    if weights.ndim != 4:
        raise ValueError(f"weights must be rank-4 (out, in, kh, kw), got shape {weights.shape}")
    if weights.shape[1] != in_channels:
        raise ValueError(
            f"weight in-channels {weights.shape[1]} do not match input channels {in_channels}"
        )
    if bias.shape != (weights.shape[0],):
        raise ValueError(f"bias shape {bias.shape} does not match out-channels {weights.shape[0]}")


def conv2d_forward(
    input: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray,
    stride: int = 1,
    padding: int = 1,
) -> np.ndarray:
    """Zero-padded cross-correlation; output (out, (H+2p-kh)//s+1, (W+2p-kw)//s+1)."""
    x = as_tensor(input)
    w = np.ascontiguousarray(weights, dtype=np.float32)
    b = np.ascontiguousarray(bias, dtype=np.float32)
    _check_conv_args(w, b, x.shape[0])
    c_out, c_in, kh, kw = w.shape
    padded = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    hp, wp = padded.shape[1], padded.shape[2]
    if hp < kh or wp < kw:
        raise ValueError(f"padded input {(hp, wp)} smaller than kernel {(kh, kw)}")
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    cols = backend.kernels.im2col(padded, kh, kw, stride)
    out = w.reshape(c_out, c_in * kh * kw) @ cols
    out += b[:, None]
    return out.reshape(c_out, ho, wo)


def conv2d_backward_input(
    grad_output: np.ndarray,
    weights: np.ndarray,
    input_shape: tuple[int, int, int],
    stride: int = 1,
    padding: int = 1,
) -> np.ndarray:
    """Gradient of a conv2d_forward scalar loss w.r.t. the conv input."""
    g = as_tensor(grad_output)
    w = np.ascontiguousarray(weights, dtype=np.float32)
    c_out, c_in, kh, kw = w.shape
    c, h, wth = input_shape
    if c != c_in:
        raise ValueError(f"input_shape channels {c} do not match weight in-channels {c_in}")
    hp, wp = h + 2 * padding, wth + 2 * padding
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    if g.shape != (c_out, ho, wo):
        raise ValueError(f"grad_output shape {g.shape} does not match expected {(c_out, ho, wo)}")
    cols_grad = w.reshape(c_out, c_in * kh * kw).T @ g.reshape(c_out, ho * wo)
    padded = backend.kernels.col2im(np.ascontiguousarray(cols_grad), c_in, hp, wp, kh, kw, stride)
    if padding:
        return np.ascontiguousarray(padded[:, padding:padding + h, padding:padding + wth])
    return padded


def relu_forward(input: np.ndarray) -> np.ndarray:
    return np.maximum(as_tensor(input), np.float32(0.0))


def relu_backward(grad_output: np.ndarray, input: np.ndarray) -> np.ndarray:
    """Pass gradient where input > 0; the subgradient at exactly 0 is 0."""
    g = as_tensor(grad_output)
    x = as_tensor(input)
    if g.shape != x.shape:
        raise ValueError(f"grad shape {g.shape} does not match input shape {x.shape}")
    return np.where(x > 0, g, np.float32(0.0))


def _replicate_pad_even(x: np.ndarray) -> np.ndarray:
    pad_h = x.shape[1] % 2
    pad_w = x.shape[2] % 2
    if pad_h or pad_w:
        x = np.ascontiguousarray(np.pad(x, ((0, 0), (0, pad_h), (0, pad_w)), mode="edge"))
    return x


def pool2d_forward(input: np.ndarray, mode: str = "max") -> tuple[np.ndarray, PoolRouting]:
    """2x2 stride-2 pooling; odd edges are replicated before pooling."""
    x = as_tensor(input)
    padded = _replicate_pad_even(x)
    if mode == "max":
        out, argmax = backend.kernels.maxpool2x2(padded)
    elif mode == "average":
        c, h, w = padded.shape
        out = padded.reshape(c, h // 2, 2, w // 2, 2).mean(axis=(2, 4), dtype=np.float32)
        argmax = None
    else:
        raise ValueError(f"unknown pooling mode {mode!r}")
    routing = PoolRouting(mode=mode, input_shape=x.shape, padded_shape=padded.shape, argmax=argmax)
    return out, routing


def pool2d_backward(grad_output: np.ndarray, routing: PoolRouting) -> np.ndarray:
    g = as_tensor(grad_output)
    c, hp, wp = routing.padded_shape
    if g.shape != (c, hp // 2, wp // 2):
        raise ValueError(f"grad shape {g.shape} does not match pooled shape {(c, hp // 2, wp // 2)}")
    if routing.mode == "max":
        padded = backend.kernels.maxpool2x2_backward(g, routing.argmax, hp, wp)
    else:
        quarter = (g * np.float32(0.25))[:, :, None, :, None]
        padded = np.ascontiguousarray(
            np.broadcast_to(quarter, (c, hp // 2, 2, wp // 2, 2)).reshape(c, hp, wp)
        )
    _, h, w = routing.input_shape
    if hp != h:
        padded[:, h - 1, :] += padded[:, h, :]
        padded = padded[:, :h, :]
    if wp != w:
        padded[:, :, w - 1] += padded[:, :, w]
        padded = padded[:, :, :w]
    return np.ascontiguousarray(padded)


def gram_matrix(feature_map: np.ndarray) -> GramMatrix:
    """G[i, j] = sum_k F[i, k] * F[j, k] over the flattened spatial index."""
    f = as_tensor(feature_map)
    n, h, w = f.shape
    flat = f.reshape(n, h * w)
    g = flat @ flat.T
    # Mirror the lower triangle so symmetry holds bit-for-bit.
    g = np.tril(g) + np.tril(g, -1).T
    return GramMatrix(n_channels=n, values=np.ascontiguousarray(g), m_spatial=h * w)


def gram_backward(feature_map: np.ndarray, grad_gram: np.ndarray) -> np.ndarray:
    """Gradient of sum_ij grad_gram[i, j] * G[i, j] w.r.t. the feature map."""
    f = as_tensor(feature_map)
    d = np.ascontiguousarray(grad_gram, dtype=np.float32)
    n, h, w = f.shape
    if d.shape != (n, n):
        raise ValueError(f"grad_gram shape {d.shape} does not match {n} channels")
    if not np.array_equal(d, d.T):
        raise ValueError("grad_gram must be symmetric")
    out = (2.0 * d) @ f.reshape(n, h * w)
    return np.ascontiguousarray(out.astype(np.float32).reshape(n, h, w))
