"""Truncated VGG-19 feature extractor with named taps.

The graph is the standard VGG-19 convolutional prefix through relu5_1:
two 64-channel convs, two 128, four 256, four 512, then conv5_1, with a
2x2 pool between blocks and a ReLU after every conv.  Deeper layers are
never materialized.  Weights come from a small binary container (see
``load_weights``); channel order is RGB throughout — the converter that
produced the file is responsible for any reordering.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np

from .errors import FormatError, IncompatibleWeightsError
from .tensor_core import (
    PoolRouting,
    as_tensor,
    conv2d_backward_input,
    conv2d_forward,
    pool2d_backward,
    pool2d_forward,
    relu_backward,
    relu_forward,
)

_CONVS_PER_BLOCK = (2, 2, 4, 4, 1)
DEFAULT_BLOCK_CHANNELS = (64, 128, 256, 512, 512)
TAP_NAMES = ("relu1_1", "relu2_1", "relu3_1", "relu4_1", "relu5_1", "conv4_2")

_MAGIC = b"VGGW"
_VERSION = 1

# Inputs are assumed in [0, 255]; downsizing below 16 pixels would collapse
# the pool4 output entirely, so that is the floor we enforce.
MIN_INPUT_SIZE = 16


@dataclass(frozen=True)
class LayerSpec:
    """One node of the fixed graph: a conv, relu, or pool layer."""

    name: str
    kind: str  # "conv" | "relu" | "pool"
    channels_out: Optional[int] = None


def vgg_prefix_spec(
    block_channels: Tuple[int, ...] = DEFAULT_BLOCK_CHANNELS,
) -> Tuple[LayerSpec, ...]:
    """Layer list for the truncated graph.

    ``block_channels`` overrides the per-block conv widths, which keeps
    the same topology usable with tiny randomly-initialized networks.
    """
    if len(block_channels) != 5:
        raise ValueError("block_channels must have five entries")
    layers = []
    for block, (n_convs, ch) in enumerate(zip(_CONVS_PER_BLOCK, block_channels), 1):
        for i in range(1, n_convs + 1):
            layers.append(LayerSpec(f"conv{block}_{i}", "conv", int(ch)))
            layers.append(LayerSpec(f"relu{block}_{i}", "relu"))
        if block < 5:
            layers.append(LayerSpec(f"pool{block}", "pool"))
    return tuple(layers)


def conv_input_channels(spec: Tuple[LayerSpec, ...]) -> Dict[str, int]:
    """Map each conv layer name to its expected input channel count."""
    channels = {}
    previous = 3
    for layer in spec:
        if layer.kind == "conv":
            channels[layer.name] = previous
            previous = layer.channels_out
    return channels


@dataclass(frozen=True)
class NetworkWeights:
    """Immutable conv kernels and biases, keyed by layer name.

    ``checksum`` records the CRC32 of the source container (or of the
    raw arrays for weights assembled in memory) so every stylization run
    can state exactly which weights produced it.
    """

    spec: Tuple[LayerSpec, ...]
    kernels: Mapping[str, np.ndarray]
    biases: Mapping[str, np.ndarray]
    checksum: str

    @classmethod
    def from_arrays(
        cls,
        spec: Tuple[LayerSpec, ...],
        kernels: Mapping[str, np.ndarray],
        biases: Mapping[str, np.ndarray],
    ) -> "NetworkWeights":
        kernels = {k: np.ascontiguousarray(v, dtype=np.float32) for k, v in kernels.items()}
        biases = {k: np.ascontiguousarray(v, dtype=np.float32) for k, v in biases.items()}
        crc = 0
        for name in sorted(kernels):
            crc = zlib.crc32(kernels[name].tobytes(), crc)
            crc = zlib.crc32(biases[name].tobytes(), crc)
        weights = cls(spec, kernels, biases, f"{crc:08x}")
        _validate_weights(weights)
        return weights


def _validate_weights(weights: NetworkWeights) -> None:
    expected_in = conv_input_channels(weights.spec)
    conv_names = set(expected_in)
    for extra in sorted(set(weights.kernels) - conv_names):
        raise IncompatibleWeightsError(extra, "not a conv layer of this network")
    for layer in weights.spec:
        if layer.kind != "conv":
            continue
        name = layer.name
        if name not in weights.kernels or name not in weights.biases:
            raise IncompatibleWeightsError(name, "missing weight entry")
        kernel = weights.kernels[name]
        bias = weights.biases[name]
        want = (layer.channels_out, expected_in[name], 3, 3)
        if kernel.shape != want:
            raise IncompatibleWeightsError(
                name, f"kernel shape {kernel.shape} does not match expected {want}"
            )
        if bias.shape != (layer.channels_out,):
            raise IncompatibleWeightsError(
                name, f"bias shape {bias.shape} does not match ({layer.channels_out},)"
            )
        if not (np.all(np.isfinite(kernel)) and np.all(np.isfinite(bias))):
            raise IncompatibleWeightsError(name, "non-finite values")


class _Reader:
    """Cursor over the weight container bytes; short reads raise EOFError."""

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n: int) -> bytes:
        end = self.offset + n
        if end > len(self.data):
            raise EOFError(
                f"weight file truncated: wanted byte {end}, file has {len(self.data)}"
            )
        chunk = self.data[self.offset : end]
        self.offset = end
        return chunk

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f32_array(self, count: int) -> np.ndarray:
        raw = self.take(count * 4)
        return np.frombuffer(raw, dtype="<f4").astype(np.float32)


def load_weights(
    path, expected_spec: Optional[Tuple[LayerSpec, ...]] = None
) -> NetworkWeights:
    """Parse and validate a VGGW weight container.

    Raises FormatError for bad magic/version/checksum, EOFError for a
    truncated file, and IncompatibleWeightsError (naming the layer) when
    a shape disagrees with the expected architecture.
    """
    spec = expected_spec if expected_spec is not None else vgg_prefix_spec()
    data = Path(path).read_bytes()
    reader = _Reader(data)

    magic = reader.take(4)
    if magic != _MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {_MAGIC!r}")
    version = reader.u32()
    if version != _VERSION:
        raise FormatError(f"unsupported weight file version {version}")

    layer_count = reader.u32()
    kernels: Dict[str, np.ndarray] = {}
    biases: Dict[str, np.ndarray] = {}
    for _ in range(layer_count):
        name = reader.take(reader.u16()).decode("utf-8")
        if name in kernels:
            raise FormatError(f"duplicate layer entry {name}")
        out_c, in_c, kh, kw = (reader.u32() for _ in range(4))
        kernels[name] = reader.f32_array(out_c * in_c * kh * kw).reshape(
            out_c, in_c, kh, kw
        )
        biases[name] = reader.f32_array(out_c)

    stored_crc = reader.u32()
    if reader.offset != len(data):
        raise FormatError(f"{len(data) - reader.offset} trailing bytes after checksum")
    actual_crc = zlib.crc32(data[:-4])
    if stored_crc != actual_crc:
        raise FormatError(
            f"checksum mismatch: file says {stored_crc:08x}, content is {actual_crc:08x}"
        )

    weights = NetworkWeights(spec, kernels, biases, f"{actual_crc:08x}")
    _validate_weights(weights)
    return weights


@dataclass(frozen=True)
class PreprocessConfig:
    """Channel means subtracted from [0, 255] RGB input before the network."""

    channel_means: Tuple[float, float, float] = (123.68, 116.779, 103.939)

    def __post_init__(self):
        for m in self.channel_means:
            if not 0.0 <= m <= 255.0:
                raise ValueError(f"channel mean {m} outside [0, 255]")


def preprocess(image: np.ndarray, config: PreprocessConfig = PreprocessConfig()) -> np.ndarray:
    """(H, W, 3) u8 image -> (3, H, W) float32 tensor, means subtracted."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {image.shape}")
    chw = image.astype(np.float32).transpose(2, 0, 1)
    means = np.asarray(config.channel_means, dtype=np.float32).reshape(3, 1, 1)
    return np.ascontiguousarray(chw - means)


def deprocess(tensor: np.ndarray, config: PreprocessConfig = PreprocessConfig()) -> np.ndarray:
    """Inverse of preprocess up to clamping: (3, H, W) float -> (H, W, 3) u8."""
    tensor = as_tensor(tensor)
    means = np.asarray(config.channel_means, dtype=np.float32).reshape(3, 1, 1)
    restored = np.rint(tensor + means)
    return np.clip(restored, 0, 255).astype(np.uint8).transpose(1, 2, 0)


@dataclass
class ForwardCache:
    """Intermediates for one forward pass, the minimum backward needs.

    Only pre-activation conv outputs and pooling routings are kept; relu
    outputs and padded buffers are recomputed or never needed.
    """

    weights: NetworkWeights
    pooling: str
    taps: Tuple[str, ...]
    input_shape: Tuple[int, int, int]
    layers: Tuple[LayerSpec, ...] = ()
    output_shapes: Tuple[Tuple[int, int, int], ...] = ()
    conv_pre: Dict[str, np.ndarray] = field(default_factory=dict)
    routings: Dict[str, PoolRouting] = field(default_factory=dict)
    tap_shapes: Dict[str, Tuple[int, int, int]] = field(default_factory=dict)


def forward_with_taps(
    input: np.ndarray,
    taps: Iterable[str],
    weights: NetworkWeights,
    pooling: str = "max",
) -> Tuple[Dict[str, np.ndarray], ForwardCache]:
    """Run the graph far enough to produce every requested tap.

    Returns the tap tensors plus the cache ``backward_from_taps`` needs.
    The tap arrays share storage with the cache, so treat them as
    read-only.  Execution stops at the deepest requested tap; an empty
    tap set runs nothing.
    """
    x = as_tensor(input)
    if x.shape[0] != 3:
        raise ValueError(f"network input must have 3 channels, got {x.shape[0]}")
    if min(x.shape[1], x.shape[2]) < MIN_INPUT_SIZE:
        raise ValueError(
            f"input spatial size {x.shape[1]}x{x.shape[2]} below minimum "
            f"{MIN_INPUT_SIZE}; pool4 output would be empty"
        )
    spec = weights.spec
    names = [layer.name for layer in spec]
    tap_set = set(taps)
    for tap in tap_set:
        if tap not in names:
            raise ValueError(f"unknown tap name {tap!r}")

    cache = ForwardCache(
        weights=weights, pooling=pooling, taps=tuple(sorted(tap_set)), input_shape=x.shape
    )
    if not tap_set:
        return {}, cache

    depth = max(names.index(tap) for tap in tap_set)
    tap_out: Dict[str, np.ndarray] = {}
    shapes = []
    current = x
    for layer in spec[: depth + 1]:
        if layer.kind == "conv":
            current = conv2d_forward(
                current, weights.kernels[layer.name], weights.biases[layer.name]
            )
            cache.conv_pre[layer.name] = current
        elif layer.kind == "relu":
            current = relu_forward(current)
        else:
            current, routing = pool2d_forward(current, pooling)
            cache.routings[layer.name] = routing
        shapes.append(current.shape)
        if layer.name in tap_set:
            tap_out[layer.name] = current

    cache.layers = spec[: depth + 1]
    cache.output_shapes = tuple(shapes)
    cache.tap_shapes = {name: tap_out[name].shape for name in tap_out}
    return tap_out, cache


def backward_from_taps(
    tap_gradients: Mapping[str, np.ndarray], cache: ForwardCache
) -> np.ndarray:
    """Accumulate d(loss)/d(input) from gradients injected at the taps.

    Every key must have been requested in the forward pass that built
    ``cache``; the result is additive over taps.
    """
    for name, grad in tap_gradients.items():
        if name not in cache.taps:
            raise ValueError(
                f"tap {name!r} was not requested in the forward pass (have {cache.taps})"
            )
        if tuple(grad.shape) != cache.tap_shapes[name]:
            raise ValueError(
                f"gradient for tap {name!r} has shape {tuple(grad.shape)}, "
                f"expected {cache.tap_shapes[name]}"
            )

    if not cache.layers:
        return np.zeros(cache.input_shape, dtype=np.float32)

    grad = np.zeros(cache.output_shapes[-1], dtype=np.float32)
    for i in range(len(cache.layers) - 1, -1, -1):
        layer = cache.layers[i]
        if layer.name in tap_gradients:
            grad = grad + np.asarray(tap_gradients[layer.name], dtype=np.float32)
        below = cache.output_shapes[i - 1] if i > 0 else cache.input_shape
        if layer.kind == "conv":
            grad = conv2d_backward_input(grad, cache.weights.kernels[layer.name], below)
        elif layer.kind == "relu":
            # A relu's input is always the conv directly beneath it.
            grad = relu_backward(grad, cache.conv_pre[cache.layers[i - 1].name])
        else:
            grad = pool2d_backward(grad, cache.routings[layer.name])
    return grad
