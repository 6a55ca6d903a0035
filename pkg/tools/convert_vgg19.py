#!/usr/bin/env python3
"""Convert a pretrained VGG-19 release into the engine's binary weight format.

Reads a PyTorch ``state_dict`` checkpoint (the torchvision ImageNet release,
pinned below), extracts the 13 convolution layers through conv5_1, and writes
the container format that ``histostyle.vgg.load_weights`` consumes, printing
a layer table, the CRC32, and a conv4_2 spot check against a torch forward
pass.

Pinned source release (torchvision, RGB, 0-1 inputs normalized by mean/std):

    https://download.pytorch.org/models/vgg19-dcbb9e9d.pth

``dcbb9e9d`` is the leading 8 hex digits of the file's SHA-256; the script
refuses sources whose digest does not start with it unless --any-source is
given (use that for other releases, e.g. Caffe ones).

Input-space folding: the engine feeds conv1_1 with ``raw - channel_means``
(raw in 0..255).  torchvision's release expects ``(raw/255 - m) / s``.
Scaling the first-layer kernels by ``1/(255*s_c)`` and running the engine
with ``channel_means = 255*m = (123.675, 116.28, 103.53)`` makes the two
pipelines exactly equivalent, including at the zero-padded borders (an
engine pad value of 0 then means exactly raw = 255*m, which torch's padding
also assumes).  With the engine's default means the inputs differ by at most
0.5 gray levels per channel, which is negligible for stylization but is why
the spot check below uses the folded means.

Caffe-style releases (``--source-layout caffe-bgr``) are already in
0..255-minus-mean space, so no scale folding is applied; their first-layer
kernels are permuted from BGR to RGB input order so the engine stays
convention-free.

Usage:
    python3 tools/convert_vgg19.py vgg19-dcbb9e9d.pth vgg19_imagenet.weights
"""

import argparse
import binascii
import hashlib
import struct
import sys
from pathlib import Path

import numpy as np
import torch

from histostyle.vgg import (
    PreprocessConfig,
    forward_with_taps,
    load_weights,
    preprocess,
    vgg_prefix_spec,
)

SOURCE_URL = "https://download.pytorch.org/models/vgg19-dcbb9e9d.pth"
SOURCE_SHA256_PREFIX = "dcbb9e9d"

TORCHVISION_MEANS = (0.485, 0.456, 0.406)
TORCHVISION_STDS = (0.229, 0.224, 0.225)

# torchvision vgg19.features indices for the conv layers we keep.
FEATURE_INDEX = {
    "conv1_1": 0, "conv1_2": 2,
    "conv2_1": 5, "conv2_2": 7,
    "conv3_1": 10, "conv3_2": 12, "conv3_3": 14, "conv3_4": 16,
    "conv4_1": 19, "conv4_2": 21, "conv4_3": 23, "conv4_4": 25,
    "conv5_1": 28,
}

MAGIC = b"VGGW"
VERSION = 1


class ConversionError(Exception):
    pass


def sha256_hex(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def extract_conv_layers(state_dict) -> dict:
    """name -> (kernel (out,in,3,3) f32, bias (out,) f32), conv1_1..conv5_1."""
    layers = {}
    for name, index in FEATURE_INDEX.items():
        weight_key = f"features.{index}.weight"
        bias_key = f"features.{index}.bias"
        if weight_key not in state_dict or bias_key not in state_dict:
            raise ConversionError(f"source release is missing layer {name} ({weight_key})")
        kernel = state_dict[weight_key].detach().cpu().numpy().astype(np.float32)
        bias = state_dict[bias_key].detach().cpu().numpy().astype(np.float32)
        if kernel.ndim != 4 or kernel.shape[2:] != (3, 3):
            raise ConversionError(
                f"{name}: expected a 3x3 kernel, got shape {tuple(kernel.shape)}"
            )
        if bias.shape != (kernel.shape[0],):
            raise ConversionError(f"{name}: bias shape {bias.shape} does not match")
        layers[name] = (kernel, bias)
    return layers


def fold_torchvision_scale(layers: dict) -> dict:
    """Scale conv1_1 input channels so the engine can feed raw-minus-mean."""
    kernel, bias = layers["conv1_1"]
    scale = np.array(
        [1.0 / (255.0 * s) for s in TORCHVISION_STDS], np.float32
    ).reshape(1, 3, 1, 1)
    folded = dict(layers)
    folded["conv1_1"] = ((kernel * scale).astype(np.float32), bias)
    return folded


def permute_bgr_to_rgb(layers: dict) -> dict:
    kernel, bias = layers["conv1_1"]
    permuted = dict(layers)
    permuted["conv1_1"] = (np.ascontiguousarray(kernel[:, ::-1]), bias)
    return permuted


def container_bytes(layers: dict) -> bytes:
    """Serialize in fixed network order; byte-identical across runs."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<II", VERSION, len(FEATURE_INDEX))
    for name in FEATURE_INDEX:  # insertion order == network order
        kernel, bias = layers[name]
        encoded = name.encode("ascii")
        out += struct.pack("<H", len(encoded))
        out += encoded
        out += struct.pack("<IIII", *kernel.shape)
        out += np.ascontiguousarray(kernel, np.float32).tobytes()
        out += np.ascontiguousarray(bias, np.float32).tobytes()
    out += struct.pack("<I", binascii.crc32(bytes(out)) & 0xFFFFFFFF)
    return bytes(out)


def convert(source: Path, output: Path, source_layout: str = "torchvision") -> str:
    """Write the converted container; returns its 8-hex CRC32 checksum."""
    state_dict = torch.load(source, map_location="cpu", weights_only=True)
    layers = extract_conv_layers(state_dict)
    if source_layout == "torchvision":
        layers = fold_torchvision_scale(layers)
    elif source_layout == "caffe-bgr":
        layers = permute_bgr_to_rgb(layers)
    else:
        raise ConversionError(f"unknown source layout {source_layout!r}")
    blob = container_bytes(layers)
    output.write_bytes(blob)
    return f"{binascii.crc32(blob[:-4]) & 0xFFFFFFFF:08x}"


def torch_conv4_2(layers: dict, image_u8: np.ndarray) -> np.ndarray:
    """Source-framework forward to the conv4_2 tap, torchvision preprocessing."""
    x = torch.from_numpy(image_u8).float().permute(2, 0, 1) / 255.0
    x = (x - torch.tensor(TORCHVISION_MEANS).view(3, 1, 1)) / torch.tensor(
        TORCHVISION_STDS
    ).view(3, 1, 1)
    x = x.unsqueeze(0)
    with torch.no_grad():
        for layer in vgg_prefix_spec():
            if layer.kind == "conv":
                kernel, bias = layers[layer.name]
                x = torch.nn.functional.conv2d(
                    x, torch.from_numpy(kernel), torch.from_numpy(bias), padding=1
                )
                if layer.name == "conv4_2":  # tap is pre-activation
                    return x.squeeze(0).numpy()
            elif layer.kind == "relu":
                x = torch.nn.functional.relu(x)
            else:
                x = torch.nn.functional.max_pool2d(x, 2)
    raise AssertionError("conv4_2 not reached")


def spot_check(output: Path, original_layers: dict, seed: int = 0) -> float:
    """Max relative error at conv4_2: engine (folded file) vs torch (source)."""
    rng = np.random.default_rng(seed)
    image = rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)
    weights = load_weights(output)
    folded_means = tuple(255.0 * m for m in TORCHVISION_MEANS)
    engine_input = preprocess(image, PreprocessConfig(channel_means=folded_means))
    taps, _ = forward_with_taps(engine_input, ("conv4_2",), weights)
    reference = torch_conv4_2(original_layers, image)
    scale = float(np.max(np.abs(reference)))
    return float(np.max(np.abs(taps["conv4_2"] - reference))) / scale


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Convert a pretrained VGG-19 release to the engine weight format."
    )
    parser.add_argument("source", type=Path, help="path to the downloaded .pth file")
    parser.add_argument("output", type=Path, help="weight file to write")
    parser.add_argument(
        "--source-layout", choices=["torchvision", "caffe-bgr"],
        default="torchvision",
    )
    parser.add_argument(
        "--any-source", action="store_true",
        help="skip the pinned SHA-256 prefix check",
    )
    parser.add_argument(
        "--skip-spot-check", action="store_true",
        help="do not run the torch-vs-engine conv4_2 comparison",
    )
    args = parser.parse_args(argv)

    if not args.source.is_file():
        print(f"source not found: {args.source}", file=sys.stderr)
        print(f"download it from {SOURCE_URL}", file=sys.stderr)
        return 1
    if args.source_layout == "torchvision" and not args.any_source:
        digest = sha256_hex(args.source)
        if not digest.startswith(SOURCE_SHA256_PREFIX):
            print(
                f"source SHA-256 {digest[:16]}... does not match the pinned release "
                f"({SOURCE_SHA256_PREFIX}...); pass --any-source to convert anyway",
                file=sys.stderr,
            )
            return 1

    try:
        state_dict = torch.load(args.source, map_location="cpu", weights_only=True)
        original_layers = extract_conv_layers(state_dict)
        checksum = convert(args.source, args.output, args.source_layout)
    except ConversionError as exc:
        print(f"conversion failed: {exc}", file=sys.stderr)
        return 1

    print(f"{'layer':<10} {'kernel':<18} {'params':>10}")
    for name in FEATURE_INDEX:
        kernel, bias = original_layers[name]
        print(f"{name:<10} {str(kernel.shape):<18} {kernel.size + bias.size:>10}")
    print(f"\nwrote {args.output} ({args.output.stat().st_size} bytes), CRC32 {checksum}")
    if args.source_layout == "torchvision":
        folded = ", ".join(f"{255 * m:.3f}" for m in TORCHVISION_MEANS)
        print(f"exact-equivalence channel means: ({folded})")

    if not args.skip_spot_check and args.source_layout == "torchvision":
        error = spot_check(args.output, original_layers)
        print(f"spot check conv4_2 vs torch: max rel err {error:.2e} (tolerance 1e-3)")
        if error >= 1e-3:
            print("spot check FAILED", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
