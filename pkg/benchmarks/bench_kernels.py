"""Timing comparison: compiled Cython kernels vs the NumPy fallback.

Runs the per-kernel hot spots at real layer shapes, then a full six-tap
forward+backward sweep, on both backends in one process.

    python3 benchmarks/bench_kernels.py [--size 128] [--repeats 5]
"""

import argparse
import time

import numpy as np

from histostyle.style import StyleTransferConfig, total_loss_and_gradient
from histostyle.style import content_representation, style_representation
from histostyle.tensor_core import (
    backend,
    conv2d_backward_input,
    conv2d_forward,
    gram_matrix,
    pool2d_forward,
)
from histostyle.vgg import NetworkWeights, conv_input_channels, vgg_prefix_spec


def he_weights(seed=0, scale=0.5):
    spec = vgg_prefix_spec()
    rng = np.random.default_rng(seed)
    in_channels = conv_input_channels(spec)
    kernels, biases = {}, {}
    for layer in spec:
        if layer.kind != "conv":
            continue
        fan_in = in_channels[layer.name] * 9
        std = scale * np.sqrt(2.0 / fan_in)
        kernels[layer.name] = rng.normal(
            0.0, std, (layer.channels_out, in_channels[layer.name], 3, 3)
        ).astype(np.float32)
        biases[layer.name] = rng.uniform(-0.1, 0.1, layer.channels_out).astype(np.float32)
    return NetworkWeights.from_arrays(spec, kernels, biases)


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def kernel_cases(size, rng):
    """(label, callable) pairs at the shapes the network actually runs."""
    cases = []
    for c_in, c_out, hw in [(3, 64, size), (64, 128, size // 2), (256, 256, size // 4), (512, 512, size // 8)]:
        x = rng.standard_normal((c_in, hw, hw)).astype(np.float32)
        w = rng.standard_normal((c_out, c_in, 3, 3)).astype(np.float32) * 0.05
        b = np.zeros(c_out, np.float32)
        g = rng.standard_normal((c_out, hw, hw)).astype(np.float32)
        cases.append(
            (f"conv fwd {c_in:>3}->{c_out:<3} @{hw}", lambda x=x, w=w, b=b: conv2d_forward(x, w, b))
        )
        cases.append(
            (f"conv bwd {c_in:>3}->{c_out:<3} @{hw}",
             lambda g=g, w=w, c_in=c_in, hw=hw: conv2d_backward_input(g, w, (c_in, hw, hw)))
        )
    pool_in = rng.standard_normal((64, size, size)).astype(np.float32)
    cases.append((f"max pool 64 @{size}", lambda: pool2d_forward(pool_in, "max")))
    gram_in = rng.standard_normal((512, size // 8, size // 8)).astype(np.float32)
    cases.append((f"gram 512 @{size // 8}", lambda: gram_matrix(gram_in)))
    return cases


def full_loss_case(size, weights, rng):
    config = StyleTransferConfig()
    content = rng.standard_normal((3, size, size)).astype(np.float32) * 40.0
    style = rng.standard_normal((3, size, size)).astype(np.float32) * 40.0
    target = rng.standard_normal((3, size, size)).astype(np.float32) * 40.0
    content_ref = content_representation(content, weights, config)
    style_ref = style_representation(style, weights, config)
    return lambda: total_loss_and_gradient(target, content_ref, style_ref, weights, config)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=128, help="input side length")
    parser.add_argument("--repeats", type=int, default=5, help="best-of repeats")
    args = parser.parse_args()

    try:
        from histostyle.tensor_core import _kernels
    except ImportError:
        raise SystemExit(
            "compiled kernels are not built; run pip install -e . and retry"
        )
    from histostyle.tensor_core import _kernels_np

    backends = [("compiled", _kernels), ("numpy", _kernels_np)]
    rng = np.random.default_rng(1)
    weights = he_weights()
    cases = kernel_cases(args.size, rng)
    cases.append((f"full loss+grad @{args.size}", full_loss_case(args.size, weights, rng)))

    print(f"size={args.size}, best of {args.repeats}\n")
    print(f"{'case':<28} {'compiled':>10} {'numpy':>10} {'speedup':>8}")
    original = backend.kernels
    try:
        for label, fn in cases:
            timings = {}
            for name, module in backends:
                backend.kernels = module
                fn()  # warm-up outside the timed repeats
                timings[name] = best_of(fn, args.repeats)
            ratio = timings["numpy"] / timings["compiled"]
            print(
                f"{label:<28} {timings['compiled'] * 1e3:>8.2f}ms "
                f"{timings['numpy'] * 1e3:>8.2f}ms {ratio:>7.1f}x"
            )
    finally:
        backend.kernels = original


if __name__ == "__main__":
    main()
