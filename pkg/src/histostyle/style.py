"""Content/style representations, the combined loss, and the full run.

The total objective is

    L = 1/2 * sum((C_target - C_content)^2)
        + alpha * sum_i w_i * E_i

with the content term taken at conv4_2 and the style terms E_i built
from Gram-matrix differences at relu1_1 .. relu5_1.  With
style normalization on (the default), each E_i is

    E_i = 1/(4 N_i^2) * sum((G_target/M_target - G_style/M_style)^2)

which reduces to the plain 1/(4 N^2 M^2) * sum((G_t - G_s)^2) when both
images share a spatial size and stays commensurate when they do not.
With normalization off, E_i = sum((G_t - G_s)^2) with no scaling.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .lbfgs import LbfgsConfig, minimize
from .tensor_core import GramMatrix, as_tensor, backend_name, gram_backward, gram_matrix
from .vgg import (
    NetworkWeights,
    PreprocessConfig,
    backward_from_taps,
    deprocess,
    forward_with_taps,
    preprocess,
)

DEFAULT_STYLE_TAPS = ("relu1_1", "relu2_1", "relu3_1", "relu4_1", "relu5_1")


@dataclass(frozen=True)
class StyleTransferConfig:
    alpha: float = 100.0
    layer_weights: Tuple[float, ...] = (0.2, 0.2, 0.2, 0.2, 0.2)
    iterations: int = 1600
    content_tap: str = "conv4_2"
    style_taps: Tuple[str, ...] = DEFAULT_STYLE_TAPS
    init_mode: str = "content"
    pooling: str = "max"
    style_normalization: bool = True
    seed: Optional[int] = None
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if len(self.layer_weights) != len(self.style_taps):
            raise ValueError(
                f"{len(self.layer_weights)} layer weights for "
                f"{len(self.style_taps)} style taps"
            )
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.init_mode not in ("content", "noise"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        if self.pooling not in ("max", "average"):
            raise ValueError(f"unknown pooling {self.pooling!r}")

    def echo(self) -> dict:
        """Plain-data view of the configuration for run metadata."""
        out = asdict(self)
        out["layer_weights"] = list(self.layer_weights)
        out["style_taps"] = list(self.style_taps)
        out["preprocess"] = {"channel_means": list(self.preprocess.channel_means)}
        return out


@dataclass(frozen=True)
class ContentRepresentation:
    tensor: np.ndarray
    source_shape: Tuple[int, int, int]


@dataclass(frozen=True)
class StyleRepresentation:
    grams: Tuple[GramMatrix, ...]


@dataclass(frozen=True)
class LossBreakdown:
    content_loss: float
    style_loss_per_layer: Tuple[float, ...]
    total: float


def content_representation(
    image: np.ndarray, weights: NetworkWeights, config: StyleTransferConfig
) -> ContentRepresentation:
    """Feature map at the content tap for a preprocessed image tensor."""
    tensor = as_tensor(image)
    taps, _ = forward_with_taps(tensor, [config.content_tap], weights, config.pooling)
    return ContentRepresentation(
        tensor=taps[config.content_tap].copy(), source_shape=tensor.shape
    )


def style_representation(
    image: np.ndarray, weights: NetworkWeights, config: StyleTransferConfig
) -> StyleRepresentation:
    """Gram matrices at the style taps, in tap order."""
    taps, _ = forward_with_taps(image, config.style_taps, weights, config.pooling)
    return StyleRepresentation(
        grams=tuple(gram_matrix(taps[name]) for name in config.style_taps)
    )


def _style_term(
    target_gram: GramMatrix, reference: GramMatrix, normalize: bool
) -> Tuple[float, np.ndarray]:
    """Per-layer style loss E_i and its gradient with respect to G_target."""
    g_t = target_gram.values.astype(np.float64)
    g_s = reference.values.astype(np.float64)
    n = target_gram.n_channels
    if normalize:
        diff = g_t / target_gram.m_spatial - g_s / reference.m_spatial
        loss = float(np.sum(diff * diff) / (4.0 * n * n))
        grad = diff / (2.0 * n * n * target_gram.m_spatial)
    else:
        diff = g_t - g_s
        loss = float(np.sum(diff * diff))
        grad = 2.0 * diff
    return loss, grad


def total_loss_and_gradient(
    target_pixels: np.ndarray,
    content_ref: ContentRepresentation,
    style_ref: StyleRepresentation,
    weights: NetworkWeights,
    config: StyleTransferConfig,
) -> Tuple[LossBreakdown, np.ndarray]:
    """Loss breakdown at the target plus d(total)/d(target_pixels)."""
    target = as_tensor(target_pixels)
    if target.shape != content_ref.source_shape:
        raise ValueError(
            f"target shape {target.shape} does not match the content image "
            f"shape {content_ref.source_shape}"
        )
    if len(style_ref.grams) != len(config.style_taps):
        raise ValueError(
            f"style reference has {len(style_ref.grams)} grams for "
            f"{len(config.style_taps)} taps"
        )

    wanted = set(config.style_taps) | {config.content_tap}
    taps, cache = forward_with_taps(target, wanted, weights, config.pooling)

    tap_gradients: Dict[str, np.ndarray] = {}

    content_diff = (
        taps[config.content_tap].astype(np.float64) - content_ref.tensor.astype(np.float64)
    )
    content_loss = 0.5 * float(np.sum(content_diff * content_diff))
    tap_gradients[config.content_tap] = content_diff.astype(np.float32)

    style_losses: List[float] = []
    for tap_name, layer_weight, reference in zip(
        config.style_taps, config.layer_weights, style_ref.grams
    ):
        features = taps[tap_name]
        target_gram = gram_matrix(features)
        if target_gram.n_channels != reference.n_channels:
            raise ValueError(
                f"style reference at {tap_name} has {reference.n_channels} "
                f"channels, target has {target_gram.n_channels}"
            )
        loss, grad_gram = _style_term(
            target_gram, reference, config.style_normalization
        )
        style_losses.append(loss)
        scale = config.alpha * layer_weight
        feature_grad = gram_backward(features, grad_gram.astype(np.float32))
        contribution = (scale * feature_grad.astype(np.float64)).astype(np.float32)
        if tap_name in tap_gradients:
            tap_gradients[tap_name] = tap_gradients[tap_name] + contribution
        else:
            tap_gradients[tap_name] = contribution

    weighted_style = sum(
        w * e for w, e in zip(config.layer_weights, style_losses)
    )
    breakdown = LossBreakdown(
        content_loss=content_loss,
        style_loss_per_layer=tuple(style_losses),
        total=content_loss + config.alpha * weighted_style,
    )
    gradient = backward_from_taps(tap_gradients, cache)
    return breakdown, gradient


@dataclass
class StyleTransferResult:
    image: np.ndarray  # (H, W, 3) u8
    trace: List[LossBreakdown]
    metadata: dict
    line_search_warning: bool = False


def _initial_target(content_tensor, config) -> np.ndarray:
    if config.init_mode == "content":
        return content_tensor.astype(np.float64)
    rng = np.random.default_rng(config.seed)
    means = np.asarray(config.preprocess.channel_means, np.float64).reshape(3, 1, 1)
    noise = rng.uniform(0.0, 255.0, size=content_tensor.shape)
    return noise - means


def run_style_transfer(
    content_image: np.ndarray,
    style_image: np.ndarray,
    weights: NetworkWeights,
    config: Optional[StyleTransferConfig] = None,
    progress: Optional[callable] = None,
) -> StyleTransferResult:
    """Optimize a target image to keep the content and adopt the style.

    Both inputs are (H, W, 3) u8 arrays; the style image may have a
    different spatial size.  Pixels stay box-constrained to the
    preprocessed [0, 255] range.  A persistent line-search failure ends
    the run early with the best iterate and a warning flag, not an error.
    """
    config = config if config is not None else StyleTransferConfig()
    started = time.perf_counter()

    content_tensor = preprocess(content_image, config.preprocess)
    style_tensor = preprocess(style_image, config.preprocess)
    content_ref = content_representation(content_tensor, weights, config)
    style_ref = style_representation(style_tensor, weights, config)

    breakdowns: Dict[float, LossBreakdown] = {}

    def objective(x: np.ndarray):
        breakdown, gradient = total_loss_and_gradient(
            x.astype(np.float32), content_ref, style_ref, weights, config
        )
        breakdowns[breakdown.total] = breakdown
        return breakdown.total, gradient.astype(np.float64)

    means = np.asarray(config.preprocess.channel_means, np.float64).reshape(3, 1, 1)
    shape = content_tensor.shape
    optimizer_config = LbfgsConfig(
        max_iterations=config.iterations,
        lower=np.broadcast_to(0.0 - means, shape),
        upper=np.broadcast_to(255.0 - means, shape),
    )
    result = minimize(
        objective, _initial_target(content_tensor, config), optimizer_config,
        callback=progress,
    )

    trace = [breakdowns[value] for value in result.trace]
    elapsed = time.perf_counter() - started
    metadata = {
        "config": config.echo(),
        "weight_checksum": weights.checksum,
        "backend": backend_name(),
        "iterations_run": result.iterations,
        "initial_loss": result.trace[0],
        "final_loss": result.fun,
        "line_search_warning": result.line_search_failed,
        "wall_time_seconds": elapsed,
    }
    return StyleTransferResult(
        image=deprocess(np.asarray(result.x, np.float32), config.preprocess),
        trace=trace,
        metadata=metadata,
        line_search_warning=result.line_search_failed,
    )
