from .backend import backend_name
from .ops import (
    GramMatrix,
    PoolRouting,
    as_tensor,
    conv2d_backward_input,
    conv2d_forward,
    gram_backward,
    gram_matrix,
    pool2d_backward,
    pool2d_forward,
    relu_backward,
    relu_forward,
)

__all__ = [
    "GramMatrix",
    "PoolRouting",
    "as_tensor",
    "backend_name",
    "conv2d_backward_input",
    "conv2d_forward",
    "gram_backward",
    "gram_matrix",
    "pool2d_backward",
    "pool2d_forward",
    "relu_backward",
    "relu_forward",
]
