"""ml: a small machine-learning dialect used to exercise declarative rewrites."""

from __future__ import annotations

from miniir.dialects.table import load_dialect

TABLE = """
[ml.leaky_relu]
summary = x if x >= 0 else alpha * x, on a scalar f32
traits = NoSideEffect
operands = f32
results = f32
attrs = alpha:float

[ml.leaky_relu_tensor]
summary = elementwise leaky ReLU on an f32 tensor; no tensor runtime exists
traits = NoSideEffect
operands = tensor-of-f32
results = same:0
attrs = alpha:float
executable = no
"""


def make_dialect():
    return load_dialect("ml", TABLE, globals())
