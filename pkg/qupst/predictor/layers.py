"""Dense building blocks with explicit forward and backward passes.

Weights follow the (out_features, in_features) convention: y = x @ W.T + b.
"""

from dataclasses import dataclass, field

import numpy as np

Params = dict[str, np.ndarray]


def uniform_fan_in(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    bound = np.sqrt(1.0 / shape[-1])
    return rng.uniform(-bound, bound, size=shape)


def init_mlp(params: Params, prefix: str, dims: list[int], rng: np.random.Generator) -> None:
    for k, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        params[f"{prefix}.{k}.weight"] = uniform_fan_in(rng, (fan_out, fan_in))
        params[f"{prefix}.{k}.bias"] = np.zeros(fan_out)


def mlp_depth(params: Params, prefix: str) -> int:
    return sum(1 for name in params if name.startswith(f"{prefix}.") and name.endswith(".weight"))


@dataclass
class MLPCache:
    inputs: list[np.ndarray] = field(default_factory=list)
    pre: list[np.ndarray] = field(default_factory=list)


def mlp_forward(params: Params, prefix: str, x: np.ndarray) -> tuple[np.ndarray, MLPCache]:
    """Linear layers with ReLU between them (none after the last)."""
    cache = MLPCache()
    depth = mlp_depth(params, prefix)
    for k in range(depth):
        cache.inputs.append(x)
        z = x @ params[f"{prefix}.{k}.weight"].T + params[f"{prefix}.{k}.bias"]
        cache.pre.append(z)
        x = np.maximum(z, 0.0) if k < depth - 1 else z
    return x, cache


def mlp_backward(params: Params, prefix: str, cache: MLPCache, grad_out: np.ndarray, grads: Params) -> np.ndarray:
    depth = len(cache.inputs)
    g = grad_out
    for k in range(depth - 1, -1, -1):
        if k < depth - 1:
            g = g * (cache.pre[k] > 0.0)
        grads[f"{prefix}.{k}.weight"] = g.T @ cache.inputs[k]
        grads[f"{prefix}.{k}.bias"] = g.sum(axis=0)
        g = g @ params[f"{prefix}.{k}.weight"]
    return g


@dataclass
class LayerNormCache:
    xhat: np.ndarray
    inv_std: np.ndarray


def layer_norm_forward(x: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float) -> tuple[np.ndarray, LayerNormCache]:
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv_std
    return gain * xhat + bias, LayerNormCache(xhat=xhat, inv_std=inv_std)


def layer_norm_backward(
    grad_out: np.ndarray, gain: np.ndarray, cache: LayerNormCache
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (d_input, d_gain, d_bias)."""
    xhat = cache.xhat
    d = xhat.shape[-1]
    dxhat = grad_out * gain
    dx = (cache.inv_std / d) * (
        d * dxhat
        - dxhat.sum(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
    )
    return dx, (grad_out * xhat).sum(axis=0), grad_out.sum(axis=0)


def segment_sum(values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Sum consecutive segments beginning at ``starts`` (every segment non-empty)."""
    return np.add.reduceat(values, starts, axis=0)


def segment_softmax(scores: np.ndarray, starts: np.ndarray, segment_of: np.ndarray) -> np.ndarray:
    """Softmax within each segment, max-shifted for stability."""
    peak = np.maximum.reduceat(scores, starts)
    e = np.exp(scores - peak[segment_of])
    return e / segment_sum(e, starts)[segment_of]
