"""Adam with coupled L2 weight decay."""

from dataclasses import dataclass, field

import numpy as np

from qupst.models.training import TrainConfig
from qupst.predictor.layers import Params


@dataclass
class AdamState:
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)
    t: int = 0


def adam_step(params: Params, grads: Params, state: AdamState, config: TrainConfig, t: int) -> Params:
    """One bias-corrected Adam update, in place. ``grad += weight_decay * param`` first."""
    if t < 1:
        raise ValueError(f"adam step index must be >= 1, got {t}")
    b1, b2 = config.beta1, config.beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for name, param in params.items():
        g = grads.get(name)
        g = np.zeros_like(param) if g is None else g
        if config.weight_decay:
            g = g + config.weight_decay * param
        m = state.m.get(name)
        v = state.v.get(name)
        m = (1.0 - b1) * g if m is None else b1 * m + (1.0 - b1) * g
        v = (1.0 - b2) * g * g if v is None else b2 * v + (1.0 - b2) * g * g
        state.m[name] = m
        state.v[name] = v
        param -= config.learning_rate * (m / c1) / (np.sqrt(v / c2) + config.eps)
    state.t = t
    return params
