"""Adaptive-moment optimizer for the four parameter matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Gradients, Parameters


@dataclass
class AdamState:
    """First/second-moment accumulators and the shared step counter."""

    m: Gradients
    v: Gradients
    step: int = 0

    @classmethod
    def for_parameters(cls, params: Parameters) -> "AdamState":
        return cls(
            m=Gradients.zeros(params.input_dim, params.hidden_dim),
            v=Gradients.zeros(params.input_dim, params.hidden_dim),
        )


def adam_step(
    params: Parameters,
    grads: Gradients,
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One bias-corrected moment update, applied to ``params`` in place."""
    state.step += 1
    t = state.step
    for name in Parameters.FIELDS:
        g = getattr(grads, name)
        p = getattr(params, name)
        if g.shape != p.shape:
            raise ValueError(f"gradient/parameter shape mismatch for {name}")
        m = getattr(state.m, name)
        v = getattr(state.v, name)
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * np.square(g)
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)
