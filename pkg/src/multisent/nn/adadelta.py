"""Adadelta: per-component adaptive steps with no global learning rate.

Per component, with decay rho and stabilizer eps:

    Eg  <- rho * Eg + (1 - rho) * g^2
    d   <- -sqrt(Eu + eps) / sqrt(Eg + eps) * g
    Eu  <- rho * Eu + (1 - rho) * d^2
    p   <- p + d

Eg accumulates squared gradients, Eu accumulates squared updates; both
start at zero. Zero gradient leaves parameters and state untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError

DEFAULT_RHO = 0.95
DEFAULT_EPS = 1e-6


@dataclass
class AdadeltaState:
    """Accumulators keyed like the parameter tensors they track."""

    accum_grad: dict[str, np.ndarray] = field(default_factory=dict)
    accum_update: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_tensors(cls, tensors: dict[str, np.ndarray]) -> "AdadeltaState":
        return cls(
            accum_grad={k: np.zeros_like(v) for k, v in tensors.items()},
            accum_update={k: np.zeros_like(v) for k, v in tensors.items()},
        )


def adadelta_step(
    tensors: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdadeltaState,
    rho: float = DEFAULT_RHO,
    eps: float = DEFAULT_EPS,
) -> None:
    """Apply one update in place to every tensor; state advances in place."""
    if set(tensors) != set(grads):
        raise ArgumentError(
            f"gradient keys {sorted(set(grads) ^ set(tensors))} do not match parameters"
        )
    for name, p in tensors.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ArgumentError(
                f"gradient shape {g.shape} does not match parameter {name} shape {p.shape}"
            )
        Eg = state.accum_grad[name]
        Eu = state.accum_update[name]
        Eg *= rho
        Eg += (1.0 - rho) * g * g
        delta = -np.sqrt(Eu + eps) / np.sqrt(Eg + eps) * g
        Eu *= rho
        Eu += (1.0 - rho) * delta * delta
        p += delta
