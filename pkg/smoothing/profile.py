"""
Transition profiles h with h = 1 on (-inf, -1], h = 0 on [1, inf) and h(0) > 0.
"""
from dataclasses import dataclass
from typing import Callable
import numpy as np


@dataclass(frozen=True)
class TransitionProfile:
    """Evaluator pair for a transition profile and its derivative."""
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def __call__(self, t):
        return self.value(np.asarray(t, dtype=float))

    def prime(self, t):
        return self.derivative(np.asarray(t, dtype=float))


def _smoothstep_complement(t: np.ndarray) -> np.ndarray:
    x = np.clip(0.5 * (t + 1.0), 0.0, 1.0)
    return 1.0 - x * x * (3.0 - 2.0 * x)


def _smoothstep_complement_prime(t: np.ndarray) -> np.ndarray:
    x = 0.5 * (t + 1.0)
    inside = (x > 0.0) & (x < 1.0)
    return np.where(inside, -3.0 * x * (1.0 - x), 0.0)


def default_profile() -> TransitionProfile:
    """
    Smoothstep complement h(t) = 1 - s((t + 1) / 2) with s(x) = x^2 (3 - 2x).

    h is non-increasing, h(0) = 1/2 and h' vanishes for |t| >= 1.
    """
    return TransitionProfile(_smoothstep_complement, _smoothstep_complement_prime, "smoothstep")
