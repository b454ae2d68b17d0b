"""Adam-style optimizer with decoupled weight decay and linear warmup."""

from __future__ import annotations

import numpy as np


class AdamW:
    """Adaptive moment estimation with decoupled weight decay.

    The learning rate ramps linearly from zero over ``warmup_steps``
    optimizer steps and stays at ``lr`` afterwards. Parameter arrays
    are updated in place; gradients are matched to parameters by name.
    """

    def __init__(
        self,
        params: dict[str, np.ndarray],
        lr: float = 3e-5,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.01,
        warmup_steps: int = 0,
    ):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.params = params
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.warmup_steps = warmup_steps
        self.step_count = 0
        self._m = {name: np.zeros_like(arr) for name, arr in params.items()}
        self._v = {name: np.zeros_like(arr) for name, arr in params.items()}

    def current_lr(self) -> float:
        if self.warmup_steps > 0 and self.step_count < self.warmup_steps:
            return self.lr * (self.step_count + 1) / self.warmup_steps
        return self.lr

    def step(self, grads: dict[str, np.ndarray]) -> None:
        if set(grads) != set(self.params):
            raise ValueError("gradient names do not match parameter names")
        lr_t = self.current_lr()
        self.step_count += 1
        t = self.step_count
        bias1 = 1.0 - self.beta1**t
        bias2 = 1.0 - self.beta2**t
        for name, param in self.params.items():
            g = grads[name]
            m = self._m[name]
            v = self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / bias1
            v_hat = v / bias2
            param -= lr_t * (m_hat / (np.sqrt(v_hat) + self.eps) + self.weight_decay * param)
