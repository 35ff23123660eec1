"""Small fully connected networks and the Adam update used to train them.

The three update networks share one architecture: a single hidden layer
of 200 ReLU units between an input and an output of equal width. They
are applied row-wise to batches, so one shared network serves every
antenna entry (or power, or phase row) at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import DivergenceError, Var, add, matmul, relu

HIDDEN_UNITS = 200


class Mlp:
    """input -> Linear -> ReLU -> Linear -> output, applied to batched rows.

    The hidden layer gets the usual fan-in uniform init; the output layer
    starts at exactly zero so that the first unrolled update is a no-op
    and optimization variables only move once the network has learned
    something.
    """

    def __init__(self, d_in, d_out, rng, hidden=HIDDEN_UNITS):
        bound = 1.0 / np.sqrt(d_in)
        self.w1 = Var(rng.uniform(-bound, bound, size=(d_in, hidden)), requires_grad=True)
        self.b1 = Var(rng.uniform(-bound, bound, size=hidden), requires_grad=True)
        self.w2 = Var(np.zeros((hidden, d_out)), requires_grad=True)
        self.b2 = Var(np.zeros(d_out), requires_grad=True)
        self.d_in = d_in
        self.d_out = d_out
        self.eval_count = 0  # rows seen; one row = one logical evaluation

    def params(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def forward(self, x):
        """x: (batch, d_in) array or Var. Returns a (batch, d_out) Var."""
        xv = x if isinstance(x, Var) else Var(np.atleast_2d(np.asarray(x, dtype=np.float64)))
        if xv.shape[1] != self.d_in:
            raise ValueError(f"expected input width {self.d_in}, got {xv.shape[1]}")
        self.eval_count += xv.shape[0]
        h = relu(add(matmul(xv, self.w1), self.b1))
        y = add(matmul(h, self.w2), self.b2)
        if not np.all(np.isfinite(y.data)):
            raise DivergenceError("diverged: network output is not finite")
        return y


@dataclass
class AdamState:
    """Per-tensor Adam accumulator (standard bias-corrected variant)."""

    learning_rate: float
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_param(cls, param, learning_rate, beta1=0.9, beta2=0.999, epsilon=1e-8):
        shape = np.shape(param.data if isinstance(param, Var) else param)
        return cls(learning_rate=learning_rate,
                   first_moment=np.zeros(shape),
                   second_moment=np.zeros(shape),
                   step_count=0, beta1=beta1, beta2=beta2, epsilon=epsilon)


def adam_step(state, param, gradient):
    """One Adam update; returns the new parameter value.

    The parameter moves against the gradient of the (minimized) loss.
    state is mutated in place.
    """
    g = np.asarray(gradient, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise DivergenceError("diverged: non-finite gradient in adam_step")
    state.step_count += 1
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * g
    state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * g * g
    m_hat = state.first_moment / (1.0 - state.beta1 ** state.step_count)
    v_hat = state.second_moment / (1.0 - state.beta2 ** state.step_count)
    values = param.data if isinstance(param, Var) else np.asarray(param)
    return values - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)


@dataclass
class TrainedOptimizer:
    """An Mlp bundled with one AdamState per parameter tensor."""

    net: Mlp
    states: list = field(default_factory=list)

    @classmethod
    def create(cls, net, learning_rate, beta1=0.9, beta2=0.999, epsilon=1e-8):
        states = [AdamState.for_param(p, learning_rate, beta1, beta2, epsilon)
                  for p in net.params()]
        return cls(net=net, states=states)

    def apply_gradients(self):
        """Consume .grad of every parameter and update it in place."""
        for p, st in zip(self.net.params(), self.states):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            p.data = adam_step(st, p, g)

    def zero_grads(self):
        for p in self.net.params():
            p.grad = None
