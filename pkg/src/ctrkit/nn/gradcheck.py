"""Finite-difference verification of backpropagated gradients."""

from __future__ import annotations


from .tensor import Tensor

REL_FLOOR = 1e-6


def grad_check(loss_fn, params: list[Tensor], h: float = 1e-5) -> float:
    """Worst relative error between backprop and central differences.

    ``loss_fn`` re-evaluates the scalar loss from the current parameter
    values; it is called twice per parameter entry with a +/-h nudge. The
    analytic gradient comes from one backward pass. Relative error is
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
    """
    for p in params:
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, ga in zip(params, analytic):
        flat = p.data.ravel()
        gflat = ga.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = float(loss_fn())
            flat[i] = orig - h
            down = float(loss_fn())
            flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            err = abs(gflat[i] - numeric) / max(abs(gflat[i]), abs(numeric), REL_FLOOR)
            worst = max(worst, err)
    return worst
