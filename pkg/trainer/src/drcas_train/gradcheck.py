"""Finite-difference oracle for the loss/architecture wiring.

Compares autograd gradients of the residual L1 loss against central
differences on a tiny double-precision model. Central differences are only
valid away from non-differentiable points, so the setup keeps both kinds of
kink out of the perturbation interval: residuals are pushed well away from
zero (L1 kink) and weight draws are rejected until no ReLU input sits within
the reach of a 1e-3 parameter step.
"""

from __future__ import annotations

import torch

from .model import DrcasNet

_KINK_MARGIN = 5e-3  # >> step * max |d preactivation / d theta| for these scales


def _relu_input_margin(net: DrcasNet, x: torch.Tensor) -> float:
    """Smallest |pre-activation| over every ReLU input in the forward pass."""
    margins = []
    with torch.no_grad():
        t = net.head(x)
        for block in net.blocks:
            a = block.conv1(t)
            margins.append(float(a.abs().min()))
            b = block.conv2(torch.relu(a)) + t
            margins.append(float(b.abs().min()))
            t = torch.relu(b)
    return min(margins)


def make_tiny_setup(detach_skip: bool = False, seed: int = 0):
    """Tiny model (C=4, R=1) with randomized weights plus a kink-free batch."""
    for attempt in range(200):
        torch.manual_seed(seed * 1009 + attempt)
        net = DrcasNet(channels=4, blocks=1, scale=(2, 2), detach_skip=detach_skip).double()
        with torch.no_grad():
            for p in net.parameters():
                p.uniform_(-0.3, 0.3)  # overrides the zero tail: gradients must flow
        x = torch.rand(1, 3, 8, 8, dtype=torch.float64)
        if _relu_input_margin(net, x) > _KINK_MARGIN:
            break
    else:
        raise RuntimeError("could not find a kink-free configuration")
    with torch.no_grad():
        pred = net(x)
    signs = torch.where(torch.rand_like(pred) < 0.5, -1.0, 1.0)
    target = pred + signs * (0.2 + 0.6 * torch.rand_like(pred))
    return net, x, target


def loss_fn(net: DrcasNet, x: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    return torch.mean(torch.abs(net(x) - target))


def gradient_check(net: DrcasNet, x: torch.Tensor, target: torch.Tensor,
                   n_params: int = 120, step: float = 1e-3, seed: int = 1) -> float:
    """Max relative error between autograd and central finite differences,
    over `n_params` randomly selected parameters."""
    net.zero_grad()
    loss_fn(net, x, target).backward()

    params = [p for p in net.parameters()]
    sizes = [p.numel() for p in params]
    total = sum(sizes)
    gen = torch.Generator().manual_seed(seed)
    chosen = torch.randperm(total, generator=gen)[: min(n_params, total)]

    worst = 0.0
    with torch.no_grad():
        for flat_index in chosen.tolist():
            pi = 0
            while flat_index >= sizes[pi]:
                flat_index -= sizes[pi]
                pi += 1
            param = params[pi]
            flat = param.view(-1)
            analytic = float(param.grad.view(-1)[flat_index])

            original = float(flat[flat_index])
            flat[flat_index] = original + step
            plus = float(loss_fn(net, x, target))
            flat[flat_index] = original - step
            minus = float(loss_fn(net, x, target))
            flat[flat_index] = original

            numeric = (plus - minus) / (2.0 * step)
            scale = max(abs(analytic), abs(numeric), 1e-8)
            worst = max(worst, abs(analytic - numeric) / scale)
    return worst
