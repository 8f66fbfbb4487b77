"""Pure numpy implementation of the residual/gradient kernels.

Shapes: ``px, py`` are ``(K, P)`` (K terms, P points); ``alpha`` is
``(K, 5, P)`` holding, per term and point, the coefficients multiplying the
network value, d/dpx, d/dpy, d2/dpx2 and d2/dpy2.
"""
import numpy as np


def _chain(z):
    e = np.exp(-np.abs(z))
    s = np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    d1 = s * (1.0 - s)
    t = 1.0 - 2.0 * s
    d2 = d1 * t
    d3 = d1 * t * t - 2.0 * d1 * d1
    return s, d1, d2, d3


def forward(w1, w2, b, c, px, py, alpha):
    z = px[..., None] * w1 + py[..., None] * w2 + b
    s, d1, d2, _ = _chain(z)
    a = alpha[..., None]
    g = a[:, 0] * s + (a[:, 1] * w1 + a[:, 2] * w2) * d1 + (a[:, 3] * (w1 * w1) + a[:, 4] * (w2 * w2)) * d2
    return (g * c).sum(axis=2).sum(axis=0)


def backward(w1, w2, b, c, px, py, alpha, rbar):
    z = px[..., None] * w1 + py[..., None] * w2 + b
    s, d1, d2, d3 = _chain(z)
    a = alpha[..., None]
    lin = a[:, 1] * w1 + a[:, 2] * w2
    quad = a[:, 3] * (w1 * w1) + a[:, 4] * (w2 * w2)
    g = a[:, 0] * s + lin * d1 + quad * d2
    t = a[:, 0] * d1 + lin * d2 + quad * d3
    r = rbar[None, :, None]
    gc = (r * g).sum(axis=(0, 1))
    gb = (r * t).sum(axis=(0, 1))
    gw1 = (r * (t * px[..., None] + a[:, 1] * d1 + 2.0 * a[:, 3] * w1 * d2)).sum(axis=(0, 1))
    gw2 = (r * (t * py[..., None] + a[:, 2] * d1 + 2.0 * a[:, 4] * w2 * d2)).sum(axis=(0, 1))
    return np.stack([gw1 * c, gw2 * c, gb * c, gc])
