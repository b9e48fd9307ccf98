"""Pure numpy implementations of the transform kernels.

Every function takes and returns C-contiguous float64 arrays of shape
``(batch, n)``. The Cython module ``_kernels`` exposes the same functions
with the same signatures; :mod:`transtonal._backend` picks one at import.
"""
import numpy as np


def analysis_step(x, h, g):
    """One periodized two-channel analysis step (filter, then keep even)."""
    m = x.shape[1]
    taps = np.arange(h.shape[0])
    idx = (2 * np.arange(m // 2)[:, None] + taps[None, :]) % m
    gathered = x[:, idx]
    return gathered @ h, gathered @ g


def synthesis_step(a, d, h, g):
    """Adjoint of :func:`analysis_step`; exact inverse for orthogonal filters."""
    half = a.shape[1]
    m = 2 * half
    out = np.zeros((a.shape[0], m))
    pos = 2 * np.arange(half)
    # positions within one tap never collide, so plain fancy-index += is safe
    for n in range(h.shape[0]):
        out[:, (pos + n) % m] += h[n] * a + g[n] * d
    return out


def lapped_fold(x, window, block):
    """Window and fold each periodic 2*block segment down to block samples.

    Segment ``k`` covers ``x[(k*block + j) % n]`` for ``j < 2*block``. The
    folded output feeds a DCT-IV to give the lapped cosine coefficients.
    """
    batch, n = x.shape
    nblocks = n // block
    q = block // 2
    idx = (np.arange(nblocks)[:, None] * block + np.arange(2 * block)) % n
    z = x[:, idx] * window
    a = z[..., :q]
    b = z[..., q:block]
    c = z[..., block:block + q]
    d = z[..., block + q:]
    folded = np.concatenate((-c[..., ::-1] - d, a - b[..., ::-1]), axis=-1)
    return np.ascontiguousarray(folded.reshape(batch, n))


def lapped_unfold(u, window, block):
    """Adjoint of :func:`lapped_fold` (time-domain aliasing cancellation)."""
    batch, n = u.shape
    nblocks = n // block
    q = block // 2
    u = u.reshape(batch, nblocks, block)
    u1 = u[..., :q]
    u2 = u[..., q:]
    z = np.concatenate((u2, -u2[..., ::-1], -u1[..., ::-1], -u1), axis=-1)
    z = z * window
    out = np.zeros((batch, n))
    # the two halves of every segment land on disjoint sample ranges
    for half in (0, 1):
        idx = (np.arange(nblocks)[:, None] * block + half * block + np.arange(block)) % n
        out[:, idx.ravel()] += z[..., half * block:(half + 1) * block].reshape(batch, n)
    return out
