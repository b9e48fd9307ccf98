"""Orthonormal periodic wavelet and local cosine transforms on R^N.

Both transforms act on length-N vectors with N a power of two and use
periodic boundary handling, so each plan defines an exactly orthonormal
basis of R^N. Coefficients are indexed by a flat index:

* wavelet: ``[approx_J, detail_J, detail_{J-1}, ..., detail_1]``
  (coarse to fine); band sizes ``N/2^J, N/2^J, N/2^(J-1), ..., N/2``.
* local cosine: block-major, frequency-minor, ``index = block * B + freq``.

All array functions accept a single signal of shape ``(N,)`` or a batch of
shape ``(batch, N)``.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from ._backend import kernels

__all__ = [
    "BasisKind",
    "CoefficientVector",
    "InvalidPlanError",
    "TransformPlan",
    "basis_vector",
    "basis_matrix",
    "cosine_plan",
    "daubechies",
    "forward",
    "forward_array",
    "gram",
    "inverse",
    "inverse_array",
    "wavelet_plan",
]


class InvalidPlanError(ValueError):
    """Raised when a transform plan's parameters are inconsistent."""


class BasisKind(str, enum.Enum):
    WAVELET = "wavelet"
    LOCAL_COSINE = "local_cosine"


def _is_pow2(n):
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


@functools.lru_cache(maxsize=None)
def daubechies(vanishing_moments):
    """Lowpass filter of the minimum-phase Daubechies wavelet.

    Obtained by spectral factorization of the maximally flat halfband
    polynomial; ``vanishing_moments=1`` is the Haar filter. The result is
    normalized to ``sum(h) == sqrt(2)``, ``sum(h**2) == 1``.
    """
    p = int(vanishing_moments)
    if p < 1 or p > 20:
        raise InvalidPlanError(f"unsupported number of vanishing moments: {p}")
    if p == 1:
        return np.array([1.0, 1.0]) / math.sqrt(2.0)
    # roots y of sum_k C(p-1+k, k) y^k, with y = (2 - z - 1/z) / 4
    coeffs = [math.comb(p - 1 + k, k) for k in range(p)]
    yroots = np.roots(coeffs[::-1])
    h = np.poly1d([1.0])
    for y in yroots:
        # z^2 - (2 - 4y) z + 1 = 0; keep the root inside the unit circle
        zr = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        z0 = zr[np.argmin(np.abs(zr))]
        h = h * np.poly1d([1.0, -z0])
    for _ in range(p):
        h = h * np.poly1d([1.0, 1.0])
    h = np.real(h.coeffs)
    h = h * (math.sqrt(2.0) / h.sum())
    return h


def _filter_pair(name):
    name = name.lower()
    if name == "haar":
        vm = 1
    elif name.startswith("db") and name[2:].isdigit():
        vm = int(name[2:])
    else:
        raise InvalidPlanError(f"unknown wavelet filter {name!r}; expected 'haar' or 'dbK'")
    h = daubechies(vm)
    g = h[::-1].copy()
    g[1::2] *= -1.0
    return np.ascontiguousarray(h), np.ascontiguousarray(g)


@functools.lru_cache(maxsize=None)
def _sine_window(block):
    return np.sin(np.pi * (np.arange(2 * block) + 0.5) / (2 * block))


@dataclass(frozen=True)
class TransformPlan:
    """Immutable description of one orthonormal basis of R^N.

    ``levels`` defaults to ``log2(N) - 2`` and ``block_length`` to ``N/8``
    (at least 2); both are ignored by the other transform kind.
    """

    kind: BasisKind
    length: int
    wavelet_filter: str = "db4"
    levels: int | None = None
    block_length: int | None = None
    window: str = "sine"

    def __post_init__(self):
        try:
            kind = BasisKind(self.kind)
        except ValueError as exc:
            raise InvalidPlanError(f"unknown basis kind {self.kind!r}") from exc
        object.__setattr__(self, "kind", kind)
        n = self.length
        if not _is_pow2(n) or n < 2:
            raise InvalidPlanError(f"length must be a power of two >= 2, got {n!r}")
        object.__setattr__(self, "length", int(n))
        log2n = int(n).bit_length() - 1
        if kind is BasisKind.WAVELET:
            levels = max(1, log2n - 2) if self.levels is None else self.levels
            if not isinstance(levels, (int, np.integer)) or levels < 1 or 2**levels > n:
                raise InvalidPlanError(f"levels must satisfy 1 <= J and 2^J <= N, got {levels!r}")
            object.__setattr__(self, "levels", int(levels))
            _filter_pair(self.wavelet_filter)
        else:
            block = max(2, n // 8) if self.block_length is None else self.block_length
            if not _is_pow2(block) or block < 2 or n % block or n // block < 2:
                raise InvalidPlanError(
                    f"block_length must be a power of two with 2 <= B <= N/2, got {block!r}"
                )
            object.__setattr__(self, "block_length", int(block))
            if self.window != "sine":
                raise InvalidPlanError(f"unsupported window {self.window!r}")

    @property
    def filters(self):
        return _filter_pair(self.wavelet_filter)

    def band_slices(self):
        """Slices of the flat wavelet index for each band, coarse to fine."""
        if self.kind is not BasisKind.WAVELET:
            raise InvalidPlanError("band_slices is defined for wavelet plans only")
        n, j = self.length, self.levels
        size = n >> j
        out = [slice(0, size)]
        start = size
        for level in range(j, 0, -1):
            size = n >> level
            out.append(slice(start, start + size))
            start += size
        return out

    def describe(self):
        if self.kind is BasisKind.WAVELET:
            return f"wavelet(N={self.length}, filter={self.wavelet_filter}, J={self.levels})"
        return f"local_cosine(N={self.length}, B={self.block_length}, window={self.window})"


def wavelet_plan(length, wavelet_filter="db4", levels=None):
    return TransformPlan(BasisKind.WAVELET, length, wavelet_filter=wavelet_filter, levels=levels)


def cosine_plan(length, block_length=None):
    return TransformPlan(BasisKind.LOCAL_COSINE, length, block_length=block_length)


@dataclass(frozen=True)
class CoefficientVector:
    plan: TransformPlan
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape[-1] != self.plan.length:
            raise ValueError(
                f"coefficient length {values.shape[-1]} does not match plan length {self.plan.length}"
            )
        object.__setattr__(self, "values", values)

    def energy(self):
        return float(np.sum(self.values**2))


def _as_batch(x, n):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (1, 2) or arr.shape[-1] != n:
        raise ValueError(f"expected shape (N,) or (batch, N) with N={n}, got {arr.shape}")
    return np.ascontiguousarray(arr.reshape(-1, n)), arr.ndim == 1


def forward_array(plan, x):
    """Analysis coefficients of ``x`` (shape ``(N,)`` or ``(batch, N)``)."""
    xb, single = _as_batch(x, plan.length)
    if plan.kind is BasisKind.WAVELET:
        h, g = plan.filters
        approx = xb
        details = []
        for _ in range(plan.levels):
            approx, det = kernels.analysis_step(approx, h, g)
            details.append(det)
        out = np.concatenate([approx] + details[::-1], axis=1)
    else:
        block = plan.block_length
        folded = kernels.lapped_fold(xb, _sine_window(block), block)
        nblocks = plan.length // block
        out = scipy.fft.dct(folded.reshape(-1, nblocks, block), type=4, norm="ortho", axis=-1)
        out = out.reshape(-1, plan.length)
    return out[0] if single else out


def inverse_array(plan, coeffs):
    """Synthesis from flat coefficients (shape ``(N,)`` or ``(batch, N)``)."""
    cb, single = _as_batch(coeffs, plan.length)
    if plan.kind is BasisKind.WAVELET:
        h, g = plan.filters
        bands = [np.ascontiguousarray(cb[:, s]) for s in plan.band_slices()]
        approx = bands[0]
        for det in bands[1:]:
            approx = kernels.synthesis_step(approx, det, h, g)
        out = approx
    else:
        block = plan.block_length
        nblocks = plan.length // block
        u = scipy.fft.dct(cb.reshape(-1, nblocks, block), type=4, norm="ortho", axis=-1)
        u = np.ascontiguousarray(u.reshape(-1, plan.length))
        out = kernels.lapped_unfold(u, _sine_window(block), block)
    return out[0] if single else out


def forward(plan, signal):
    """Expand ``signal`` in the basis described by ``plan``."""
    signal = np.asarray(signal, dtype=float)
    if signal.shape[-1:] != (plan.length,):
        raise ValueError(f"signal length {signal.shape[-1:]} does not match plan length {plan.length}")
    return CoefficientVector(plan, forward_array(plan, signal))


def inverse(coeffs):
    """Synthesize the signal whose expansion is ``coeffs``."""
    return inverse_array(coeffs.plan, coeffs.values)


def basis_vector(plan, index):
    """Materialize basis element ``index`` as a length-N vector."""
    if not 0 <= index < plan.length:
        raise IndexError(f"basis index {index} out of range [0, {plan.length})")
    onehot = np.zeros(plan.length)
    onehot[index] = 1.0
    return inverse_array(plan, onehot)


def basis_matrix(plan):
    """All basis vectors as rows of an N x N matrix."""
    return inverse_array(plan, np.eye(plan.length))


def gram(plan_a, plan_b):
    """Cross-Gram matrix ``G[i, j] = <a_i, b_j>`` between two bases.

    Rows enumerate ``plan_a``'s flat index and columns ``plan_b``'s. Built by
    materializing basis A and analyzing each element in basis B.
    """
    if plan_a.length != plan_b.length:
        raise ValueError(f"plan lengths differ: {plan_a.length} != {plan_b.length}")
    return forward_array(plan_b, basis_matrix(plan_a))
