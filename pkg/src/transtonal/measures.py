"""Logarithmic dimensions, transientness/tonality indices and their theory.

Conventions
-----------
Logarithms are base 2. For a standard normal ``g``, ``E[log2 g^2] = -C``
with ``C = 1 + gamma/ln 2`` (``LOG_DIM_CONSTANT``). Every expectation
formula below therefore carries the offset ``-C``::

    E[D_B(x)] = -C + (1/N) sum_n log2(var <x, e_n>)

The index estimators only use ratios of ``2**D`` and do not depend on this
constant.

Gram matrices are oriented as returned by
``transforms.gram(wavelet_plan, cosine_plan)``: ``G[lam, delta] =
<psi_lam, w_delta>``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import transforms

EULER_GAMMA = 0.577215664901532860606512
LOG_DIM_CONSTANT = 1.0 + EULER_GAMMA / math.log(2.0)
RELATIVE_FLOOR = 1e-12

__all__ = [
    "Basis",
    "DimensionReport",
    "LOG_DIM_CONSTANT",
    "SignificanceMap",
    "TheoryReport",
    "UnsupportedModelError",
    "coherence",
    "default_floor",
    "expected_logdim_approx",
    "expected_logdim_bounds",
    "expected_logdim_exact",
    "indices_from_signal",
    "log_dimension",
    "parseval_weights",
    "relative_redundancy",
    "size_estimate",
    "true_indices",
]


class UnsupportedModelError(ValueError):
    """The model violates the assumptions of the requested formula."""


class Basis(str, enum.Enum):
    """Which basis a statistic refers to: the wavelet (psi) or cosine (w) one."""

    PSI = "psi"
    W = "w"


@dataclass(frozen=True)
class SignificanceMap:
    """Sorted set of flat indices into one basis of length ``basis_length``."""

    indices: np.ndarray
    basis_length: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        if idx.size and (idx.min() < 0 or idx.max() >= self.basis_length):
            raise IndexError(f"map indices must lie in [0, {self.basis_length})")
        uniq = np.unique(idx)
        if uniq.size != idx.size:
            raise ValueError("significance map contains duplicate indices")
        uniq.setflags(write=False)
        object.__setattr__(self, "indices", uniq)
        object.__setattr__(self, "basis_length", int(self.basis_length))

    @classmethod
    def empty(cls, n):
        return cls(np.empty(0, dtype=np.int64), n)

    @classmethod
    def full(cls, n):
        return cls(np.arange(n), n)

    def __len__(self):
        return int(self.indices.size)

    def mask(self):
        m = np.zeros(self.basis_length, dtype=bool)
        m[self.indices] = True
        return m


@dataclass(frozen=True)
class DimensionReport:
    """Log-dimensions, size estimates and estimated rates for one signal.

    When ``degenerate`` is set (signal energy below threshold) both rates
    are 1/2 by convention and carry no information.
    """

    d_psi: float
    d_w: float
    n_hat_psi: float
    n_hat_w: float
    i_tr_hat: float
    i_ton_hat: float
    degenerate: bool = False


@dataclass(frozen=True)
class TheoryReport:
    expected_d_lower: float
    expected_d_upper: float
    expected_d_exact: float
    expected_d_approx: float
    epsilon: float
    constant_c: float = LOG_DIM_CONSTANT

    @property
    def gap(self):
        return self.expected_d_upper - self.expected_d_lower


def _values(coeffs):
    if isinstance(coeffs, transforms.CoefficientVector):
        return coeffs.values
    return np.asarray(coeffs, dtype=float)


def default_floor(energy, n):
    """Relative floor on squared coefficients: 1e-12 times the mean energy."""
    return RELATIVE_FLOOR * max(energy / n, np.finfo(float).tiny)


def log_dimension(coeffs, floor=None):
    """Mean of ``log2(max(c_n^2, floor))`` over the last axis.

    ``floor=None`` picks :func:`default_floor` from the coefficients' own
    energy, which keeps the statistic scale-equivariant.
    """
    c = _values(coeffs)
    if c.shape[-1] < 1:
        raise ValueError("log_dimension needs at least one coefficient")
    sq = c * c
    if floor is None:
        n = c.shape[-1]
        energy = sq.sum(axis=-1, keepdims=True)
        floor = RELATIVE_FLOOR * np.maximum(energy / n, np.finfo(float).tiny)
    elif not floor > 0:
        raise ValueError(f"floor must be positive, got {floor!r}")
    out = np.mean(np.log2(np.maximum(sq, floor)), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def size_estimate(d):
    """``2**d``, the size estimate attached to a log-dimension."""
    return 2.0 ** d


def _rates(d_psi, d_w):
    # 1 / (1 + 2^(d_w - d_psi)) stays finite when both 2^d underflow
    diff = np.clip(d_w - d_psi, -1070.0, 1070.0)
    i_ton = 1.0 / (1.0 + 2.0**diff)
    return 1.0 - i_ton, i_ton


def indices_from_signal(signal, psi_plan, w_plan, floor=None, energy_threshold=None):
    """Estimate transientness and tonality of ``signal``.

    Expands the signal in both bases, takes the log-dimension in each,
    exponentiates and normalizes: ``I_ton = N_psi / (N_psi + N_w)``.
    A dense wavelet expansion signals a large tonal layer, and vice versa.

    The report is degenerate when the signal energy is below
    ``energy_threshold`` (default ``N * floor``).
    """
    x = np.asarray(signal, dtype=float)
    n = psi_plan.length
    if w_plan.length != n or x.shape != (n,):
        raise ValueError(
            f"signal of shape {x.shape} incompatible with plans of length {psi_plan.length}/{w_plan.length}"
        )
    energy = float(x @ x)
    if floor is None:
        floor = default_floor(energy, n)
    elif not floor > 0:
        raise ValueError(f"floor must be positive, got {floor!r}")
    if energy_threshold is None:
        energy_threshold = n * floor
    d_psi = log_dimension(transforms.forward_array(psi_plan, x), floor)
    d_w = log_dimension(transforms.forward_array(w_plan, x), floor)
    degenerate = not energy >= energy_threshold
    if degenerate:
        i_tr, i_ton = 0.5, 0.5
    else:
        i_tr, i_ton = _rates(d_psi, d_w)
    return DimensionReport(
        d_psi=d_psi,
        d_w=d_w,
        n_hat_psi=size_estimate(d_psi),
        n_hat_w=size_estimate(d_w),
        i_tr_hat=float(i_tr),
        i_ton_hat=float(i_ton),
        degenerate=degenerate,
    )


def true_indices(lambda_map, delta_map):
    """Ground-truth ``(I_tr, I_ton)`` from the two map cardinalities."""
    nl, nd = len(lambda_map), len(delta_map)
    if nl + nd == 0:
        raise ValueError("indices undefined when both significance maps are empty")
    return nl / (nl + nd), nd / (nl + nd)


def _check_map(sig_map, n):
    if sig_map.indices.size and sig_map.indices.max() >= n:
        raise IndexError(f"map index {sig_map.indices.max()} out of range for dimension {n}")


def parseval_weights(gram, sig_map, direction=Basis.PSI):
    """Energy the unit-coefficient layer on ``sig_map`` leaks onto each atom.

    ``direction=Basis.PSI``: ``p[lam] = sum_{delta in map} G[lam, delta]^2``,
    i.e. weights on wavelet atoms from a cosine map. ``Basis.W`` is the
    transpose: weights on cosine atoms from a wavelet map.
    """
    g = np.asarray(gram, dtype=float)
    direction = Basis(direction)
    _check_map(sig_map, g.shape[1] if direction is Basis.PSI else g.shape[0])
    if direction is Basis.PSI:
        sub = g[:, sig_map.indices]
        return np.sum(sub * sub, axis=1)
    sub = g[sig_map.indices, :]
    return np.sum(sub * sub, axis=0)


def relative_redundancy(weights, over):
    """Largest Parseval weight over the atoms of ``over``."""
    if len(over) == 0:
        raise ValueError("relative redundancy needs a nonempty map")
    w = np.asarray(weights, dtype=float)
    _check_map(over, w.shape[0])
    return float(np.max(w[over.indices]))


def coherence(gram):
    """Largest absolute inner product between atoms of the two bases."""
    return float(np.max(np.abs(np.asarray(gram, dtype=float))))


def _sigmas(value, count, what):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(count, float(arr))
    if arr.shape != (count,):
        raise ValueError(f"{what} must be a scalar or have one entry per map index ({count})")
    return arr


def _oriented(model, gram, basis):
    """Return (own map, own stds, other map, other stds, gram rows = own atoms)."""
    basis = Basis(basis)
    g = np.asarray(gram, dtype=float)
    n = model.length
    if g.shape != (n, n):
        raise ValueError(f"gram of shape {g.shape} does not match model length {n}")
    lam, dlt = model.lambda_map, model.delta_map
    for m in (lam, dlt):
        if m.basis_length != n:
            raise ValueError("significance map length does not match model length")
    sig = _sigmas(model.sigma, len(lam), "sigma")
    sig_t = _sigmas(model.sigma_tilde, len(dlt), "sigma_tilde")
    if basis is Basis.PSI:
        return lam, sig, dlt, sig_t, g
    return dlt, sig_t, lam, sig, g.T


def _log2(values):
    with np.errstate(divide="ignore"):
        return np.log2(values)


def expected_logdim_exact(model, gram, basis=Basis.PSI):
    """Closed-form ``E[D]`` in one basis for the Gaussian hybrid model.

    Coefficient variances are ``sigma_own^2 [on own map] + sum over the
    other layer of sigma_other^2 G^2 + s^2``. Per-atom standard deviations
    are accepted. Returns ``-inf`` when some coefficient has zero variance.
    """
    own, own_sig, other, other_sig, g = _oriented(model, gram, basis)
    leak = g[:, other.indices] ** 2 @ (other_sig**2)
    var = leak + float(model.noise_std) ** 2
    var[own.indices] += own_sig**2
    return float(-LOG_DIM_CONSTANT + np.mean(_log2(var)))


def _single(value, name):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size and not np.all(arr == arr[0]):
        raise UnsupportedModelError(f"{name} must be a single value for this formula")
    return float(arr[0]) if arr.size else 1.0


def _equal_variance(model):
    return _single(model.sigma, "sigma"), _single(model.sigma_tilde, "sigma_tilde")


def expected_logdim_approx(model, basis=Basis.PSI):
    """Ensemble-average approximation of ``E[D]``, with white-noise terms.

    Replaces each leakage weight by its mean ``|other map| / N``.
    """
    sig, sig_t = _equal_variance(model)
    basis = Basis(basis)
    n = model.length
    s2 = float(model.noise_std) ** 2
    if basis is Basis.PSI:
        n_own, n_other, own_var, other_var = len(model.lambda_map), len(model.delta_map), sig**2, sig_t**2
    else:
        n_own, n_other, own_var, other_var = len(model.delta_map), len(model.lambda_map), sig_t**2, sig**2
    if n_other == 0 and s2 == 0.0:
        raise ValueError("approximation is singular: other layer empty and no noise")
    frac = n_own / n
    own_term = frac * math.log2(own_var + s2) if n_own else 0.0
    return -LOG_DIM_CONSTANT + own_term + (1.0 - frac) * math.log2(other_var * n_other / n + s2)


def expected_logdim_bounds(model, gram, basis=Basis.PSI):
    """Lower/upper bounds on ``E[D]`` for equal variances and no noise.

    The upper bound replaces each on-map leakage weight by the relative
    redundancy ``epsilon`` (measured from ``gram``), the lower one drops it.
    """
    if float(model.noise_std) != 0.0:
        raise UnsupportedModelError("the bounds assume a noise-free model")
    sig, sig_t = _equal_variance(model)
    basis = Basis(basis)
    own, _, other, _, g = _oriented(model, gram, basis)
    own_var, other_var = (sig**2, sig_t**2) if basis is Basis.PSI else (sig_t**2, sig**2)
    n = model.length
    p = np.sum(g[:, other.indices] ** 2, axis=1)
    off = np.ones(n, dtype=bool)
    off[own.indices] = False
    off_term = np.sum(_log2(other_var * p[off])) / n
    n_own = len(own)
    eps = relative_redundancy(p, own) if n_own else 0.0
    frac = n_own / n
    lower = -LOG_DIM_CONSTANT + frac * math.log2(own_var) + off_term if n_own else -LOG_DIM_CONSTANT + off_term
    upper = (
        -LOG_DIM_CONSTANT + frac * math.log2(own_var + eps * other_var) + off_term
        if n_own
        else lower
    )
    exact = -LOG_DIM_CONSTANT + (np.sum(_log2(own_var + other_var * p[own.indices])) / n) + off_term
    try:
        approx = expected_logdim_approx(model, basis)
    except ValueError:
        approx = -math.inf
    return TheoryReport(
        expected_d_lower=float(lower),
        expected_d_upper=float(upper),
        expected_d_exact=float(exact),
        expected_d_approx=float(approx),
        epsilon=float(eps),
    )
