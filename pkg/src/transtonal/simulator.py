"""Synthetic hybrid signals and the sweep / Monte Carlo experiments.

A hybrid signal is a sparse Gaussian wavelet layer plus a sparse Gaussian
local cosine layer plus optional white noise. Random streams come from
numpy's PCG64, keyed by ``(seed, point, realization)`` so that sweep
results do not depend on evaluation order.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import measures, transforms
from .measures import Basis, SignificanceMap

BIT_GENERATOR = "PCG64"
DEFAULT_SWEEP_LENGTH = 4096


SWEEP_FILTER = "haar"


def sweep_plans(length, wavelet_filter=SWEEP_FILTER):
    """Model bases used by the sweeps: Haar wavelets, 2-block lapped cosine.

    With only two cosine blocks every tonal atom spans the whole signal, so
    a few atoms already leak onto every wavelet coefficient; the short Haar
    atoms keep the leakage of the transient layer onto cosines near uniform.
    """
    return (
        transforms.wavelet_plan(length, wavelet_filter),
        transforms.cosine_plan(length, length // 2),
    )


def rng_for(seed, *keys):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


@dataclass(frozen=True)
class HybridModelSpec:
    """Generative model: wavelet map/std, cosine map/std, noise std, seed.

    ``sigma`` and ``sigma_tilde`` are standard deviations, either one value
    or one per map index. Plans default to :func:`sweep_plans`.
    """

    length: int
    lambda_map: SignificanceMap
    delta_map: SignificanceMap
    sigma: float | np.ndarray = 1.0
    sigma_tilde: float | np.ndarray = 1.0
    noise_std: float = 0.0
    seed: int = 0
    psi_plan: transforms.TransformPlan | None = None
    w_plan: transforms.TransformPlan | None = None

    def __post_init__(self):
        for m in (self.lambda_map, self.delta_map):
            if m.basis_length != self.length:
                raise ValueError("significance map length does not match model length")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        for name, m in (("sigma", self.lambda_map), ("sigma_tilde", self.delta_map)):
            arr = np.asarray(getattr(self, name), dtype=float)
            if np.any(arr <= 0):
                raise ValueError(f"{name} must be positive")
            if arr.ndim and arr.shape != (len(m),):
                raise ValueError(f"{name} must be scalar or have {len(m)} entries")
        psi, w = sweep_plans(self.length)
        if self.psi_plan is None:
            object.__setattr__(self, "psi_plan", psi)
        if self.w_plan is None:
            object.__setattr__(self, "w_plan", w)
        if self.psi_plan.length != self.length or self.w_plan.length != self.length:
            raise ValueError("plan length does not match model length")

    def expected_energy(self):
        sig = np.broadcast_to(np.asarray(self.sigma, dtype=float), (len(self.lambda_map),))
        sig_t = np.broadcast_to(np.asarray(self.sigma_tilde, dtype=float), (len(self.delta_map),))
        return float(np.sum(sig**2) + np.sum(sig_t**2) + self.noise_std**2 * self.length)

    def gram(self):
        return transforms.gram(self.psi_plan, self.w_plan)


def random_map(n_atoms, length, seed):
    """Uniform random subset of ``n_atoms`` indices out of ``length``.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if not 0 <= n_atoms <= length:
        raise ValueError(f"n_atoms must be in [0, {length}], got {n_atoms}")
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(seed)
    return SignificanceMap(rng.choice(length, size=n_atoms, replace=False), length)


def synthesize(spec, rng=None):
    """Draw one signal from ``spec`` (seeded by ``spec.seed`` unless ``rng``)."""
    rng = rng_for(spec.seed) if rng is None else rng
    n = spec.length
    alpha = np.zeros(n)
    beta = np.zeros(n)
    alpha[spec.lambda_map.indices] = rng.standard_normal(len(spec.lambda_map)) * spec.sigma
    beta[spec.delta_map.indices] = rng.standard_normal(len(spec.delta_map)) * spec.sigma_tilde
    x = transforms.inverse_array(spec.psi_plan, alpha) + transforms.inverse_array(spec.w_plan, beta)
    if spec.noise_std > 0:
        x = x + spec.noise_std * rng.standard_normal(n)
    return x


class Layer(str, enum.Enum):
    WAVELET = "wavelet"
    COSINE = "cosine"


@dataclass
class SweepResult:
    """Mean/std of the estimated indices along a sweep of one layer size.

    ``sweep_variable`` is ``"M"`` (cosine atoms swept, wavelet count fixed)
    or ``"L"``. The ``i_*`` lists refer to the swept layer's index
    (tonality for M, transientness for L); ``i_other_*`` to the complement.
    """

    sweep_variable: str
    values: list
    i_true: list
    i_hat_mean: list
    i_hat_std: list
    i_other_true: list
    i_other_hat_mean: list
    i_other_hat_std: list
    realizations: int
    metadata: dict = field(default_factory=dict)

    def to_csv(self, path, comments=None):
        """Write the sweep as CSV, preceded by ``# key: value`` metadata lines."""
        with open(path, "w", newline="") as fh:
            self.to_csv_stream(fh, comments)

    def to_csv_stream(self, fh, comments=None):
        lines = dict(self.metadata)
        lines.update(comments or {})
        for key, value in lines.items():
            fh.write(f"# {key}: {value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "swept_value",
                "i_true_swept",
                "i_hat_mean",
                "i_hat_std",
                "i_other_true",
                "i_other_hat_mean",
                "i_other_hat_std",
            ]
        )
        for row in zip(
            self.values,
            self.i_true,
            self.i_hat_mean,
            self.i_hat_std,
            self.i_other_true,
            self.i_other_hat_mean,
            self.i_other_hat_std,
        ):
            writer.writerow([row[0]] + [f"{v:.9g}" for v in row[1:]])


def sweep(
    fixed_count,
    sweep_range,
    fixed_layer=Layer.WAVELET,
    realizations=10,
    noise_fraction=0.0,
    base_spec=None,
):
    """Estimated vs. true indices while one layer's atom count varies.

    ``fixed_layer="wavelet"`` keeps ``|Lambda| = fixed_count`` and sweeps
    the cosine count M; ``"cosine"`` does the converse. Noise std is set so
    that noise energy is ``noise_fraction`` times the expected signal energy.
    ``base_spec`` supplies length, stds, seed and plans (maps are ignored).
    """
    values = [int(v) for v in sweep_range]
    if not values:
        raise ValueError("empty sweep range")
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    if noise_fraction < 0:
        raise ValueError("noise_fraction must be non-negative")
    fixed_layer = Layer(fixed_layer)
    if base_spec is None:
        n = DEFAULT_SWEEP_LENGTH
        base_spec = HybridModelSpec(n, SignificanceMap.empty(n), SignificanceMap.empty(n))
    n = base_spec.length
    if fixed_count < 0 or fixed_count > n or min(values) < 0 or max(values) > n:
        raise ValueError("atom counts must lie in [0, N]")
    sig = float(base_spec.sigma)
    sig_t = float(base_spec.sigma_tilde)

    out = {k: [] for k in ("true", "mean", "std", "otrue", "omean", "ostd")}
    for point, value in enumerate(values):
        n_lam, n_dlt = (fixed_count, value) if fixed_layer is Layer.WAVELET else (value, fixed_count)
        if n_lam + n_dlt == 0:
            raise ValueError("sweep point with both layers empty")
        s = np.sqrt(noise_fraction * (sig**2 * n_lam + sig_t**2 * n_dlt) / n)
        rates = np.empty((realizations, 2))
        for r in range(realizations):
            rng = rng_for(base_spec.seed, point, r)
            spec = replace(
                base_spec,
                lambda_map=random_map(n_lam, n, rng),
                delta_map=random_map(n_dlt, n, rng),
                noise_std=float(s),
            )
            rep = measures.indices_from_signal(synthesize(spec, rng), spec.psi_plan, spec.w_plan)
            rates[r] = rep.i_tr_hat, rep.i_ton_hat
        i_tr, i_ton = n_lam / (n_lam + n_dlt), n_dlt / (n_lam + n_dlt)
        # column 0: transientness, column 1: tonality
        swept, other = (1, 0) if fixed_layer is Layer.WAVELET else (0, 1)
        truth = (i_tr, i_ton)
        out["true"].append(truth[swept])
        out["otrue"].append(truth[other])
        out["mean"].append(float(rates[:, swept].mean()))
        out["std"].append(float(rates[:, swept].std()))
        out["omean"].append(float(rates[:, other].mean()))
        out["ostd"].append(float(rates[:, other].std()))

    variable = "M" if fixed_layer is Layer.WAVELET else "L"
    metadata = {
        "sweep": f"{variable} swept, {'L' if variable == 'M' else 'M'}={fixed_count}",
        "N": n,
        "sigma": sig,
        "sigma_tilde": sig_t,
        "noise_fraction": noise_fraction,
        "realizations": realizations,
        "seed": base_spec.seed,
        "bit_generator": BIT_GENERATOR,
        "psi_plan": base_spec.psi_plan.describe(),
        "w_plan": base_spec.w_plan.describe(),
        "floor": f"{measures.RELATIVE_FLOOR:g} x mean energy",
    }
    return SweepResult(
        sweep_variable=variable,
        values=values,
        i_true=out["true"],
        i_hat_mean=out["mean"],
        i_hat_std=out["std"],
        i_other_true=out["otrue"],
        i_other_hat_mean=out["omean"],
        i_other_hat_std=out["ostd"],
        realizations=realizations,
        metadata=metadata,
    )


def monte_carlo_logdim(spec, realizations, basis=Basis.PSI, floor=None):
    """Sample mean and standard error of the log-dimension over draws of ``spec``.

    Maps stay fixed; coefficients and noise are redrawn per realization.
    """
    plan = spec.psi_plan if Basis(basis) is Basis.PSI else spec.w_plan
    samples = np.empty(realizations)
    for r in range(realizations):
        x = synthesize(spec, rng_for(spec.seed, r))
        samples[r] = measures.log_dimension(transforms.forward_array(plan, x), floor)
    se = samples.std(ddof=1) / np.sqrt(realizations) if realizations > 1 else float("nan")
    return float(samples.mean()), float(se)


def verify_lemma(spec, realizations=500):
    """Monte Carlo check of ``E[D] = -C + mean log2 sigma^2`` for a single layer.

    Returns ``(empirical_mean, theory_value, standard_error)``.
    """
    if len(spec.delta_map) or spec.noise_std != 0 or len(spec.lambda_map) != spec.length:
        raise ValueError("verify_lemma needs a full wavelet map, no cosine layer and no noise")
    sig = np.broadcast_to(np.asarray(spec.sigma, dtype=float), (spec.length,))
    mean, se = monte_carlo_logdim(spec, realizations, Basis.PSI, floor=np.finfo(float).tiny)
    theory = -measures.LOG_DIM_CONSTANT + float(np.mean(np.log2(sig**2)))
    return mean, theory, se
