import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from transtonal import measures as Me
from transtonal import simulator as S
from transtonal import transforms as T
from transtonal.measures import Basis, SignificanceMap


def model(n, lam, dlt, sigma=1.0, sigma_tilde=1.0, noise=0.0, seed=0, psi=None, w=None):
    return S.HybridModelSpec(
        n,
        lam if isinstance(lam, SignificanceMap) else SignificanceMap(lam, n),
        dlt if isinstance(dlt, SignificanceMap) else SignificanceMap(dlt, n),
        sigma=sigma,
        sigma_tilde=sigma_tilde,
        noise_std=noise,
        seed=seed,
        psi_plan=psi or T.wavelet_plan(n),
        w_plan=w or T.cosine_plan(n),
    )


@pytest.fixture(scope="module")
def gram256():
    return T.gram(T.wavelet_plan(256), T.cosine_plan(256))


@pytest.fixture(scope="module")
def gram1024():
    return T.gram(T.wavelet_plan(1024), T.cosine_plan(1024))


# ------------------------------------------------------------------ constant C


def test_constant_value():
    assert Me.LOG_DIM_CONSTANT == pytest.approx(1.832746177, abs=1e-9)
    # E[ln g^2] = digamma(1/2) + ln 2 for a standard normal g
    assert (special.digamma(0.5) + math.log(2)) / math.log(2) == pytest.approx(-Me.LOG_DIM_CONSTANT, abs=1e-12)


def test_lemma_sign_by_monte_carlo():
    rng = np.random.default_rng(2024)
    d = np.array([Me.log_dimension(rng.standard_normal(4096), floor=1e-300) for _ in range(200)])
    se = d.std(ddof=1) / math.sqrt(d.size)
    assert abs(d.mean() + Me.LOG_DIM_CONSTANT) < 3 * se
    # the positive constant is rejected by a wide margin
    assert abs(d.mean() - Me.LOG_DIM_CONSTANT) > 100 * se


# ------------------------------------------------------------ log dimension


@pytest.mark.parametrize("n", [1, 7, 64])
def test_log_dimension_constants(n):
    assert Me.log_dimension(np.ones(n), 1e-12) == 0.0
    assert Me.log_dimension(2 * np.ones(n), 1e-12) == pytest.approx(2.0)


def test_log_dimension_floor():
    assert Me.log_dimension(np.zeros(4), 0.25) == -2.0
    assert np.isfinite(Me.log_dimension(np.zeros(8)))
    with pytest.raises(ValueError):
        Me.log_dimension(np.ones(4), 0.0)
    with pytest.raises(ValueError):
        Me.log_dimension(np.ones(4), -1.0)


def test_log_dimension_accepts_coefficient_vector():
    plan = T.wavelet_plan(64)
    x = np.random.default_rng(0).standard_normal(64)
    c = T.forward(plan, x)
    assert Me.log_dimension(c, 1e-20) == Me.log_dimension(c.values, 1e-20)


@settings(max_examples=50, deadline=None)
@given(scale=st.floats(1e-6, 1e6), seed=st.integers(0, 2**31))
def test_log_dimension_scale_equivariant(scale, seed):
    x = np.random.default_rng(seed).standard_normal(256)
    assert Me.log_dimension(scale * x) == pytest.approx(Me.log_dimension(x) + 2 * math.log2(scale), abs=1e-9)


def test_size_estimate():
    assert Me.size_estimate(0) == 1
    assert Me.size_estimate(10) == 1024
    x = np.random.default_rng(3).standard_normal(512)
    d = Me.log_dimension(x)
    assert Me.size_estimate(d) == pytest.approx(math.exp(d * math.log(2)), rel=1e-12)


# ------------------------------------------------------------ index estimator


def test_zero_signal_is_degenerate():
    rep = Me.indices_from_signal(np.zeros(256), T.wavelet_plan(256), T.cosine_plan(256))
    assert rep.degenerate and rep.i_tr_hat == 0.5 and rep.i_ton_hat == 0.5


def test_report_invariants_and_scale_invariance():
    psi, w = T.wavelet_plan(512), T.cosine_plan(512)
    x = np.random.default_rng(1).standard_normal(512)
    rep = Me.indices_from_signal(x, psi, w)
    assert not rep.degenerate
    assert rep.i_tr_hat + rep.i_ton_hat == pytest.approx(1.0, abs=1e-15)
    assert 0 <= rep.i_tr_hat <= 1
    assert rep.n_hat_psi == pytest.approx(2**rep.d_psi)
    assert rep.n_hat_w == pytest.approx(2**rep.d_w)
    for a in (1e-3, 0.5, 7.0):
        other = Me.indices_from_signal(a * x, psi, w)
        assert other.i_tr_hat == pytest.approx(rep.i_tr_hat, abs=1e-9)


def test_rates_survive_underflow():
    tr, ton = Me._rates(-2000.0, -2001.0)
    assert ton == pytest.approx(2 / 3) and tr == pytest.approx(1 / 3)


def test_single_layer_extremes():
    psi, w = T.wavelet_plan(256), T.cosine_plan(256)
    tone = T.basis_vector(w, 37)
    click = T.basis_vector(psi, 200)
    assert Me.indices_from_signal(tone, psi, w).i_ton_hat > 0.99
    assert Me.indices_from_signal(click, psi, w).i_tr_hat > 0.99


def test_length_mismatch():
    with pytest.raises(ValueError):
        Me.indices_from_signal(np.ones(128), T.wavelet_plan(256), T.cosine_plan(256))


def _mean_ton(n_lam, n_dlt, realizations=10, seed=0):
    n = S.DEFAULT_SWEEP_LENGTH
    psi, w = S.sweep_plans(n)
    out = []
    for r in range(realizations):
        rng = S.rng_for(seed, n_lam, n_dlt, r)
        spec = S.HybridModelSpec(n, S.random_map(n_lam, n, rng), S.random_map(n_dlt, n, rng))
        out.append(Me.indices_from_signal(S.synthesize(spec, rng), psi, w).i_ton_hat)
    return float(np.mean(out))


def test_rates_cross_at_equal_sizes():
    assert _mean_ton(25, 1) < 0.2
    assert abs(_mean_ton(25, 25) - 0.5) < 0.15


def test_model_tonality_estimate():
    assert abs(_mean_ton(25, 100) - 0.8) <= 0.15


# ------------------------------------------------------------ true indices


@pytest.mark.parametrize("nl,nd,expected", [(25, 25, (0.5, 0.5)), (25, 75, (0.25, 0.75)), (0, 10, (0.0, 1.0))])
def test_true_indices(nl, nd, expected):
    n = 256
    got = Me.true_indices(SignificanceMap(np.arange(nl), n), SignificanceMap(np.arange(nd), n))
    assert got == pytest.approx(expected)
    assert sum(got) == pytest.approx(1.0)


def test_true_indices_empty():
    with pytest.raises(ValueError):
        Me.true_indices(SignificanceMap.empty(8), SignificanceMap.empty(8))


def test_significance_map_validation():
    m = SignificanceMap([5, 1, 3], 8)
    assert list(m.indices) == [1, 3, 5] and len(m) == 3
    with pytest.raises(ValueError):
        SignificanceMap([1, 1], 8)
    with pytest.raises(IndexError):
        SignificanceMap([8], 8)
    with pytest.raises(IndexError):
        SignificanceMap([-1], 8)


# ------------------------------------------------------------ Parseval weights


def test_weights_empty_and_full(gram256):
    assert np.all(Me.parseval_weights(gram256, SignificanceMap.empty(256)) == 0)
    np.testing.assert_allclose(Me.parseval_weights(gram256, SignificanceMap.full(256)), 1.0, atol=1e-8)
    np.testing.assert_allclose(Me.parseval_weights(gram256, SignificanceMap.full(256), Basis.W), 1.0, atol=1e-8)


def test_weights_direct_summation():
    n = 512
    g = T.gram(T.wavelet_plan(n), T.cosine_plan(n))
    dlt = S.random_map(64, n, 11)
    p = Me.parseval_weights(g, dlt, Basis.PSI)
    oracle = [sum(g[lam, d] ** 2 for d in dlt.indices) for lam in range(0, n, 37)]
    np.testing.assert_allclose(p[::37], oracle, atol=1e-13)
    assert abs(p.sum() - 64) < 1e-6
    assert p.min() >= 0 and p.max() <= 1 + 1e-12
    lam = S.random_map(40, n, 12)
    pt = Me.parseval_weights(g, lam, Basis.W)
    oracle = [sum(g[l, d] ** 2 for l in lam.indices) for d in range(0, n, 41)]
    np.testing.assert_allclose(pt[::41], oracle, atol=1e-13)
    assert abs(pt.sum() - 40) < 1e-8


def test_weights_index_error(gram256):
    with pytest.raises(IndexError):
        Me.parseval_weights(gram256[:, :128], SignificanceMap([200], 256))


def test_relative_redundancy(gram1024):
    n = 1024
    assert Me.relative_redundancy(np.zeros(n), SignificanceMap([1, 2], n)) == 0
    full = Me.parseval_weights(gram1024, SignificanceMap.full(n))
    assert Me.relative_redundancy(full, SignificanceMap([0, 9], n)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        Me.relative_redundancy(full, SignificanceMap.empty(n))
    rng = S.rng_for(4)
    eps = [
        Me.relative_redundancy(
            Me.parseval_weights(gram1024, S.random_map(25, n, rng)), S.random_map(25, n, rng)
        )
        for _ in range(10)
    ]
    assert 0.02 <= np.median(eps) <= 0.9


def test_coherence(gram256):
    assert Me.coherence(np.eye(5)) == 1.0
    c = math.sqrt(0.5)
    assert Me.coherence([[c, -c], [c, c]]) == pytest.approx(math.sqrt(2) / 2)
    assert 0 < Me.coherence(gram256) < 1


# ------------------------------------------------------------ theory


def test_exact_pure_noise():
    n = 64
    m = model(n, [], [], noise=1.0)
    assert Me.expected_logdim_exact(m, np.eye(n)) == pytest.approx(-Me.LOG_DIM_CONSTANT)


def test_exact_single_layer_per_atom_sigmas():
    n = 64
    sig = np.linspace(0.5, 3.0, n)
    m = model(n, np.arange(n), [], sigma=sig)
    g = T.gram(m.psi_plan, m.w_plan)
    expected = -Me.LOG_DIM_CONSTANT + np.mean(np.log2(sig**2))
    assert Me.expected_logdim_exact(m, g) == pytest.approx(expected, abs=1e-12)


def test_exact_zero_variance_is_minus_inf():
    m = model(16, [0], [])
    assert Me.expected_logdim_exact(m, np.eye(16)) == -math.inf


@pytest.mark.parametrize("basis", [Basis.PSI, Basis.W])
def test_exact_matches_monte_carlo(gram1024, basis):
    n = 1024
    rng = S.rng_for(3)
    m = model(n, S.random_map(25, n, rng), S.random_map(100, n, rng), seed=5)
    mean, se = S.monte_carlo_logdim(m, 500, basis)
    assert abs(mean - Me.expected_logdim_exact(m, gram1024, basis)) < 3 * se


def test_exact_matches_monte_carlo_with_noise(gram256):
    n = 256
    rng = S.rng_for(8)
    m = model(n, S.random_map(10, n, rng), S.random_map(20, n, rng), sigma=2.0, noise=0.1, seed=9)
    for basis in Basis:
        mean, se = S.monte_carlo_logdim(m, 500, basis)
        assert abs(mean - Me.expected_logdim_exact(m, gram256, basis)) < 3 * se


def test_symmetry_between_bases(gram256):
    n = 256
    rng = S.rng_for(21)
    lam, dlt = S.random_map(12, n, rng), S.random_map(30, n, rng)
    sig = rng.uniform(0.5, 2, 12)
    m = model(n, lam, dlt, sigma=sig, sigma_tilde=1.7, noise=0.2)
    swapped = model(n, dlt, lam, sigma=1.7, sigma_tilde=sig, noise=0.2)
    assert Me.expected_logdim_exact(m, gram256, Basis.W) == pytest.approx(
        Me.expected_logdim_exact(swapped, gram256.T, Basis.PSI), abs=1e-12
    )
    eq = model(n, lam, dlt, sigma=0.8, sigma_tilde=1.3)
    eq_sw = model(n, dlt, lam, sigma=1.3, sigma_tilde=0.8)
    a = Me.expected_logdim_bounds(eq, gram256, Basis.W)
    b = Me.expected_logdim_bounds(eq_sw, gram256.T, Basis.PSI)
    assert a.expected_d_lower == pytest.approx(b.expected_d_lower, abs=1e-12)
    assert a.expected_d_upper == pytest.approx(b.expected_d_upper, abs=1e-12)
    assert Me.expected_logdim_approx(eq, Basis.W) == pytest.approx(Me.expected_logdim_approx(eq_sw, Basis.PSI))


def test_bounds_collapse_when_epsilon_zero():
    n = 32
    half = np.arange(n // 2)
    m = model(n, half, half + n // 2, sigma=1.5, sigma_tilde=0.7)
    rep = Me.expected_logdim_bounds(m, np.eye(n))
    assert rep.epsilon == 0
    assert rep.expected_d_lower == rep.expected_d_upper == pytest.approx(rep.expected_d_exact)
    assert rep.expected_d_exact == pytest.approx(Me.expected_logdim_exact(m, np.eye(n)))


def test_gap_value(gram1024):
    n = 1024
    rng = S.rng_for(17)
    m = model(n, S.random_map(25, n, rng), S.random_map(60, n, rng))
    rep = Me.expected_logdim_bounds(m, gram1024)
    p = Me.parseval_weights(gram1024, m.delta_map)
    eps = p[m.lambda_map.indices].max()
    assert rep.epsilon == eps
    assert rep.gap == pytest.approx(25 / 1024 * math.log2(1 + eps), abs=1e-10)
    assert rep.constant_c == Me.LOG_DIM_CONSTANT


@settings(max_examples=30, deadline=None)
@given(
    n_lam=st.integers(8, 32),
    n_dlt=st.integers(8, 32),
    sigma=st.floats(0.2, 5.0),
    sigma_tilde=st.floats(0.2, 5.0),
    seed=st.integers(0, 2**31),
)
def test_sandwich_property(gram256, n_lam, n_dlt, sigma, sigma_tilde, seed):
    n = 256
    rng = S.rng_for(seed)
    m = model(n, S.random_map(n_lam, n, rng), S.random_map(n_dlt, n, rng), sigma=sigma, sigma_tilde=sigma_tilde)
    for basis in Basis:
        rep = Me.expected_logdim_bounds(m, gram256, basis)
        assert rep.expected_d_lower <= rep.expected_d_exact + 1e-10
        assert rep.expected_d_exact <= rep.expected_d_upper + 1e-10
        assert rep.expected_d_exact == pytest.approx(Me.expected_logdim_exact(m, gram256, basis), abs=1e-10)
        if not np.isfinite(rep.expected_d_lower):
            # an off-map atom with zero leakage pins every bound to -inf
            assert rep.expected_d_exact == rep.expected_d_upper == -math.inf
            continue
        own, ratio = (n_lam, (sigma_tilde / sigma) ** 2) if basis is Basis.PSI else (n_dlt, (sigma / sigma_tilde) ** 2)
        assert rep.gap == pytest.approx(own / n * math.log2(1 + rep.epsilon * ratio), abs=1e-10)


def test_bounds_reject_unsupported_models(gram256):
    n = 256
    with pytest.raises(Me.UnsupportedModelError):
        Me.expected_logdim_bounds(model(n, [1, 2], [3], noise=0.1), gram256)
    with pytest.raises(Me.UnsupportedModelError):
        Me.expected_logdim_bounds(model(n, [1, 2], [3], sigma=[1.0, 2.0]), gram256)
    with pytest.raises(ValueError):
        Me.expected_logdim_exact(model(n, [1], [3]), np.eye(128))


def test_approx_limits():
    n = 1024
    m = model(n, [], np.arange(64))
    assert Me.expected_logdim_approx(m) == pytest.approx(-Me.LOG_DIM_CONSTANT + math.log2(64 / n))
    with pytest.raises(ValueError):
        Me.expected_logdim_approx(model(n, [1], []))
    # noise-free terms dominate when the tonal energy beats the noise energy, and vice versa
    quiet = model(n, np.arange(4), np.arange(64), noise=1e-4)
    assert Me.expected_logdim_approx(quiet) == pytest.approx(
        Me.expected_logdim_approx(model(n, np.arange(4), np.arange(64))), abs=1e-4
    )
    loud = model(n, np.arange(4), np.arange(64), noise=10.0)
    assert Me.expected_logdim_approx(loud) == pytest.approx(-Me.LOG_DIM_CONSTANT + math.log2(100.0), abs=0.01)


def test_approx_vs_exact_sparse_regime(gram1024, record_property):
    n = 1024
    rng = S.rng_for(99)
    devs = []
    for _ in range(20):
        m = model(
            n,
            S.random_map(int(rng.integers(16, n // 16 + 1)), n, rng),
            S.random_map(int(rng.integers(16, n // 16 + 1)), n, rng),
        )
        exact = Me.expected_logdim_exact(m, gram1024)
        approx = Me.expected_logdim_approx(m)
        assert np.isfinite(exact) and np.isfinite(approx)
        devs.append(abs(exact - approx))
    record_property("max_abs_deviation_bits", max(devs))
    print(f"approx vs exact: max |deviation| = {max(devs):.3f} bits over 20 models")
