"""Command-line interface: ``transtonal {analyze,sweep,verify,weights,castanet}``.

Exit codes: 0 success, 1 I/O or format error, 2 bad arguments,
3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import __version__, analyzer, measures, simulator, transforms, wavio
from ._backend import NAME as BACKEND
from .measures import Basis, SignificanceMap

EXIT_OK, EXIT_IO, EXIT_ARGS, EXIT_VERIFY = 0, 1, 2, 3


class ArgumentError(Exception):
    pass


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    def _get_help_string(self, action):
        if action.default is None:
            return action.help
        return super()._get_help_string(action)


def _pow2(text):
    v = int(text)
    if v < 2 or v & (v - 1):
        raise argparse.ArgumentTypeError(f"{text} is not a power of two >= 2")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"{text} must be non-negative")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return v


def _plans(n, args, default_block):
    try:
        psi = transforms.wavelet_plan(n, args.filter, args.levels)
        w = transforms.cosine_plan(n, args.block if args.block is not None else default_block)
    except transforms.InvalidPlanError as exc:
        raise ArgumentError(str(exc)) from exc
    return psi, w


def _header(args, **extra):
    meta = {"transtonal": __version__, "kernels": BACKEND}
    meta.update(extra)
    return meta


def _add_plan_args(p, block_help, wavelet_filter="db4"):
    p.add_argument("--filter", default=wavelet_filter, help="wavelet filter: haar or dbK")
    p.add_argument("--levels", type=int, default=None, help="wavelet levels J (default: log2(N)-2)")
    p.add_argument("--block", type=_pow2, default=None, help=block_help)


def _parse_range(text):
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            values = list(range(lo, hi + 1))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ArgumentError(f"invalid --range {text!r}; use LO:HI or a comma list") from exc
    if not values:
        raise ArgumentError(f"--range {text!r} is empty")
    return values


# --------------------------------------------------------------------- analyze


def cmd_analyze(args):
    try:
        buf = analyzer.load_audio(args.input)
    except ValueError as exc:
        raise wavio.WavError(f"{args.input}: {exc}") from exc
    frame = args.frame
    if frame > len(buf):
        raise ArgumentError(f"--frame {frame} exceeds the {len(buf)} samples in {args.input}")
    psi, w = _plans(frame, args, None)
    tl = analyzer.analyze(buf, frame, args.hop, psi, w)
    meta = _header(
        args,
        input=args.input,
        sample_rate=buf.sample_rate,
        frame=frame,
        hop=tl.hop,
        psi_plan=psi.describe(),
        w_plan=w.describe(),
        floor=f"{measures.RELATIVE_FLOOR:g} x frame mean energy",
        silence_energy=analyzer.SILENCE_ENERGY,
    )
    if args.out:
        analyzer.export_csv(tl, args.out, meta)
    itr = tl.column("i_tr_hat")
    live = ~tl.column("degenerate").astype(bool)
    print(f"frames: {len(tl)} ({int((~live).sum())} degenerate)")
    print(f"mean i_tr: {itr[live].mean():.6f}" if live.any() else "mean i_tr: n/a (all frames degenerate)")
    # zero padding makes the partial frame's edge look transient, so it is not ranked
    full = live & ~np.array([e.partial for e in tl.entries], dtype=bool)
    if full.any():
        order = sorted(np.flatnonzero(full), key=lambda i: (-itr[i], i))
        print(f"max i_tr frame: t={tl.entries[order[0]].start_time:.6f} s (i_tr={itr[order[0]]:.6f})")
        print(f"top {min(args.top, len(order))} frames by i_tr:")
        for i in order[: args.top]:
            print(f"  t={tl.entries[i].start_time:.6f} s  i_tr={itr[i]:.6f}")
    return EXIT_OK


# ----------------------------------------------------------------------- sweep


def cmd_sweep(args):
    try:
        layer, count = args.fixed.split("=")
        count = int(count)
    except ValueError as exc:
        raise ArgumentError(f"invalid --fixed {args.fixed!r}; use L=<count> or M=<count>") from exc
    layer = layer.strip().upper()
    if layer not in ("L", "M"):
        raise ArgumentError("--fixed must name L (wavelet atoms) or M (cosine atoms)")
    values = _parse_range(args.range)
    n = args.n
    if count < 0 or count > n or min(values) < 0 or max(values) > n:
        raise ArgumentError(f"atom counts must lie in [0, {n}]")
    if count == 0 and 0 in values:
        raise ArgumentError("a sweep point would have both layers empty")
    psi, w = _plans(n, args, n // 2)
    base = simulator.HybridModelSpec(
        n,
        SignificanceMap.empty(n),
        SignificanceMap.empty(n),
        sigma=args.sigma,
        sigma_tilde=args.sigma_tilde,
        seed=args.seed,
        psi_plan=psi,
        w_plan=w,
    )
    res = simulator.sweep(
        count,
        values,
        fixed_layer="wavelet" if layer == "L" else "cosine",
        realizations=args.realizations,
        noise_fraction=args.noise,
        base_spec=base,
    )
    extra = {"transtonal": __version__}
    if args.out in (None, "-"):
        buf = io.StringIO()
        res.to_csv_stream(buf, extra)
        sys.stdout.write(buf.getvalue())
    else:
        res.to_csv(args.out, extra)
        print(f"wrote {len(values)} sweep points to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------- verify


def _check_transforms(n, rng):
    worst_rt = worst_en = 0.0
    for plan in (transforms.wavelet_plan(n), transforms.cosine_plan(n)):
        x = rng.standard_normal((20, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        c = transforms.forward_array(plan, x)
        worst_rt = max(worst_rt, np.max(np.abs(transforms.inverse_array(plan, c) - x)))
        worst_en = max(worst_en, np.max(np.abs(np.sum(c**2, axis=1) - 1.0)))
    return worst_rt < 1e-10 and worst_en < 1e-9, f"round-trip {worst_rt:.2e}, energy {worst_en:.2e}"


def _check_weights(gram, n, rng, trials):
    lo, hi, worst = np.inf, -np.inf, 0.0
    for _ in range(trials):
        m = simulator.random_map(int(rng.integers(1, n // 8 + 1)), n, rng)
        for direction in (Basis.PSI, Basis.W):
            p = measures.parseval_weights(gram, m, direction)
            lo, hi = min(lo, p.min()), max(hi, p.max())
            worst = max(worst, abs(p.sum() - len(m)))
    ok = lo >= -1e-12 and hi <= 1 + 1e-12 and worst < 1e-6
    return ok, f"weights in [{lo:.3g}, {hi:.6f}], sum error {worst:.2e}"


def _check_lemma(n, realizations, seed):
    full, empty = SignificanceMap.full(n), SignificanceMap.empty(n)
    lines, ok = [], True
    for sigma in (1.0, 2.0):
        spec = simulator.HybridModelSpec(
            n, full, empty, sigma=sigma, seed=seed,
            psi_plan=transforms.wavelet_plan(n), w_plan=transforms.cosine_plan(n),
        )
        mean, theory, se = simulator.verify_lemma(spec, realizations)
        ok &= abs(mean - theory) <= 3 * se
        lines.append(f"sigma={sigma:g}: {mean:.4f} vs {theory:.4f} (se {se:.4f})")
    return ok, "; ".join(lines)


def _draw_finite_model(n, theory_gram, psi, w, rng, attempts=100):
    """Random equal-variance model whose bounds are finite in both bases.

    Returns ``(spec, reports, rejected)``; ``spec`` is None if every
    attempt left some coefficient with zero variance.
    """
    # dense enough that most draws give every coefficient positive variance
    lo_size, hi_size = max(1, n // 32), max(1, n // 8)
    for rejected in range(attempts):
        spec = simulator.HybridModelSpec(
            n,
            simulator.random_map(int(rng.integers(lo_size, hi_size + 1)), n, rng),
            simulator.random_map(int(rng.integers(lo_size, hi_size + 1)), n, rng),
            sigma=float(rng.uniform(0.5, 2.0)),
            sigma_tilde=float(rng.uniform(0.5, 2.0)),
            seed=int(rng.integers(2**31)),
            psi_plan=psi,
            w_plan=w,
        )
        reports = {b: measures.expected_logdim_bounds(spec, theory_gram, b) for b in (Basis.PSI, Basis.W)}
        if all(np.isfinite([r.expected_d_lower, r.expected_d_upper]).all() for r in reports.values()):
            return spec, reports, rejected
    return None, None, attempts


def _check_sandwich(n, theory_gram, psi, w, rng, models, realizations):
    worst_slack, worst_gap, mc_ok = np.inf, 0.0, True
    worst_z = 0.0
    rejected = 0
    for k in range(models):
        spec, reports, skipped = _draw_finite_model(n, theory_gram, psi, w, rng)
        rejected += skipped
        if spec is None:
            return False, "no model with finite bounds found (some coefficient always has zero variance)"
        for basis, rep in reports.items():
            worst_slack = min(worst_slack, rep.expected_d_exact - rep.expected_d_lower,
                              rep.expected_d_upper - rep.expected_d_exact)
            n_own = len(spec.lambda_map if basis is Basis.PSI else spec.delta_map)
            ratio = (spec.sigma_tilde / spec.sigma) ** 2 if basis is Basis.PSI else (spec.sigma / spec.sigma_tilde) ** 2
            gap = n_own / n * np.log2(1 + rep.epsilon * ratio)
            worst_gap = max(worst_gap, abs(rep.gap - gap))
            if k < 2:
                mean, se = simulator.monte_carlo_logdim(spec, realizations, basis)
                lo, hi = rep.expected_d_lower - 3 * se, rep.expected_d_upper + 3 * se
                mc_ok &= lo <= mean <= hi
                worst_z = max(worst_z, max(rep.expected_d_lower - mean, mean - rep.expected_d_upper, 0.0) / se)
    ok = worst_slack >= -1e-10 and worst_gap < 1e-10 and bool(mc_ok)
    return ok, (
        f"min slack {worst_slack:.3e}, gap error {worst_gap:.1e}, "
        f"Monte Carlo outside bounds by {worst_z:.2f} se ({rejected} zero-variance draws redrawn)"
    )


def cmd_verify(args):
    n = args.n
    realizations = 100 if args.fast else args.realizations
    models = 5 if args.fast else 20
    rng = np.random.default_rng(args.seed)
    psi, w = transforms.wavelet_plan(n), transforms.cosine_plan(n)
    gram = transforms.gram(psi, w)
    theory_gram = gram
    if args.corrupt_plan:
        # negative control: theory evaluated for a different wavelet basis
        theory_gram = transforms.gram(transforms.wavelet_plan(n, "haar"), w)
    print(f"# verify N={n} realizations={realizations} models={models} seed={args.seed} kernels={BACKEND}")
    checks = [
        ("orthonormality", lambda: _check_transforms(n, rng)),
        ("parseval weights", lambda: _check_weights(gram, n, rng, models)),
        ("lemma monte carlo", lambda: _check_lemma(n, realizations, args.seed)),
        ("theorem sandwich", lambda: _check_sandwich(n, theory_gram, psi, w, rng, models, realizations)),
    ]
    all_ok = True
    for name, fn in checks:
        ok, detail = fn()
        all_ok &= bool(ok)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all_ok else EXIT_VERIFY


# --------------------------------------------------------------------- weights


def cmd_weights(args):
    n = args.n
    if not 0 <= args.lam <= n or not 0 <= args.delta <= n:
        raise ArgumentError(f"--lambda and --delta must lie in [0, {n}]")
    psi, w = _plans(n, args, None)
    gram = transforms.gram(psi, w)
    rng = simulator.rng_for(args.seed)
    lam = simulator.random_map(args.lam, n, rng)
    dlt = simulator.random_map(args.delta, n, rng)
    p = measures.parseval_weights(gram, dlt, Basis.PSI)
    pt = measures.parseval_weights(gram, lam, Basis.W)
    eps = measures.relative_redundancy(p, lam) if len(lam) else float("nan")
    eps_t = measures.relative_redundancy(pt, dlt) if len(dlt) else float("nan")
    print(f"# weights N={n} |Lambda|={len(lam)} |Delta|={len(dlt)} seed={args.seed}")
    print(f"# psi_plan={psi.describe()} w_plan={w.describe()}")
    for name, v in (("p_lambda(Delta)", p), ("p~_delta(Lambda)", pt)):
        print(f"{name}: min={v.min():.6g} mean={v.mean():.6g} max={v.max():.6g} sum={v.sum():.6g}")
    print(f"epsilon(Delta): {eps:.6g}")
    print(f"epsilon~(Lambda): {eps_t:.6g}")
    print(f"coherence: {measures.coherence(gram):.6g}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            for key, value in _header(args, N=n, n_lambda=len(lam), n_delta=len(dlt), seed=args.seed,
                                      psi_plan=psi.describe(), w_plan=w.describe()).items():
                fh.write(f"# {key}: {value}\n")
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["index", "p_psi", "p_w", "in_lambda", "in_delta"])
            lm, dm = lam.mask(), dlt.mask()
            for i in range(n):
                wr.writerow([i, f"{p[i]:.9g}", f"{pt[i]:.9g}", int(lm[i]), int(dm[i])])
    return EXIT_OK


# -------------------------------------------------------------------- castanet


def cmd_castanet(args):
    buf, _ = analyzer.castanet_like(args.duration, args.rate)
    wavio.write_wav(args.out, buf.samples, buf.sample_rate)
    print(f"wrote {len(buf)} samples to {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="transtonal",
        description="Transientness and tonality indices from wavelet/local-cosine log-dimensions.",
        formatter_class=_HelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = _HelpFormatter

    p = sub.add_parser("analyze", help="framewise indices of a WAV file", formatter_class=fmt)
    p.add_argument("--in", dest="input", required=True, help="input WAV file")
    p.add_argument("--out", default=None, help="timeline CSV path")
    p.add_argument("--frame", type=_pow2, default=analyzer.DEFAULT_FRAME, help="frame length in samples")
    p.add_argument("--hop", type=_pos_int, default=None, help="hop in samples (default: frame length)")
    p.add_argument("--top", type=_pos_int, default=10, help="frames listed in the i_tr ranking")
    _add_plan_args(p, "local cosine block length (default: frame/8)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="index estimates vs. layer size on the synthetic model", formatter_class=fmt)
    p.add_argument("--fixed", default="L=25", help="fixed layer and count, L=<wavelet atoms> or M=<cosine atoms>")
    p.add_argument("--range", default="1:150", help="swept counts, LO:HI (inclusive) or comma list")
    p.add_argument("--realizations", type=_pos_int, default=10, help="realizations per point")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--noise", type=_nonneg_float, default=0.0, help="noise energy as a fraction of signal energy")
    p.add_argument("--n", type=_pow2, default=simulator.DEFAULT_SWEEP_LENGTH, help="signal length N")
    p.add_argument("--sigma", type=float, default=1.0, help="wavelet coefficient std")
    p.add_argument("--sigma-tilde", type=float, default=1.0, help="cosine coefficient std")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    _add_plan_args(p, "local cosine block length (default: N/2)", simulator.SWEEP_FILTER)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the invariant checks", formatter_class=fmt)
    p.add_argument("--n", type=_pow2, default=512, help="signal length N")
    p.add_argument("--realizations", type=_pos_int, default=500, help="Monte Carlo realizations")
    p.add_argument("--fast", action="store_true", help="100 realizations, 5 models")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--corrupt-plan", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("weights", help="Parseval weights, redundancies and coherence", formatter_class=fmt)
    p.add_argument("--n", type=_pow2, default=1024, help="signal length N")
    p.add_argument("--lambda", dest="lam", type=int, default=25, help="wavelet map size")
    p.add_argument("--delta", type=int, default=25, help="cosine map size")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--csv", default=None, help="optional CSV dump of both weight vectors")
    _add_plan_args(p, "local cosine block length (default: N/8)")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("castanet", help="write the synthetic castanet-like test WAV", formatter_class=fmt)
    p.add_argument("--out", required=True, help="output WAV path")
    p.add_argument("--duration", type=float, default=3.0, help="seconds")
    p.add_argument("--rate", type=_pos_int, default=44100, help="sample rate in Hz")
    p.set_defaults(func=cmd_castanet)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ArgumentError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (OSError, wavio.WavError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
