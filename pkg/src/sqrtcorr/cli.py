"""Command-line entry point: ``sqrtcorr <subcommand> [options]``.

Every subcommand writes CSV data plus a ``manifest.json`` into ``--out``
(default: $SQRTCORR_OUT or the current directory).  CSV files start with a
``#``-prefixed JSON line holding the run parameters.

Exit codes: 0 success, 2 usage or domain error, 3 failed verification.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, InsufficientDataError
from .intervals import Box, Interval

log = logging.getLogger("sqrtcorr")

EXIT_OK, EXIT_DOMAIN, EXIT_VERIFY = 0, 2, 3


class VerificationFailed(Exception):
    pass


class Run:
    """Collects outputs for one invocation and writes the manifest."""

    def __init__(self, command: str, params: dict, out: Path, seed=None):
        self.command = command
        self.params = params
        self.seed = seed
        self.out = out
        self.files: dict[str, str] = {}
        self.t0 = time.perf_counter()

    def header(self) -> dict:
        return {"command": self.command, "params": self.params, "seed": self.seed, "version": __version__}

    def write_csv(self, name: str, columns: list[str], rows, extra: dict | None = None) -> Path:
        meta = self.header()
        if extra:
            meta.update(extra)
        lines = ["# " + json.dumps(meta, sort_keys=True), ",".join(columns)]
        lines += [",".join(_fmt(x) for x in row) for row in rows]
        return self.write_text(name, "\n".join(lines) + "\n")

    def write_text(self, name: str, text: str, path: Path | None = None) -> Path:
        path = path or self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        path.write_bytes(data)
        self.files[str(path.name)] = hashlib.sha256(data).hexdigest()
        return path

    def finish(self, manifest_path: Path | None = None) -> None:
        manifest = self.header()
        manifest["wall_time_s"] = round(time.perf_counter() - self.t0, 6)
        manifest["outputs"] = self.files
        path = manifest_path or self.out / "manifest.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _interval_arg(text: str) -> Interval:
    try:
        a, b = (float(p) for p in text.replace(":", ",").split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from exc
    return Interval(a, b)


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p]


def _box_arg(text: str) -> Box:
    try:
        return Box.from_json(json.loads(text))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad --box {text!r}: {exc}") from exc


def _sequence(args):
    from .seq import generate, generate_alpha_power

    if args.alpha is not None and args.alpha != 0.5:
        return generate_alpha_power(args.t, args.alpha)
    return generate(args.t, args.c)


def _sampler(args):
    from .stats import AlphaSampler

    if args.mode == "random":
        return AlphaSampler("seeded_uniform_random", args.samples, seed=args.seed)
    return AlphaSampler("uniform_grid", args.samples)


def _test_function(args):
    from .stats import TestFunction

    if args.f == "indicator":
        return TestFunction.indicator(args.a, args.b)
    return TestFunction.triangle(half_width=(args.b - args.a) / 2, center=(args.a + args.b) / 2)


def cmd_gen(args, run: Run):
    from .seq import write_sequence

    seq = _sequence(args)
    target = Path(args.out)
    if target.is_dir() or str(args.out).endswith(("/", os.sep)):
        path = target / "sequence.txt"
        manifest = target / "manifest.json"
    else:
        path = target
        manifest = target.with_name(target.name + ".manifest.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_sequence(seq, path)
    run.files[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    run.finish(manifest)
    return EXIT_OK


def cmd_gaps(args, run: Run):
    from .stats import histogram, ks_exponential, scaled_gaps

    seq = _sequence(args)
    gaps = scaled_gaps(seq)
    lo, hi = args.range
    hist = histogram(gaps, args.bins, (lo, hi))
    rows = [(l, r, d, math.exp(-(l + r) / 2)) for l, r, d in hist]
    run.write_csv("gaps.csv", ["bin_left", "bin_right", "density", "exp_density"], rows,
                  {"N": seq.N, "ks_exponential": ks_exponential(gaps)})
    return EXIT_OK


def cmd_paircorr(args, run: Run):
    from .stats import TestFunction, pair_correlation

    seq = _sequence(args)
    f = _test_function(args)
    rows = [(args.a, args.b, pair_correlation(seq, f), f.integral())]
    if args.profile_bins:
        edges = np.linspace(args.a, args.b, args.profile_bins + 1)
        for l, r in zip(edges[:-1], edges[1:]):
            g = TestFunction.indicator(l, r, closed_right=False)
            rows.append((l, r, pair_correlation(seq, g), r - l))
    run.write_csv("paircorr.csv", ["a", "b", "R2", "poisson"], rows, {"N": seq.N, "f": f.describe()})
    return EXIT_OK


def cmd_countdist(args, run: Run):
    from .stats import empirical_count_distribution

    seq = _sequence(args)
    dist = empirical_count_distribution(seq, args.box, _sampler(args))
    cols = [f"k{j + 1}" for j in range(dist.m)] + ["frequency", "probability"]
    run.write_csv("countdist.csv", cols, dist.rows(), {"N": seq.N, "box": args.box.to_json()})
    return EXIT_OK


def cmd_moments(args, run: Run):
    from .stats import _moment_from_counts, window_count_matrix

    seq = _sequence(args)
    alphas, w = _sampler(args).draw(default_samples=seq.N)
    k = window_count_matrix(seq, args.box, alphas)
    svec = args.s
    if len(svec) == 1 and args.box.m > 1:
        svec = svec * args.box.m
    rows = [("inf", _moment_from_counts(k, w, svec, None))]
    for K in args.K or []:
        rows.append((K, _moment_from_counts(k, w, svec, K)))
    run.write_csv("moments.csv", ["K", "moment"], rows, {"N": seq.N, "box": args.box.to_json(), "s": svec})
    return EXIT_OK


def cmd_lattice_sim(args, run: Run):
    from .lattice import limit_process_distribution

    dist = limit_process_distribution(args.box, args.samples, args.seed, c=args.c, threads=args.threads)
    cols = [f"k{j + 1}" for j in range(dist.m)] + ["frequency", "probability"]
    run.write_csv("lattice_sim.csv", cols, dist.rows(), {"box": args.box.to_json()})
    return EXIT_OK


def cmd_siegel_check(args, run: Run):
    from .lattice import siegel_moment_check

    res = siegel_moment_check(args.i1, args.i2, args.samples, args.seed, threads=args.threads)
    z1, z2 = res.z_scores()
    rows = [
        ("second_moment", res.second_moment, res.second_moment_se, res.second_moment_target, z1),
        ("cross_moment", res.cross_moment, res.cross_moment_se, res.cross_moment_target, z2),
    ]
    run.write_csv("siegel.csv", ["quantity", "estimate", "jackknife_se", "target", "z"], rows)
    if max(abs(z1), abs(z2)) > args.z_max:
        raise VerificationFailed(f"Siegel moments off by more than {args.z_max} standard errors")
    return EXIT_OK


def cmd_escape_mass(args, run: Run):
    from .cusp import CuspFunction, escape_mass_integral, zeroth_fourier_coefficient
    from .stats import TestFunction

    f = None if args.f == "none" else TestFunction.triangle(half_width=args.f_width)
    rows = []
    for R in args.r_sweep:
        cf = CuspFunction(R=R, beta=args.beta, f=f)
        val = escape_mass_integral(args.v, cf, args.eta, args.theta)
        zero = 2 * zeroth_fourier_coefficient(args.v, R, args.beta) if args.beta < 1 else float("nan")
        rows.append((R, val, zero, val * R ** (1 - args.beta)))
    run.write_csv("escape_mass.csv", ["R", "integral", "F_bar_integral", "integral_times_R^(1-beta)"], rows)
    return EXIT_OK


def cmd_gauss_check(args, run: Run):
    from .numth import gauss_sum_closed_signed, gauss_sum_direct

    rows, worst = [], 0.0
    for c in range(1, args.c_max + 1):
        for n in range(-args.n_max, args.n_max + 1):
            if n == 0 or math.gcd(n, 4 * c) != 1:
                continue
            err = abs(gauss_sum_direct(n, c) - gauss_sum_closed_signed(n, c))
            worst = max(worst, err)
            rows.append((c, n, err))
    rng = np.random.default_rng(args.seed)
    for _ in range(args.random):
        c = int(rng.integers(1, args.random_c_max + 1))
        n = int(rng.integers(1, 10**6)) | 1
        while math.gcd(n, 4 * c) != 1:
            n += 2
        err = abs(gauss_sum_direct(n, c) - gauss_sum_closed_signed(n, c))
        worst = max(worst, err)
        rows.append((c, n, err))
    run.write_csv("gauss_check.csv", ["c", "n", "abs_error"], rows, {"max_abs_error": worst})
    if worst > args.tol:
        raise VerificationFailed(f"Gauss sum identity off by {worst:.3g}")
    return EXIT_OK


def cmd_lemma_check(args, run: Run):
    from .numth import lemma_bound_report, lemma_envelope_check
    from .stats import TestFunction

    f = TestFunction.triangle()
    rows = lemma_bound_report(args.d_grid, args.t_grid, f, eps=args.eps, eps1=args.eps, eps2=args.eps)
    c_rest, c_quarter, ok = lemma_envelope_check(rows)
    run.write_csv(
        "lemma_check.csv",
        ["D", "T", "S", "bound1", "bound2", "ratio1", "ratio2", "ratio"],
        [(r.D, r.T, r.S, r.bound1, r.bound2, r.ratio1, r.ratio2, r.ratio) for r in rows],
        {"max_ratio_rest": c_rest, "max_ratio_top_right": c_quarter},
    )
    if not ok:
        raise VerificationFailed("ratio grows on the top-right quarter of the grid")
    return EXIT_OK


def cmd_figures(args, run: Run):
    from .seq import generate, generate_alpha_power
    from .stats import TestFunction, histogram, ks_exponential, pair_correlation, scaled_gaps

    for name, seq in (("fig1_gaps_cuberoot.csv", generate_alpha_power(args.t, 1 / 3)),
                      ("fig2_gaps_sqrt.csv", generate(args.t))):
        gaps = scaled_gaps(seq)
        hist = histogram(gaps, args.bins, (0.0, args.gap_max))
        rows = [((l + r) / 2, d, math.exp(-(l + r) / 2)) for l, r, d in hist]
        run.write_csv(name, ["s", "density", "exp_density"], rows, {"N": seq.N, "ks_exponential": ks_exponential(gaps)})
    seq = generate(args.t_pair)
    edges = np.linspace(0.0, args.pair_max, args.pair_bins + 1)
    rows = []
    for l, r in zip(edges[:-1], edges[1:]):
        g = TestFunction.indicator(l, r, closed_right=False)
        rows.append(((l + r) / 2, pair_correlation(seq, g) / (r - l), 1.0))
    run.write_csv("fig3_paircorr_sqrt.csv", ["s", "density", "poisson_density"], rows, {"N": seq.N})
    return EXIT_OK


def _add_seq_args(p, t_default=None):
    p.add_argument("--t", type=int, required=t_default is None, default=t_default, help="cutoff T")
    p.add_argument("--c", type=float, default=0.0, help="lower cutoff c in [0,1)")
    p.add_argument("--alpha", type=float, default=None, help="use n**alpha instead of sqrt(n)")


def _add_sampler_args(p):
    p.add_argument("--samples", type=int, default=0, help="number of shifts (default N)")
    p.add_argument("--mode", choices=("grid", "random"), default="grid")
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqrtcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=os.environ.get("SQRTCORR_OUT", "."), help="output directory")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write the sorted fractional parts")
    _add_seq_args(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("gaps", parents=[common], help="scaled gap histogram")
    _add_seq_args(p)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--range", type=float, nargs=2, default=(0.0, 3.0))
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("paircorr", parents=[common], help="two-point correlation R2_N(f)")
    _add_seq_args(p)
    p.add_argument("--f", choices=("indicator", "triangle"), default="indicator")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--profile-bins", type=int, default=0)
    p.set_defaults(func=cmd_paircorr)

    p = sub.add_parser("countdist", parents=[common], help="empirical law of window counts")
    _add_seq_args(p)
    p.add_argument("--box", type=_box_arg, default=Box([(0.0, 1.0)]))
    _add_sampler_args(p)
    p.set_defaults(func=cmd_countdist)

    p = sub.add_parser("moments", parents=[common], help="mixed and restricted moments")
    _add_seq_args(p)
    p.add_argument("--box", type=_box_arg, default=Box([(0.0, 1.0)]))
    p.add_argument("--s", type=_float_list, default=[2.0])
    p.add_argument("--K", type=int, action="append")
    _add_sampler_args(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("lattice-sim", parents=[common], help="random affine lattice counts")
    p.add_argument("--box", type=_box_arg, default=Box([(0.0, 1.0)]))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=float, default=0.0)
    p.set_defaults(func=cmd_lattice_sim)

    p = sub.add_parser("siegel-check", parents=[common], help="second/cross moment identities")
    p.add_argument("--i1", type=_interval_arg, default=Interval(0.0, 1.0))
    p.add_argument("--i2", type=_interval_arg, default=Interval(0.5, 1.5))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--z-max", type=float, default=3.0)
    p.set_defaults(func=cmd_siegel_check)

    p = sub.add_parser("escape-mass", parents=[common], help="horocycle integrals of F_{R,beta}")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--v", type=float, default=1e-4)
    p.add_argument("--r-sweep", type=_float_list, default=[4.0, 16.0, 64.0])
    p.add_argument("--f", choices=("triangle", "none"), default="triangle")
    p.add_argument("--f-width", type=float, default=1.0)
    p.set_defaults(func=cmd_escape_mass)

    p = sub.add_parser("gauss-check", parents=[common], help="Gauss sum closed form vs direct sum")
    p.add_argument("--c-max", type=int, default=50)
    p.add_argument("--n-max", type=int, default=99)
    p.add_argument("--random", type=int, default=0)
    p.add_argument("--random-c-max", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_gauss_check)

    p = sub.add_parser("lemma-check", parents=[common], help="coprime sum S against its bounds")
    p.add_argument("--d-grid", type=_float_list, default=[2.0**k for k in range(1, 9)])
    p.add_argument("--t-grid", type=_float_list, default=[2.0**k for k in range(1, 11)])
    p.add_argument("--eps", type=float, default=0.1)
    p.set_defaults(func=cmd_lemma_check)

    p = sub.add_parser("figures", parents=[common], help="datasets behind the gap and correlation plots")
    p.add_argument("--t", type=int, default=200_000)
    p.add_argument("--t-pair", type=int, default=2000)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--gap-max", type=float, default=3.0)
    p.add_argument("--pair-bins", type=int, default=40)
    p.add_argument("--pair-max", type=float, default=4.0)
    p.set_defaults(func=cmd_figures)
    return parser


def _params(args) -> dict:
    skip = {"func", "command", "out", "verbose"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, Box):
            v = v.to_json()
        elif isinstance(v, Interval):
            v = [v.left, v.right]
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    out = Path(args.out)
    if args.command != "gen":
        out.mkdir(parents=True, exist_ok=True)
    run_ = Run(args.command, _params(args), out, seed=getattr(args, "seed", None))
    try:
        code = args.func(args, run_)
    except (DomainError, InsufficientDataError) as exc:
        print(f"sqrtcorr {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except VerificationFailed as exc:
        print(f"sqrtcorr {args.command}: verification failed: {exc}", file=sys.stderr)
        run_.finish()
        return EXIT_VERIFY
    if args.command != "gen":
        run_.finish()
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
