"""Command-line front end.

Subcommands ``kernel``, ``oracle-check``, ``sweep`` and ``sample`` each write
their output files plus a ``<output>.manifest.json`` recording the command,
parameters, seed, truncation sizes, tool version and SHA-256 digests of the
outputs.

Exit codes: 0 ok, 2 usage or validation error, 3 numerical failure,
4 a check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, kernels, limits, oracle
from .measures import PlancherelParam, measure_from_json
from .operators import EigenConvergenceError, KernelMatrix, SpectralGapError, Window

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_CHECK_FAILED = 4


class UsageError(Exception):
    pass


def _workers() -> int:
    raw = os.environ.get("DPP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"DPP_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"DPP_THREADS must be a positive integer, got {raw!r}")
    return n


def _floats(text: str) -> list[float]:
    vals = [float(Fraction(t)) for t in text.split(",") if t.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _half_integers(text: str) -> list[Fraction]:
    """``-7/2,1/2`` or a range ``-7/2:7/2`` (step 1)."""
    if ":" in text:
        lo, hi = (Fraction(t) for t in text.split(":"))
        if (2 * lo).denominator != 1 or lo.denominator == 1 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad half-integer range {text!r}")
        return [lo + k for k in range(int(hi - lo) + 1)]
    pts = [Fraction(t) for t in text.split(",") if t.strip()]
    if not pts:
        raise argparse.ArgumentTypeError("empty point list")
    return pts


def _add_measure_args(p: argparse.ArgumentParser, plancherel: bool = True, theta_grid: bool = False):
    choices = ["principal", "complementary", "degenerate1", "degenerate2"] + (["plancherel"] if plancherel else [])
    g = p.add_argument_group("measure parameters")
    g.add_argument("--series", choices=choices, help="parameter series of the measure")
    g.add_argument("--a", type=float, help="principal series: z = a + ib")
    g.add_argument("--b", type=float, help="principal series: z = a + ib")
    g.add_argument("--z", type=float, help="complementary series: z")
    g.add_argument("--z-prime", type=float, help="complementary series: z'")
    g.add_argument("--N", type=int, help="degenerate series: z = N")
    g.add_argument("--c", type=float, help="first degenerate series: z' = N + c - 1; sine kernel: c in (-1, 1)")
    g.add_argument("--N-prime", type=int, help="second degenerate series: z' = -N'")
    g.add_argument("--xi", type=float, help="xi parameter")
    if theta_grid:
        g.add_argument("--theta", type=_floats, help="theta value (bessel) or comma-separated grid (sine, airy)")
    else:
        g.add_argument("--theta", type=float, help="Plancherel / Bessel parameter")


def _measure(args, need_xi: bool = True):
    series = args.series
    if series is None:
        raise UsageError("--series is required")
    fields = {
        "principal": ("a", "b"),
        "complementary": ("z", "z_prime"),
        "degenerate1": ("N", "c"),
        "degenerate2": ("N", "N_prime"),
        "plancherel": ("theta",),
    }[series]
    if series != "plancherel" and need_xi:
        fields = fields + ("xi",)
    data = {"series": series}
    for f in fields:
        v = getattr(args, f)
        if v is None:
            raise UsageError(f"--{f.replace('_', '-')} is required for the {series} series")
        data[f] = v
    if not need_xi:
        data["xi"] = 0.5
    try:
        return measure_from_json(data)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


_ARGV: list[str] = []


def _write_manifest(output: Path, command: str, params: dict, outputs: list[Path], seed=None, truncation=None, extra=None) -> Path:
    manifest = {
        "command": command,
        "argv": list(_ARGV),
        "params": params,
        "seed": seed,
        "truncation": truncation,
        "version": __version__,
        "outputs": {str(p.name): _digest(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    path = output.with_name(output.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# -- kernel --------------------------------------------------------------------


def cmd_kernel(args) -> int:
    if args.window < 1:
        raise UsageError("--window must be positive")
    kind = args.kind
    truncation = None
    if kind == "sine":
        if args.c is None:
            raise UsageError("--c is required for the sine kernel")
        if not -1 < args.c < 1:
            raise UsageError("--c must lie in (-1, 1)")
        sites = np.arange(-args.window, args.window + 1)
        K = KernelMatrix(2 * sites, kernels.sine_kernel_matrix(args.c, sites), {"kind": "sine", "c": args.c, "strategy": "closed_form"})
        params = {"c": args.c}
    elif kind == "airy":
        u = np.asarray(args.u_grid or np.linspace(-2, 2, 9))
        if np.any(np.abs(u) > kernels.AIRY_KERNEL_MAX_ARG):
            raise UsageError(f"|u| must not exceed {kernels.AIRY_KERNEL_MAX_ARG}")
        values = np.array([[kernels.airy_kernel(a, b) for b in u] for a in u])
        text = "u,v,value\n" + "".join(f"{format(a, '.17g')},{format(b, '.17g')},{format(values[i, j], '.17g')}\n" for i, a in enumerate(u) for j, b in enumerate(u))
        out = Path(args.output)
        out.write_text(text)
        _write_manifest(out, "kernel", {"kind": "airy", "u_grid": [float(x) for x in u]}, [out])
        return EXIT_OK
    elif kind == "bessel":
        if args.theta is None or not args.theta > 0:
            raise UsageError("--theta > 0 is required for the Bessel kernel")
        w = Window(args.window)
        K = KernelMatrix(w.twice, kernels.bessel_kernel_matrix(args.theta, w.twice), {"kind": "bessel", "theta": args.theta, "strategy": "closed_form"})
        params = {"theta": args.theta}
    elif kind == "meixner_cd":
        for f in ("N", "c", "xi"):
            if getattr(args, f) is None:
                raise UsageError(f"--{f} is required for the Meixner kernel")
        w = Window(args.window)
        K = KernelMatrix(w.twice, kernels.meixner_kernel_matrix(args.N, args.c, args.xi, w.twice), {"kind": "meixner_cd", "strategy": "eigensum"})
        params = {"N": args.N, "c": args.c, "xi": args.xi}
    else:
        w = Window(args.window)
        if kind == "gamma":
            ps = _measure(args, need_xi=False)
            truncation = args.truncation or kernels.GAMMA_STABILITY_MS[0]
            try:
                K = kernels.gamma_kernel(ps, w, truncation)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            params = {k: v for k, v in ps.to_json().items() if k != "xi"}
        else:
            ps = _measure(args)
            if isinstance(ps, PlancherelParam):
                raise UsageError("use --kind bessel for the Plancherel measure")
            truncation = args.truncation or kernels.default_truncation(ps, w)
            try:
                K = kernels.hypergeometric_kernel(ps, w, truncation)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            params = ps.to_json()
    out = Path(args.output)
    out.write_text(K.to_csv())
    json_path = out.with_suffix(".json")
    json_path.write_text(K.to_json() + "\n")
    _write_manifest(out, "kernel", dict(params, kind=kind, window=args.window), [out, json_path], truncation=truncation)
    return EXIT_OK


# -- oracle-check -------------------------------------------------------------


def cmd_oracle_check(args) -> int:
    measure = _measure(args)
    pts = args.points
    twice = sorted({int(2 * p) for p in pts})
    if any(t % 2 == 0 for t in twice):
        raise UsageError("points must be half-integers")
    if args.cutoff > oracle.ORACLE_CAP:
        raise UsageError(f"--cutoff exceeds {oracle.ORACLE_CAP}")
    h = max(abs(t) for t in twice) // 2 + 1
    w = Window(h)
    if isinstance(measure, PlancherelParam):
        kvals = kernels.bessel_kernel_matrix(measure.theta, w.twice)
        K = KernelMatrix(w.twice, kvals, {"kind": "bessel", "theta": measure.theta})
        truncation = None
    else:
        truncation = args.truncation or max(64, kernels.default_truncation(measure, w))
        K = kernels.hypergeometric_kernel(measure, w, truncation)
    queries = []
    if args.order == 0:
        # the points exactly as given, as one query (duplicates allowed)
        queries.append([Fraction(p) for p in pts])
    else:
        import itertools

        for n in range(1, args.order + 1):
            queries += [[Fraction(t, 2) for t in c] for c in itertools.combinations(twice, n)]
    reports = []
    for qpts in queries:
        q = oracle.CorrelationQuery(tuple(qpts), measure, args.cutoff)
        idx = [K.index(int(2 * p)) for p in qpts]
        reports.append(oracle.correlation_report(q, K.values[np.ix_(idx, idx)], args.tol))
    statuses = [r["status"] for r in reports]
    summary = {s: statuses.count(s) for s in ("PASS", "FAIL", "INCONCLUSIVE", "SKIPPED")}
    out = Path(args.output)
    out.write_text(json.dumps({"summary": summary, "reports": reports}, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "oracle-check", {"measure": measure.to_json(), "points_x2": twice, "order": args.order, "cutoff": args.cutoff, "tol": args.tol}, [out], truncation=truncation)
    print(json.dumps(summary))
    return EXIT_CHECK_FAILED if summary["FAIL"] else EXIT_OK


# -- sweep ---------------------------------------------------------------------


def cmd_sweep(args) -> int:
    regime = args.regime
    if regime == "bessel":
        if not args.s:
            raise UsageError("--s grid is required")
        theta = args.theta[0] if args.theta else 1.0
        pts = limits.sweep_bessel(theta, args.s, Window(args.window or 5))
        params = {"theta": theta, "s": args.s}
    elif regime == "sine":
        if not args.theta:
            raise UsageError("--theta grid is required")
        c = 0.0 if args.c is None else args.c
        pts = limits.sweep_sine(c, args.theta, args.window or 4)
        params = {"c": c, "theta": args.theta}
    elif regime == "airy":
        if not args.theta:
            raise UsageError("--theta grid is required")
        u = args.u_grid or [-2.0, -1.0, 0.0, 1.0, 2.0]
        pts = limits.sweep_airy(args.theta, u, prefactor=not args.no_prefactor)
        params = {"theta": args.theta, "u_grid": u, "prefactor": not args.no_prefactor}
    else:
        if not args.xi_grid:
            raise UsageError("--xi-grid is required")
        ps = _measure(args, need_xi=False)
        try:
            pts = limits.sweep_gamma(ps, args.xi_grid, Window(args.window or 6))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        params = {"measure": {k: v for k, v in ps.to_json().items() if k != "xi"}, "xi": args.xi_grid}
    v = limits.verdict(pts)
    check_regime = "airy_no_prefactor" if regime == "airy" and args.no_prefactor else regime
    if check_regime == "airy_no_prefactor":
        # negative control: passing means the distances do not decrease
        d = v["distances"]
        ok, reason = (all(b >= a for a, b in zip(d, d[1:])), "negative control")
    else:
        ok, reason = limits.meets_thresholds(regime, v)
    out = Path(args.output)
    out.write_text(limits.sweep_to_csv(pts))
    _write_manifest(
        out,
        "sweep",
        dict(params, regime=regime),
        [out],
        truncation=[p.extra.get("M") for p in pts],
        extra={"verdict": v, "meets_thresholds": ok, "reason": reason, "points": [p.to_json() for p in pts], "thresholds": limits.thresholds()},
    )
    print(json.dumps({"verdict": {k: v[k] for k in ("final_distance", "monotone_fraction", "violations")}, "ok": ok, "reason": reason}))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# -- sample --------------------------------------------------------------------


def cmd_sample(args) -> int:
    measure = _measure(args)
    if args.n < 1:
        raise UsageError("--n must be positive")
    samples = oracle.sample_partitions_chunked(measure, args.seed, args.cutoff, args.n, _workers())
    out = Path(args.output)
    with out.open("w") as fh:
        for p in samples:
            fh.write(json.dumps(p.to_json()) + "\n")
    sizes = np.array([p.size() for p in samples], dtype=float)
    _write_manifest(out, "sample", {"measure": measure.to_json(), "n": args.n, "cutoff": args.cutoff}, [out], seed=args.seed, extra={"mean_size": float(sizes.mean())})
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dppkernels", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="compute a kernel matrix on a window and write CSV + JSON")
    p.add_argument("--kind", required=True, choices=["hypergeometric", "gamma", "bessel", "sine", "airy", "meixner_cd"])
    _add_measure_args(p, plancherel=False)
    p.add_argument("--window", type=int, default=6, help="window half-width h: sites |x| <= h - 1/2 (|x| <= h on Z for sine)")
    p.add_argument("--truncation", type=int, help="truncation half-width M (spectral kernels; must be >= 4h)")
    p.add_argument("--u-grid", type=_floats, help="comma-separated u values (airy); write --u-grid=-1,0,1 when the first value is negative")
    p.add_argument("--output", required=True, help="CSV output path")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("oracle-check", help="compare kernel determinants with exact enumeration")
    _add_measure_args(p)
    p.add_argument("--points", type=_half_integers, required=True, help="half-integers, e.g. --points=-1/2,1/2 or the range --points=-7/2:7/2")
    p.add_argument("--order", type=int, default=1, choices=[0, 1, 2], help="check all subsets up to this size (0: the point list as one query)")
    p.add_argument("--cutoff", type=int, default=12, help="enumerate partitions of size <= cutoff")
    p.add_argument("--truncation", type=int, help="truncation half-width for the hypergeometric kernel")
    p.add_argument("--tol", type=float, default=1e-5, help="absolute tolerance on top of the tail bound")
    p.add_argument("--output", required=True, help="JSON report path")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("sweep", help="run a limit-regime sweep and write the distance curve")
    p.add_argument("--regime", required=True, choices=["bessel", "sine", "airy", "gamma"])
    _add_measure_args(p, plancherel=False, theta_grid=True)
    p.add_argument("--s", type=_floats, help="comma-separated s grid (bessel)")
    p.add_argument("--xi-grid", type=_floats, help="comma-separated increasing xi grid (gamma)")
    p.add_argument("--u-grid", type=_floats, help="comma-separated u grid (airy); use --u-grid=... for a negative first value")
    p.add_argument("--no-prefactor", action="store_true", help="airy: drop the theta^(1/6) factor (negative control)")
    p.add_argument("--window", type=int, help="window half-width")
    p.add_argument("--output", required=True, help="CSV output path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample", help="draw partitions from a truncated measure")
    _add_measure_args(p)
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, required=True, help="RNG seed")
    p.add_argument("--cutoff", type=int, default=14, help="enumerate partitions of size <= cutoff")
    p.add_argument("--output", required=True, help="newline-delimited JSON output path")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    _ARGV[:] = argv
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dppkernels: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (oracle.InsufficientMassError, SpectralGapError, EigenConvergenceError) as exc:
        print(f"dppkernels: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"dppkernels: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"dppkernels: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
