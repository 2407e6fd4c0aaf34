"""Batch command line: every experiment as a seeded, reproducible subcommand.

Exit codes: 0 success, 1 acceptance/comparison failure, 2 invalid
configuration, 3 numerical failure.  Every file-writing run also writes a
JSON manifest with the resolved configuration, tool version, seed, and
active backend plus sha256 digests of the outputs; re-running any command
from the same configuration reproduces the primary outputs byte for byte
(SVG plots excluded; their source CSVs are covered).
"""

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, acceptance, backend, gafsim, projective
from .correlator import ktilde_binned, ktilde_curve, ktilde_monte_carlo, cm_estimate
from .covariance import build_joint_covariance
from .errors import ConfigError, NumericalError
from .estimator import CorrelationCurve, compare_curves, estimate_ktilde

WORKERS_ENV = "ZEROCRIT_WORKERS"


def _default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def parse_grid(text):
    """start:stop:step, inclusive of stop when it lies on the lattice."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r} is not start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"grid {text!r} has non-numeric parts") from exc
    if step <= 0 or stop < start:
        raise ConfigError(f"grid {text!r} needs step > 0 and stop >= start")
    k = int(math.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(k + 1)


def _count(text):
    """Integer argument accepting scientific notation like 1e6."""
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from exc
    if value != int(value) or value < 0:
        raise argparse.ArgumentTypeError(f"{text!r} is not a nonnegative integer")
    return int(value)


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _json_text(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_manifest(command, config, outputs, path):
    manifest = {
        "tool": "zerocrit",
        "version": __version__,
        "backend": backend.backend_name(),
        "command": command,
        "config": config,
        "outputs": {Path(p).name: _sha256(p) for p in outputs},
    }
    _write(path, _json_text(manifest))


def _manifest_path(out):
    out = Path(out)
    return out.parent / (out.stem + ".manifest.json")


def _fmt(x):
    return f"{float(x):.17g}"


def cmd_eval(args):
    grid = parse_grid(args.r_grid)
    curve = ktilde_curve(grid, tol=args.tol)
    header = "r,value,stderr"
    rows = [
        [_fmt(r), _fmt(v), _fmt(s)]
        for r, v, s in zip(curve.bin_edges, curve.values, curve.stderr)
    ]
    if args.mc_samples:
        header += ",mc_value,mc_stderr"
        for i, r in enumerate(grid):
            mc = ktilde_monte_carlo(
                build_joint_covariance(r), args.mc_samples, seed=args.seed + i
            )
            rows[i] += [_fmt(mc.value), _fmt(mc.stderr)]
    text = header + "\n" + "\n".join(",".join(row) for row in rows) + "\n"
    if args.output is None:
        sys.stdout.write(text)
        return 0
    out = _write(args.output, text)
    config = {"r_grid": args.r_grid, "tol": args.tol,
              "mc_samples": args.mc_samples, "seed": args.seed}
    _write_manifest("eval", config, [out], _manifest_path(out))
    return 0


def cmd_cm(args):
    est = cm_estimate(args.m, args.samples, seed=args.seed)
    payload = {
        "m": est.m, "value": est.value, "stderr": est.stderr,
        "samples": est.samples, "seed": est.seed, "metadata": est.metadata,
    }
    print(f"c_{est.m} = {est.value:.6f} +/- {est.stderr:.6f} "
          f"({est.samples} samples, seed {est.seed})")
    if args.output is not None:
        out = _write(args.output, _json_text(payload))
        config = {"m": args.m, "samples": args.samples, "seed": args.seed}
        _write_manifest("cm", config, [out], _manifest_path(out))
    return 0


def cmd_simulate(args):
    patterns = gafsim.simulate_batch(
        args.samples, args.window, args.seed,
        radius=args.radius, workers=args.workers,
    )
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for i, pat in enumerate(patterns):
        path = outdir / f"pattern_{i:05d}.json"
        _write(path, _json_text(pat.to_json_dict()))
        outputs.append(path)
    config = {"samples": args.samples, "window": args.window,
              "seed": args.seed, "radius": args.radius}
    _write_manifest("simulate", config, outputs, outdir / "manifest.json")
    print(f"wrote {len(outputs)} patterns to {outdir}")
    return 0


def _load_patterns(directory):
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"{directory} is not a directory of patterns")
    files = sorted(directory.glob("pattern_*.json"))
    if not files:
        raise ConfigError(f"no pattern_*.json files in {directory}")
    return [gafsim.PointPattern.from_json_dict(json.loads(f.read_text()))
            for f in files]


def cmd_estimate(args):
    if args.compare and args.which != "chern":
        raise ConfigError("--compare requires --which chern (no exact holo curve)")
    patterns = _load_patterns(args.patterns)
    edges = parse_grid(args.bins)
    curve = estimate_ktilde(patterns, edges, which=args.which)
    if args.output is None:
        curve.to_csv(sys.stdout)
    else:
        out = Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        curve.to_csv(out)
        config = {"patterns": Path(args.patterns).name, "bins": args.bins,
                  "which": args.which, "tol": args.tol}
        _write_manifest("estimate", config, [out], _manifest_path(out))
    if not args.compare:
        return 0
    report = compare_curves(curve, ktilde_binned(edges, tol=args.tol), threshold=4.0)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict}: max |z| = {report.max_abs_z:.2f} over "
          f"{curve.values.size} bins (threshold {report.threshold})")
    if args.output is not None:
        out = Path(args.output)
        _write(out.parent / (out.stem + ".compare.json"),
               _json_text(report.to_json_dict()))
    return 0 if report.passed else 1


def cmd_su2(args):
    if args.mode == "counts":
        zeros, crits = projective.count_survey(
            args.n, args.samples, args.seed, args.workers
        )
        pred = 5.0 * args.n / 3.0 - 14.0 / 9.0
        payload = {
            "n": args.n, "samples": args.samples, "seed": args.seed,
            "zeros_exact": bool(np.all(zeros == args.n)),
            "mean_critical_count": float(crits.mean()),
            "stderr": float(crits.std(ddof=1) / math.sqrt(len(crits))),
            "predicted_asymptotic": pred,
        }
        print(f"n={args.n}: zeros {'exact' if payload['zeros_exact'] else 'MISMATCH'}, "
              f"criticals {payload['mean_critical_count']:.3f} "
              f"+/- {payload['stderr']:.3f} (asymptotic {pred:.3f})")
        if args.output is not None:
            out = _write(args.output, _json_text(payload))
            config = {"mode": "counts", "n": args.n,
                      "samples": args.samples, "seed": args.seed}
            _write_manifest("su2", config, [out], _manifest_path(out))
        return 0

    edges = parse_grid(args.bins)
    curve = projective.su2_rescaled_correlation(
        args.n, args.samples, edges, args.seed, args.workers
    )
    if args.output is None:
        curve.to_csv(sys.stdout)
    else:
        out = Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        curve.to_csv(out)
        config = {"mode": "curve", "n": args.n, "samples": args.samples,
                  "bins": args.bins, "seed": args.seed}
        _write_manifest("su2", config, [out], _manifest_path(out))
    if not args.compare:
        return 0
    report = compare_curves(curve, ktilde_binned(edges), threshold=4.0)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict}: max |z| = {report.max_abs_z:.2f} over "
          f"{curve.values.size} bins (threshold {report.threshold})")
    if args.output is not None:
        out = Path(args.output)
        _write(out.parent / (out.stem + ".compare.json"),
               _json_text(report.to_json_dict()))
    return 0 if report.passed else 1


def cmd_verify(args):
    results = acceptance.run_all(quick=args.quick, workers=args.workers)
    for res in results:
        print(acceptance.format_line(res))
    ran = [r for r in results if not r["skipped"]]
    failed = [r for r in ran if not r["passed"]]
    print(f"{len(ran) - len(failed)}/{len(ran)} criteria passed"
          + (f", {len(results) - len(ran)} skipped" if len(ran) < len(results) else ""))
    if args.output is not None:
        _write(args.output, _json_text({"results": results,
                                        "passed": not failed,
                                        "quick": args.quick}))
    return 1 if failed else 0


def _read_curve_csv(path):
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.genfromtxt(path, delimiter=",", skip_header=1, ndmin=2)
    cols = {name: data[:, i] for i, name in enumerate(header)}
    return path.stem, cols


def cmd_plot(args):
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "zerocrit"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in args.curves:
        name, cols = _read_curve_csv(path)
        if "bin_lo" in cols:
            mid = 0.5 * (cols["bin_lo"] + cols["bin_hi"])
            ax.errorbar(mid, cols["value"], yerr=cols["stderr"],
                        fmt="o", ms=3.5, capsize=2.5, label=name)
        else:
            ax.plot(cols["r"], cols["value"], "-", lw=1.4, label=name)
            if "mc_value" in cols:
                ax.errorbar(cols["r"], cols["mc_value"], yerr=cols["mc_stderr"],
                            fmt=".", ms=3, capsize=2, label=f"{name} (MC)")
    ax.axhline(5.0 / 3.0, color="grey", ls="--", lw=1, label="5/3")
    ax.set_xlabel("separation r")
    ax.set_ylabel("zero-critical pair correlation")
    if args.title:
        ax.set_title(args.title)
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    print(f"wrote {out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="zerocrit",
        description="Two-point statistics of zeros and connection critical "
                    "points of Gaussian random analytic functions.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="exact correlation curve by quadrature")
    p.add_argument("--r-grid", required=True, help="separations start:stop:step")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--mc-samples", type=_count, default=0,
                   help="add a Monte Carlo cross-check column")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None, help="curve CSV path")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("cm", help="Monte Carlo long-range constant in dimension m")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--samples", type=_count, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None, help="JSON result path")
    p.set_defaults(fn=cmd_cm)

    p = sub.add_parser("simulate", help="sample GAFs and find zeros/criticals")
    p.add_argument("--samples", type=_count, required=True)
    p.add_argument("--window", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--radius", type=float, default=None,
                   help="truncation radius (default window + 1)")
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("estimate", help="empirical pair correlation from patterns")
    p.add_argument("--patterns", required=True, help="directory from simulate")
    p.add_argument("--bins", required=True, help="bin edges start:stop:step")
    p.add_argument("--which", choices=("chern", "holo"), default="chern")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--compare", action="store_true",
                   help="compare against the exact curve; exit 1 on mismatch")
    p.add_argument("-o", "--output", default=None, help="curve CSV path")
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("su2", help="SU(2) polynomial experiments on the sphere")
    p.add_argument("mode", choices=("counts", "curve"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=_count, required=True)
    p.add_argument("--bins", default="0.2:1.2:0.2",
                   help="bin edges for curve mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--compare", action="store_true",
                   help="curve mode: compare against the exact curve")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_su2)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true",
                   help="skip the slow simulation criteria")
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("-o", "--output", default=None, help="JSON report path")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("plot", help="render curve CSVs to SVG")
    p.add_argument("curves", nargs="+", help="curve CSV files")
    p.add_argument("--title", default=None)
    p.add_argument("-o", "--output", required=True, help="SVG path")
    p.set_defaults(fn=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
