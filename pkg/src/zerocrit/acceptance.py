"""End-to-end acceptance checks, one verdict line per criterion.

Each criterion function returns a dict with keys id, title, passed, detail
(and skipped when not run); format_line renders the one-line verdict.  The
slow simulation batches (criteria 7/8 share one) are cached per process so
the full suite pays for them once.
"""

import filecmp
import math
import tempfile
from pathlib import Path

import numpy as np

from . import gafsim, projective
from .correlator import (
    cm_estimate,
    ktilde_binned,
    ktilde_curve,
    ktilde_monte_carlo,
    quadratic_abs_expectation,
)
from .covariance import build_general_joint_covariance, build_joint_covariance
from .estimator import compare_curves, estimate_ktilde, intensity

LONG_RANGE = 5.0 / 3.0

GAF_SAMPLES = 2000
GAF_WINDOW = 8.0
GAF_SEED = 777
GAF_EDGES = np.linspace(0.2, 4.0, 20)

SU2_COUNT_SAMPLES = 500
SU2_CURVE_N = 400
SU2_CURVE_SAMPLES = 5000
SU2_CURVE_SEED = 4321
SU2_CURVE_EDGES = np.linspace(0.2, 1.2, 6)

_BATCH_CACHE = {}


def _result(ident, title, passed, detail, skipped=False):
    return {
        "id": ident,
        "title": title,
        "passed": bool(passed),
        "detail": detail,
        "skipped": bool(skipped),
    }


def _skip(ident, title):
    return _result(ident, title, False, "skipped (slow suite)", skipped=True)


def format_line(res):
    tag = "SKIP" if res["skipped"] else ("PASS" if res["passed"] else "FAIL")
    return f"{tag}  criterion {res['id']:>2}: {res['title']} - {res['detail']}"


def _gaf_batch(workers=1):
    key = (GAF_SAMPLES, GAF_WINDOW, GAF_SEED)
    if key not in _BATCH_CACHE:
        _BATCH_CACHE[key] = gafsim.simulate_batch(
            GAF_SAMPLES, GAF_WINDOW, GAF_SEED, workers=workers
        )
    return _BATCH_CACHE[key]


def criterion_1():
    """Long-range constant: K(r) within 0.01 of 5/3 for r in [4, 6]."""
    title = "long-range constant 5/3"
    rs = [4.0, 4.5, 5.0, 5.5, 6.0]
    vals = [ktilde_quadrature_at(r) for r in rs]
    dev = max(abs(v - LONG_RANGE) for v in vals)
    return _result(1, title, dev <= 0.01, f"max |K - 5/3| = {dev:.3e} (tol 0.01)")


def ktilde_quadrature_at(r, tol=1e-8):
    from .correlator import ktilde_quadrature

    return ktilde_quadrature(build_joint_covariance(r), tol=tol).value


def criterion_2():
    title = "short-range repulsion"
    # Thresholds pinned with the MC oracle: the true values are 0.0803 and
    # 0.00720 (quadratic vanishing K ~ 8r^2), so the bounds sit ~25% above
    # them while keeping the order-of-magnitude repulsion claim.
    v1 = ktilde_quadrature_at(0.1)
    v2 = ktilde_quadrature_at(0.03)
    ok = v1 < 0.1 and v2 < 0.01
    return _result(2, title, ok, f"K(0.1) = {v1:.5f} < 0.1, K(0.03) = {v2:.6f} < 0.01")


def criterion_3():
    title = "typo regression of the long-range integrand"
    # Independent unit exponentials X = |xi_1|^2, Y = |xi_2|^2, Z = |xi_3|^2:
    # weight X against |2Y - X| (index typo) vs |2Y - Z| (correct); only the
    # latter reproduces the long-range constant.
    typo = quadratic_abs_expectation(np.diag([1.0, 0, 0]), np.diag([-1.0, 2.0, 0]))
    good = quadratic_abs_expectation(np.diag([1.0, 0, 0]), np.diag([0.0, 2.0, -1.0]))
    e_typo = abs(typo - 16.0 / 9.0)
    e_good = abs(good - 5.0 / 3.0)
    ok = e_typo <= 1e-4 and e_good <= 1e-4
    return _result(
        3, title, ok,
        f"|E[X|2Y-X|] - 16/9| = {e_typo:.2e}, |E[X|2Y-Z|] - 5/3| = {e_good:.2e} (tol 1e-4)",
    )


def criterion_4():
    title = "quadrature vs Monte Carlo"
    worst = 0.0
    for i, r in enumerate([0.1, 0.5, 1.0, 2.0, 3.0, 4.0]):
        cov = build_joint_covariance(r)
        exact = ktilde_quadrature_at(r)
        mc = ktilde_monte_carlo(cov, 10**6, seed=1234 + i)
        # At small r the inner form never changes sign in the sample, the
        # control variate is exact, and stderr is legitimately zero; compare
        # at machine resolution there instead of dividing by zero.
        floor = 64 * np.finfo(float).eps * max(1.0, abs(exact))
        worst = max(worst, abs(exact - mc.value) / max(mc.stderr, floor))
    return _result(4, title, worst <= 4.0, f"max |z| = {worst:.2f} (limit 4)")


def criterion_5():
    title = "frame invariance of the evaluator"
    from .correlator import ktilde_quadrature

    rng = np.random.default_rng(20240823)
    worst = 0.0
    for r in [0.5, 1.0, 2.0]:
        reduced = ktilde_quadrature_at(r)
        for _ in range(10):
            u = complex(*rng.uniform(-2, 2, size=2))
            theta = rng.uniform(0, 2 * np.pi)
            v = u + r * complex(math.cos(theta), math.sin(theta))
            general = ktilde_quadrature(build_general_joint_covariance(u, v)).value
            worst = max(worst, abs(general - reduced))
    return _result(5, title, worst <= 1e-6, f"max |general - reduced| = {worst:.2e} (tol 1e-6)")


def criterion_6():
    title = "c_1 = 5/3 and reproducible c_2"
    c1 = cm_estimate(1, 10**6, seed=11)
    z1 = abs(c1.value - LONG_RANGE) / c1.stderr
    c2a = cm_estimate(2, 10**6, seed=21)
    c2b = cm_estimate(2, 10**6, seed=22)
    z2 = abs(c2a.value - c2b.value) / math.hypot(c2a.stderr, c2b.stderr)
    ok = z1 <= 3.0 and z2 <= 3.0
    return _result(
        6, title, ok,
        f"c1 = {c1.value:.5f}±{c1.stderr:.5f} (z = {z1:.2f}), "
        f"c2 streams z = {z2:.2f} (limit 3)",
    )


def criterion_7(workers=1):
    title = "GAF simulation matches the exact curve"
    patterns = _gaf_batch(workers)
    empirical = estimate_ktilde(patterns, GAF_EDGES, which="chern")
    exact = ktilde_binned(GAF_EDGES)
    report = compare_curves(empirical, exact, threshold=4.0)
    lo, hi = empirical.values[0], empirical.values[-1]
    gap = (hi - lo) / math.hypot(empirical.stderr[0], empirical.stderr[-1])
    ok = report.passed and gap >= 5.0
    return _result(
        7, title, ok,
        f"max |z| = {report.max_abs_z:.2f} over {len(GAF_EDGES) - 1} bins (limit 4), "
        f"first-to-last bin rise = {gap:.1f} stderr (need >= 5)",
    )


def criterion_8(workers=1):
    title = "zero and critical intensities"
    patterns = _gaf_batch(workers)
    z_val, _ = intensity(patterns, "zeros")
    c_val, _ = intensity(patterns, "criticals")
    z_dev = abs(z_val * np.pi - 1.0)
    c_dev = abs(c_val * 3.0 * np.pi / 5.0 - 1.0)
    ok = z_dev <= 0.05 and c_dev <= 0.05
    return _result(
        8, title, ok,
        f"zeros {z_val:.5f} vs 1/pi ({z_dev:+.2%}), "
        f"criticals {c_val:.5f} vs 5/3pi ({c_dev:+.2%}), tol 5%",
    )


def criterion_9(workers=1):
    title = "SU(2) zero and critical counts"
    details = []
    ok = True
    for n, seed in [(50, 5050), (100, 5100)]:
        zeros, crits = projective.count_survey(n, SU2_COUNT_SAMPLES, seed, workers)
        exact_zeros = bool(np.all(zeros == n))
        pred = 5.0 * n / 3.0 - 14.0 / 9.0
        rel = abs(crits.mean() - pred) / pred
        ok = ok and exact_zeros and rel <= 0.02
        details.append(
            f"n={n}: zeros {'all exact' if exact_zeros else 'MISMATCH'}, "
            f"mean crit {crits.mean():.2f} vs {pred:.2f} ({rel:+.2%} of 2%)"
        )
    return _result(9, title, ok, "; ".join(details))


def criterion_10():
    title = "Bergman rescaling error decays"
    ns = [16, 64, 256, 1024]
    errs = [projective.bergman_rescaling_error(n, 1.0) for n in ns]
    decreasing = all(a > b for a, b in zip(errs, errs[1:]))
    vanishing = errs[-1] < errs[0] / 20.0
    ok = decreasing and vanishing
    seq = ", ".join(f"{e:.2e}" for e in errs)
    return _result(10, title, ok, f"errors at n=16..1024: {seq} (strictly down, 20x drop)")


def criterion_11(workers=1):
    title = "rescaled SU(2) curve matches the exact curve"
    empirical = projective.su2_rescaled_correlation(
        SU2_CURVE_N, SU2_CURVE_SAMPLES, SU2_CURVE_EDGES, SU2_CURVE_SEED, workers
    )
    exact = ktilde_binned(SU2_CURVE_EDGES)
    report = compare_curves(empirical, exact, threshold=4.0)
    return _result(
        11, title, report.passed,
        f"max |z| = {report.max_abs_z:.2f} over {len(SU2_CURVE_EDGES) - 1} bins "
        f"(limit 4, n = {SU2_CURVE_N}, {SU2_CURVE_SAMPLES} samples)",
    )


def _run_cli(args):
    from . import cli

    code = cli.main(args)
    if code != 0:
        raise AssertionError(f"cli {' '.join(args)} exited {code}")


def _identical_trees(a, b):
    a, b = Path(a), Path(b)
    names_a = sorted(p.name for p in a.iterdir())
    names_b = sorted(p.name for p in b.iterdir())
    if names_a != names_b:
        return False
    for name in names_a:
        if not filecmp.cmp(a / name, b / name, shallow=False):
            return False
    return True


def criterion_12():
    title = "seeded determinism across reruns and workers"
    checks = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for d in ("e1", "e2"):
            _run_cli(["eval", "--r-grid", "0.5:2:0.5", "--mc-samples", "20000",
                      "--seed", "5", "-o", str(tmp / d / "curve.csv")])
        checks.append(("eval rerun", _identical_trees(tmp / "e1", tmp / "e2")))

        for d, w in (("s1", "1"), ("s2", "1"), ("s4", "4")):
            _run_cli(["simulate", "--samples", "50", "--window", "3",
                      "--seed", "9", "--workers", w, "-o", str(tmp / d)])
        checks.append(("simulate rerun", _identical_trees(tmp / "s1", tmp / "s2")))
        checks.append(("simulate workers 1 vs 4", _identical_trees(tmp / "s1", tmp / "s4")))

        for d in ("c1", "c2"):
            _run_cli(["cm", "--m", "1", "--samples", "100000", "--seed", "3",
                      "-o", str(tmp / d / "cm.json")])
        checks.append(("cm rerun", _identical_trees(tmp / "c1", tmp / "c2")))

        for d, w in (("u1", "1"), ("u2", "4")):
            _run_cli(["su2", "curve", "--n", "100", "--samples", "60",
                      "--bins", "0.2:1:0.4", "--seed", "17", "--workers", w,
                      "-o", str(tmp / d / "curve.csv")])
        checks.append(("su2 workers 1 vs 4", _identical_trees(tmp / "u1", tmp / "u2")))

        for d in ("t1", "t2"):
            _run_cli(["estimate", "--patterns", str(tmp / "s1"),
                      "--bins", "0.2:1.4:0.4", "-o", str(tmp / d / "curve.csv")])
        checks.append(("estimate rerun", _identical_trees(tmp / "t1", tmp / "t2")))
    ok = all(flag for _, flag in checks)
    bad = [name for name, flag in checks if not flag]
    detail = "all byte-identical" if ok else f"mismatch: {', '.join(bad)}"
    return _result(12, title, ok, f"{detail} ({len(checks)} comparisons)")


FAST = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
        5: criterion_5, 6: criterion_6, 10: criterion_10, 12: criterion_12}
SLOW = {7: criterion_7, 8: criterion_8, 9: criterion_9, 11: criterion_11}
TITLES = {
    7: "GAF simulation matches the exact curve",
    8: "zero and critical intensities",
    9: "SU(2) zero and critical counts",
    11: "rescaled SU(2) curve matches the exact curve",
}


def run_all(quick=False, workers=1):
    """Run the acceptance suite; quick mode skips the simulation batches."""
    results = []
    for ident in range(1, 13):
        if ident in FAST:
            results.append(FAST[ident]())
        elif quick:
            results.append(_skip(ident, TITLES[ident]))
        else:
            results.append(SLOW[ident](workers))
    return results
