"""Truncated flat-model Gaussian analytic functions and their point sets.

A sample is f(z) = sum_j a_j z^j / sqrt(j!) truncated at a degree where the
covariance tail on the validity disk is below eps^2.  Three point sets are
extracted per sample: polynomial zeros, connection critical points solving
f'(z) - zbar f(z) = 0 (a smooth non-holomorphic system, handled by seeded
Newton in Wirtinger form), and ordinary derivative zeros for comparison.

Completeness of the critical-point search cannot be certified by the argument
principle (g is not holomorphic); it is certified statistically through batch
intensity checks, plus per-point residual certificates for soundness.
"""

import json
import logging
import math
from concurrent import futures
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import backend, polytools, streams
from .errors import (
    ArgumentOutOfRange,
    RadiusOutOfRange,
    RootFindingStalled,
    SuspectUndercount,
)

log = logging.getLogger(__name__)

TRUNCATION_EPS = 1e-8
RADIUS_MAX = 12.0
EPS_MIN, EPS_MAX = 1e-12, 1e-4
GRID_SPACING = 0.25
DEDUPE_TOL = 1e-6
RESIDUAL_RTOL = 1e-8
WINDOW_BUFFER = 1.0
GRID_KNEE_RADIUS = 4.0
NEWTON_MAX_ITER = 80
NEWTON_STEP_TOL = 1e-13
POLISH_MAX_ITER = 40

ZERO_INTENSITY = 1.0 / np.pi
CRITICAL_INTENSITY = 5.0 / (3.0 * np.pi)


@dataclass(frozen=True)
class GafSample:
    """One truncated random analytic function."""

    coefficients: np.ndarray
    degree: int
    radius: float
    seed: int

    def poly_coefficients(self):
        """Monomial coefficients a_j / sqrt(j!), ascending."""
        j = np.arange(self.degree + 1)
        with np.errstate(under="ignore"):
            return self.coefficients * np.exp(-0.5 * gammaln(j + 1))

    def __call__(self, z):
        c = self.poly_coefficients()
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), c)


@dataclass(frozen=True)
class PointPattern:
    """Zeros and critical points of one sample inside an observation window."""

    zeros: np.ndarray
    criticals: np.ndarray
    holo_criticals: np.ndarray
    window_radius: float
    sample_seed: int
    degree: int = 0
    radius: float = 0.0

    def to_json_dict(self):
        def pairs(arr):
            a = np.asarray(arr, dtype=complex)
            return [[float(p.real), float(p.imag)] for p in a]

        return {
            "seed": int(self.sample_seed),
            "degree": int(self.degree),
            "radius": float(self.radius),
            "window_radius": float(self.window_radius),
            "zeros": pairs(self.zeros),
            "criticals": pairs(self.criticals),
            "holo_criticals": pairs(self.holo_criticals),
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json_dict(cls, data):
        def arr(rows):
            return np.array([complex(re, im) for re, im in rows], dtype=complex)

        return cls(
            zeros=arr(data["zeros"]),
            criticals=arr(data["criticals"]),
            holo_criticals=arr(data["holo_criticals"]),
            window_radius=float(data["window_radius"]),
            sample_seed=int(data["seed"]),
            degree=int(data.get("degree", 0)),
            radius=float(data.get("radius", 0.0)),
        )

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def to_csv_rows(self):
        rows = []
        for kind, arr in (
            ("zero", self.zeros),
            ("critical", self.criticals),
            ("holo_critical", self.holo_criticals),
        ):
            for p in np.asarray(arr, dtype=complex):
                rows.append((kind, float(p.real), float(p.imag)))
        return rows


def truncation_degree(R, eps=TRUNCATION_EPS):
    """Minimal N with sum_{j>N} R^{2j}/j! <= eps^2."""
    if not 0.0 < R <= RADIUS_MAX:
        raise RadiusOutOfRange(f"radius {R!r} outside (0, {RADIUS_MAX}]")
    if not EPS_MIN <= eps <= EPS_MAX:
        raise ArgumentOutOfRange(f"eps {eps!r} outside [{EPS_MIN}, {EPS_MAX}]")
    target = math.log(eps) * 2.0
    x = R * R
    N = max(int(math.ceil(x)) - 1, 0)
    while True:
        # log of the true tail, computed from the leading term times a
        # rapidly converging series of falling ratios.
        lead = (N + 1) * math.log(x) - math.lgamma(N + 2) if x > 0 else -math.inf
        acc = 1.0
        term = 1.0
        j = N + 2
        while True:
            term *= x / j
            acc += term
            j += 1
            if term <= 1e-18 * acc:
                break
        if lead + math.log(acc) <= target:
            return N
        N += 1


def sample_gaf(N, R, seed):
    """Draw coefficients a_0..a_N i.i.d. standard complex Gaussian."""
    needed = truncation_degree(R, TRUNCATION_EPS)
    if N < needed:
        raise ArgumentOutOfRange(
            f"degree {N} below truncation requirement {needed} at radius {R}"
        )
    gen = streams.generator(seed, streams.TAG_GAF, 0)
    coeffs = streams.complex_normals(gen, N + 1)
    return GafSample(coefficients=coeffs, degree=int(N), radius=float(R), seed=int(seed))


def _check_window(sample, window_radius):
    if not 0.0 < window_radius <= sample.radius - WINDOW_BUFFER:
        raise ArgumentOutOfRange(
            f"window radius {window_radius} outside (0, "
            f"{sample.radius - WINDOW_BUFFER}] (validity radius minus buffer)"
        )


def _poly_roots_in_window(coeffs, window_radius, work_radius, kernels):
    """Certified roots of an ascending monomial-coefficient polynomial.

    Aberth in the frame rescaled to the working disk, then Newton polish in
    the original frame, then residual certificates against the local scale.
    """
    c = np.asarray(coeffs, dtype=complex)
    if len(c) < 2 or np.max(np.abs(c)) == 0.0:
        return np.empty(0, dtype=complex)
    with np.errstate(divide="ignore"):
        log_mags = np.log(np.abs(c))
    phases = np.where(np.abs(c) > 0, c / np.where(np.abs(c) > 0, np.abs(c), 1.0), 0.0)
    scaled, _ = polytools.scaled_coefficients(log_mags, phases, work_radius)
    core, valuation, _dropped_top = polytools.trim(scaled)
    zeta = polytools.all_roots(core, kernels)
    roots = work_radius * zeta
    if valuation > 0:
        roots = np.concatenate([np.zeros(valuation, dtype=complex), roots])

    inside = roots[np.abs(roots) <= window_radius + 10 * DEDUPE_TOL]
    if inside.size == 0:
        return np.empty(0, dtype=complex)
    polished, status = kernels.newton_polish(
        c, inside, POLISH_MAX_ITER, NEWTON_STEP_TOL
    )
    bad = status == kernels.SINGULAR
    if bad.any():
        log.warning("%d root(s) hit a vanishing derivative during polish", bad.sum())
    polished = polished[np.abs(polished) <= window_radius]
    if polished.size == 0:
        return polished
    unique, mult = polytools.dedupe_sorted(polished, DEDUPE_TOL)
    if (mult > 1).any():
        log.warning("suspected multiple root(s): cluster sizes %s", mult[mult > 1])

    def f(z):
        return np.polynomial.polynomial.polyval(z, c)

    local = polytools.circle_max(f, unique)
    resid = np.abs(f(unique))
    ok = resid <= RESIDUAL_RTOL * local
    if not ok.all():
        multiple = mult > 1
        if (~ok & ~multiple).any():
            worst = float(np.max(resid[~ok] / np.maximum(local[~ok], 1e-300)))
            raise RootFindingStalled(
                f"{int((~ok).sum())} root(s) failed the residual certificate "
                f"(worst relative residual {worst:.3e})"
            )
        unique = unique[ok]
    return unique


def find_zeros(sample, window_radius):
    """All zeros of the truncated series inside the window."""
    _check_window(sample, window_radius)
    _, kernels = backend.get_kernels()
    return _poly_roots_in_window(
        sample.poly_coefficients(), window_radius, sample.radius, kernels
    )


def find_holo_critical_points(sample, window_radius):
    """Zeros of the plain derivative f' inside the window."""
    _check_window(sample, window_radius)
    _, kernels = backend.get_kernels()
    c = np.polynomial.polynomial.polyder(sample.poly_coefficients())
    return _poly_roots_in_window(c, window_radius, sample.radius, kernels)


def _graded_seeds(radius, spacing, knee=GRID_KNEE_RADIUS):
    """Polar seed lattice whose pitch shrinks like 1/rho beyond the knee.

    The Wirtinger-Newton basins of f' - zbar f contract inversely with |z| in
    this chart (the zbar term steepens the landscape as the window grows), so
    a fixed-pitch grid starts skipping critical points a few units out; rings
    with pitch spacing*min(1, knee/rho) keep seed density proportional to the
    local basin scale at uniform-grid cost inside the knee.  Ring phases are
    offset by the golden angle so seeds never align radially.
    """
    seeds = [np.zeros(1, dtype=complex)]
    rho = 0.0
    ring = 0
    while True:
        rho += spacing * min(1.0, knee / max(rho, spacing))
        if rho > radius:
            break
        pitch = spacing * min(1.0, knee / rho)
        m = max(6, int(np.ceil(2.0 * np.pi * rho / pitch)))
        ang = 2.399963229728653 * ring + 2.0 * np.pi * np.arange(m) / m
        seeds.append(rho * np.exp(1j * ang))
        ring += 1
    return np.concatenate(seeds)


def find_critical_points(sample, window_radius, grid_spacing=GRID_SPACING):
    """Connection critical points: solutions of f'(z) - zbar f(z) = 0.

    Dense grid seeding plus Wirtinger-Newton; converged points are deduped,
    restricted to the window, and individually residual-certified.  Seeds
    whose iteration hits a singular Jacobian or leaves the buffered disk are
    discarded.
    """
    _check_window(sample, window_radius)
    _, kernels = backend.get_kernels()
    c = sample.poly_coefficients()
    search_radius = window_radius + WINDOW_BUFFER
    seeds = _graded_seeds(search_radius, grid_spacing)
    points, status = kernels.newton_connection(
        c, seeds, 0, 0.0, NEWTON_MAX_ITER, NEWTON_STEP_TOL, search_radius
    )
    converged = points[status == kernels.OK]
    n_singular = int((status == kernels.SINGULAR).sum())
    if converged.size == 0:
        if n_singular > 0.5 * seeds.size:
            log.warning(
                "degenerate sample: %d/%d seeds hit singular Jacobians, "
                "no certified critical points", n_singular, seeds.size,
            )
        return np.empty(0, dtype=complex)

    converged = converged[np.abs(converged) <= window_radius]
    if converged.size == 0:
        return np.empty(0, dtype=complex)
    unique, _ = polytools.dedupe_sorted(converged, DEDUPE_TOL)

    def g(z):
        p, dp, _ = kernels.horner3(c, z)
        return dp - np.conj(z) * p

    local = polytools.circle_max(g, unique)
    resid = np.abs(g(unique))
    ok = resid <= RESIDUAL_RTOL * local
    if not ok.all():
        log.warning(
            "dropping %d uncertified critical candidate(s)", int((~ok).sum())
        )
        unique = unique[ok]
    return unique


def _one_pattern(args):
    N, R, window_radius, sample_seed = args
    sample = sample_gaf(N, R, sample_seed)
    return PointPattern(
        zeros=find_zeros(sample, window_radius),
        criticals=find_critical_points(sample, window_radius),
        holo_criticals=find_holo_critical_points(sample, window_radius),
        window_radius=float(window_radius),
        sample_seed=int(sample_seed),
        degree=int(N),
        radius=float(R),
    )


def simulate_batch(samples, window_radius, seed, radius=None, workers=1,
                   check_intensity=True):
    """Generate PointPatterns for consecutive per-sample seeds seed+i.

    Output is identical for any worker count: each pattern is a pure function
    of its own seed, and results are collected in sample order.  With
    check_intensity, the batch mean critical count is compared against the
    model intensity and SuspectUndercount raised on a 6 sigma shortfall.
    """
    samples = int(samples)
    if samples < 1:
        raise ArgumentOutOfRange("need at least one sample")
    R = float(radius) if radius is not None else window_radius + WINDOW_BUFFER
    N = truncation_degree(R, TRUNCATION_EPS)
    args = [
        (N, R, window_radius, (int(seed) + i) & streams.MASK64)
        for i in range(samples)
    ]
    if workers and workers > 1:
        with futures.ProcessPoolExecutor(max_workers=workers) as pool:
            patterns = list(pool.map(_one_pattern, args, chunksize=8))
    else:
        patterns = [_one_pattern(a) for a in args]

    if check_intensity and samples >= 20:
        counts = np.array([len(p.criticals) for p in patterns], dtype=float)
        expect = CRITICAL_INTENSITY * np.pi * window_radius**2
        sigma = counts.std(ddof=1) / np.sqrt(samples)
        if sigma > 0 and (expect - counts.mean()) > 6.0 * sigma:
            raise SuspectUndercount(
                f"mean critical count {counts.mean():.3f} more than 6 sigma "
                f"below the model intensity prediction {expect:.3f}"
            )
    return patterns
