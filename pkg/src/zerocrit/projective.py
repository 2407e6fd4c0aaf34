"""SU(2)-polynomial experiments on the projective line.

A degree-n sample is p(z) = sum_j c_j z^j with c_j = a_j sqrt((n+1) C(n,j)),
a_j i.i.d. standard complex Gaussian: the rotation-invariant Gaussian section
ensemble.  The sphere is covered by two affine charts; the chart-1 section is
the coefficient-reversed polynomial q(w) = w^n p(1/w), and the transition on
points is z = 1/w.  Points are stored with a canonical chart assignment
(|coordinate| <= 1, chart 0 winning ties).

Critical points solve p'(z) - n zbar/(1+|z|^2) p(z) = 0, the same Newton
engine as the flat model with the rational connection term swapped in.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import backend, polytools, streams
from .errors import (
    ArgumentOutOfRange,
    BinningInvalid,
    ChartInconsistency,
    CountMismatch,
)
from .estimator import estimate_ktilde

log = logging.getLogger(__name__)

N_MAX = 2000  # raw coefficients overflow double precision beyond this
DEDUPE_CHORDAL = 5e-7
SUSPECT_CHORDAL = 1e-4
TRANSITION_TOL = 1e-6
CHART_GRID_RADIUS = 1.15
CHART_ESCAPE_RADIUS = 1.3
LOCAL_TRIM_RTOL = 1e-30
NEWTON_MAX_ITER = 80
NEWTON_STEP_TOL = 1e-13
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class Su2Polynomial:
    """Random degree-n section with binomial coefficient variances."""

    n: int
    coefficients: np.ndarray
    seed: int

    def reversed(self):
        """The same section in the opposite chart: q(w) = w^n p(1/w)."""
        return Su2Polynomial(
            n=self.n, coefficients=self.coefficients[::-1].copy(), seed=self.seed
        )


@dataclass(frozen=True)
class ChartPoint:
    """A point of the sphere in its canonical affine chart."""

    chart: int
    coordinate: complex

    def __post_init__(self):
        if self.chart not in (0, 1):
            raise ArgumentOutOfRange(f"chart must be 0 or 1, got {self.chart}")
        if abs(self.coordinate) > 1.0 + 1e-9:
            raise ArgumentOutOfRange(
                f"chart coordinate {self.coordinate} outside the closed unit disk"
            )

    def homogeneous(self):
        """Unit vector (alpha, beta) with z = alpha/beta in chart 0."""
        z = self.coordinate
        norm = math.sqrt(1.0 + abs(z) ** 2)
        if self.chart == 0:
            return z / norm, 1.0 / norm
        return 1.0 / norm, z / norm


def chordal_distance(p, q):
    """Fubini-Study chordal distance |a_p b_q - b_p a_q| (sine of the angle)."""
    a1, b1 = p.homogeneous()
    a2, b2 = q.homogeneous()
    return abs(a1 * b2 - b1 * a2)


def canonical_point(z_chart0):
    """Canonical ChartPoint for a chart-0 coordinate (infinite z allowed)."""
    z = complex(z_chart0)
    if np.isinf(abs(z)):
        return ChartPoint(chart=1, coordinate=0j)
    if abs(z) <= 1.0:
        return ChartPoint(chart=0, coordinate=z)
    return ChartPoint(chart=1, coordinate=1.0 / z)


def coefficient_sd(n):
    """sqrt((n+1) C(n,j)) for j = 0..n, computed in log space."""
    j = np.arange(n + 1)
    logbinom = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1)
    return np.exp(0.5 * (np.log(n + 1.0) + logbinom))


def _check_degree(n):
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ArgumentOutOfRange(f"degree must be a positive integer, got {n!r}")
    if n > N_MAX:
        raise ArgumentOutOfRange(f"degree {n} exceeds the overflow-safe bound {N_MAX}")


def sample_su2(n, seed):
    """Draw one SU(2) polynomial from the seeded stream."""
    _check_degree(n)
    gen = streams.generator(seed, streams.TAG_SU2, 0)
    a = streams.complex_normals(gen, n + 1)
    return Su2Polynomial(n=int(n), coefficients=a * coefficient_sd(n), seed=int(seed))


def fs_bergman(n, z, w):
    """(n+1)(1 + z wbar)^n, the degree-n kernel on the unit sphere charts."""
    _check_degree(n)
    return (n + 1.0) * (1.0 + np.asarray(z, dtype=complex) * np.conj(w)) ** n


def bergman_rescaling_error(n, box_radius):
    """sup over |u|,|v| <= box_radius of |F_n(u/sqrt n, v/sqrt n)/n - e^{u vbar}|.

    The difference depends on u, v only through t = u vbar and is analytic in
    t, so the supremum over the polydisk is attained on |t| = box_radius^2;
    a dense circle grid plus the center point realizes it.
    """
    if not 10 <= n <= 10_000:
        raise ArgumentOutOfRange(f"degree {n} outside [10, 10000]")
    if box_radius < 0:
        raise ArgumentOutOfRange("box_radius must be nonnegative")
    t = box_radius**2 * np.exp(2j * np.pi * np.arange(720) / 720)
    t = np.concatenate([t, [0.0 + 0.0j]])
    approx = (1.0 + 1.0 / n) * (1.0 + t / n) ** n
    return float(np.max(np.abs(approx - np.exp(t))))


def _fs_residual(coeffs, fs_n, kernels, z):
    p, dp, _ = kernels.horner3(coeffs, z)
    return dp - fs_n * np.conj(z) / (1.0 + np.abs(z) ** 2) * p


def _grid_seeds(radius, spacing):
    ticks = np.arange(-radius, radius + spacing, spacing)
    X, Y = np.meshgrid(ticks, ticks)
    seeds = (X + 1j * Y).ravel()
    return seeds[np.abs(seeds) <= radius]


def _certified_criticals(coeffs, fs_n, kernels, seeds, escape, rho):
    """Converged, deduplicated, residual-certified FS critical points."""
    pts, status = kernels.newton_connection(
        coeffs, seeds, 1, float(fs_n), NEWTON_MAX_ITER, NEWTON_STEP_TOL, escape
    )
    pts = pts[status == kernels.OK]
    if pts.size == 0:
        return pts
    unique, _ = polytools.dedupe_sorted(pts, 1e-6)
    local = polytools.circle_max(
        lambda zz: _fs_residual(coeffs, fs_n, kernels, zz), unique, rho=rho
    )
    resid = np.abs(_fs_residual(coeffs, fs_n, kernels, unique))
    ok = resid <= RESIDUAL_RTOL * local
    if not ok.all():
        log.warning("dropping %d uncertified FS critical(s)", int((~ok).sum()))
        unique = unique[ok]
    return unique


def su2_critical_points(p):
    """All connection critical points, both charts, canonically assigned.

    Chart 1 runs the identical solver on the reversed coefficients; chart 0
    keeps |z| <= 1 and chart 1 keeps |w| < 1, so double counting can only
    come from independent rounding at the chart boundary.  Near-coincident
    cross-chart pairs are merged when they agree to the transition tolerance
    and raise ChartInconsistency when they sit in the ambiguous band.
    """
    _, kernels = backend.get_kernels()
    spacing = 0.25 / math.sqrt(p.n)
    seeds = _grid_seeds(CHART_GRID_RADIUS, spacing)
    rho = min(1e-2, spacing)
    pts0 = _certified_criticals(
        p.coefficients, p.n, kernels, seeds, CHART_ESCAPE_RADIUS, rho
    )
    pts0 = pts0[np.abs(pts0) <= 1.0]
    pts1 = _certified_criticals(
        p.reversed().coefficients, p.n, kernels, seeds, CHART_ESCAPE_RADIUS, rho
    )
    pts1 = pts1[np.abs(pts1) < 1.0]

    if pts0.size and pts1.size:
        # chordal distance between chart-0 z and chart-1 w (z = 1/w there)
        num = np.abs(np.outer(pts0, pts1) - 1.0)
        den = np.sqrt(
            np.outer(1.0 + np.abs(pts0) ** 2, 1.0 + np.abs(pts1) ** 2)
        )
        nearest = (num / den).min(axis=0)
        ambiguous = (nearest > DEDUPE_CHORDAL) & (nearest <= SUSPECT_CHORDAL)
        if ambiguous.any():
            k = int(np.argmax(ambiguous))
            raise ChartInconsistency(
                f"chart-1 point {pts1[k]} is chordal {nearest[k]:.3e} from the "
                f"chart-0 set: neither a transition match within "
                f"{TRANSITION_TOL} nor a separate point"
            )
        pts1 = pts1[nearest > DEDUPE_CHORDAL]
    return [ChartPoint(chart=0, coordinate=complex(z)) for z in pts0] + [
        ChartPoint(chart=1, coordinate=complex(w)) for w in pts1
    ]


def su2_zeros(p):
    """All n zeros on the sphere, counted with multiplicity.

    Aberth in chart 0 on the structurally trimmed polynomial; structural
    leading zeros are zeros at infinity (chart-1 origin), structural trailing
    zeros are chart-0 origin roots.  Found roots with |z| > 1 are polished in
    chart 1 against the reversed coefficients.  The construction yields
    exactly n points; CountMismatch guards the bookkeeping.
    """
    _, kernels = backend.get_kernels()
    c = np.asarray(p.coefficients, dtype=complex)
    core, valuation, dropped_top = polytools.trim(c, rel_tol=0.0)
    if len(core) >= 2:
        roots = polytools.all_roots(core / np.abs(core).max(), kernels)
    else:
        roots = np.empty(0, dtype=complex)

    out = [ChartPoint(chart=0, coordinate=0j)] * valuation
    out += [ChartPoint(chart=1, coordinate=0j)] * dropped_top
    rev = p.reversed().coefficients
    small = roots[np.abs(roots) <= 1.0]
    big = roots[np.abs(roots) > 1.0]
    if small.size:
        polished, _ = kernels.newton_polish(c, small, 40, NEWTON_STEP_TOL)
        out += [canonical_point(z) for z in polished]
    if big.size:
        polished, _ = kernels.newton_polish(rev, 1.0 / big, 40, NEWTON_STEP_TOL)
        out += [
            ChartPoint(chart=1, coordinate=complex(w)) if abs(w) <= 1.0
            else canonical_point(1.0 / w)
            for w in polished
        ]
    if len(out) != p.n:
        raise CountMismatch(
            f"two-chart union has {len(out)} zeros, expected degree {p.n}"
        )
    mult = valuation + dropped_top
    if mult > 1:
        log.warning("structural multiple zero of order %d", mult)
    return out


def rotate_polynomial(p, a, b):
    """Transform the section by the SU(2) element [[a, b], [-conj b, conj a]].

    The Moebius action on chart 0 is z -> (a z + b)/(-conj(b) z + conj(a)),
    and sections transform with the n-th power of the denominator:
    q(z) = (-conj(b) z + conj(a))^n p((a z + b)/(-conj(b) z + conj(a))).
    Zeros and critical points map as points of the sphere.

    The coefficients are built with a denominator-cleared Horner recurrence,
    T_{k+1} = T_k * num + c_{n-k-1} * den^{k+1}, in extended precision:
    in doubles the binomial-sized intermediates cancel against outputs that
    are orders of magnitude smaller and wreck several leading digits.
    """
    import mpmath as mp

    norm = abs(a) ** 2 + abs(b) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise ArgumentOutOfRange("rotation parameters must satisfy |a|^2+|b|^2=1")
    n = p.n
    with mp.workdps(40):
        am, bm = mp.mpc(complex(a)), mp.mpc(complex(b))
        num = (bm, am)
        den = (mp.conj(am), -mp.conj(bm))
        den_pow = [mp.mpc(1)]
        T = [mp.mpc(complex(p.coefficients[n]))]
        for k in range(n):
            nxt = [mp.mpc(0)] * (k + 2)
            for i, v in enumerate(den_pow):
                nxt[i] += v * den[0]
                nxt[i + 1] += v * den[1]
            den_pow = nxt
            nxt = [mp.mpc(0)] * (k + 2)
            for i, v in enumerate(T):
                nxt[i] += v * num[0]
                nxt[i + 1] += v * num[1]
            cj = mp.mpc(complex(p.coefficients[n - k - 1]))
            for i, v in enumerate(den_pow):
                nxt[i] += cj * v
            T = nxt
    q = np.array([complex(t) for t in T])
    return Su2Polynomial(n=n, coefficients=q, seed=p.seed)


class _RescaledPattern:
    """Duck-typed pattern for the estimator: rescaled local point sets."""

    __slots__ = ("zeros", "criticals", "holo_criticals", "window_radius")

    def __init__(self, zeros, criticals, window_radius):
        self.zeros = zeros
        self.criticals = criticals
        self.holo_criticals = np.empty(0, dtype=complex)
        self.window_radius = window_radius


def _local_zeros(coeffs, disk_radius, kernels):
    """Roots in |z| <= disk_radius via the working-disk rescale and trim."""
    c = np.asarray(coeffs, dtype=complex)
    work = 1.05 * disk_radius
    with np.errstate(divide="ignore"):
        log_mags = np.log(np.abs(c))
    nz = np.abs(c) > 0
    phases = np.where(nz, c / np.where(nz, np.abs(c), 1.0), 0.0)
    scaled, _ = polytools.scaled_coefficients(log_mags, phases, work)
    core, valuation, _ = polytools.trim(scaled, rel_tol=LOCAL_TRIM_RTOL)
    zeta = polytools.all_roots(core, kernels) if len(core) >= 2 else np.empty(0, complex)
    inside = zeta[np.abs(zeta) <= disk_radius / work]
    if inside.size:
        polished, _ = kernels.newton_polish(core, inside, 40, NEWTON_STEP_TOL)
        roots = work * polished
        roots = roots[np.abs(roots) <= disk_radius]
    else:
        roots = np.empty(0, dtype=complex)
    if valuation:
        roots = np.concatenate([np.zeros(valuation, complex), roots])
    return roots


def _local_criticals(coeffs, fs_n, disk_radius, kernels):
    """FS criticals in |z| <= disk_radius, Newton on the full coefficients.

    On a small disk the high-order terms underflow inside Horner without
    harming accuracy, so no trimming or rescaling is needed here.
    """
    spacing = 0.25 / math.sqrt(fs_n)
    margin = 1.2 / math.sqrt(5.0 * fs_n / (3.0 * np.pi))
    seeds = _grid_seeds(disk_radius + margin, spacing)
    pts, status = kernels.newton_connection(
        np.asarray(coeffs, dtype=complex), seeds, 1, float(fs_n),
        NEWTON_MAX_ITER, NEWTON_STEP_TOL, disk_radius + 2.0 * margin,
    )
    pts = pts[status == kernels.OK]
    pts = pts[np.abs(pts) <= disk_radius]
    if pts.size == 0:
        return pts
    unique, _ = polytools.dedupe_sorted(pts, 1e-6)
    rho = min(1e-2, 0.5 * margin)
    local = polytools.circle_max(
        lambda zz: _fs_residual(coeffs, fs_n, kernels, zz), unique, rho=rho
    )
    resid = np.abs(_fs_residual(coeffs, fs_n, kernels, unique))
    ok = resid <= RESIDUAL_RTOL * local
    if not ok.all():
        log.warning("dropping %d uncertified local FS critical(s)", int((~ok).sum()))
        unique = unique[ok]
    return unique


def _one_rescaled(args):
    n, sample_seed, r0 = args
    _, kernels = backend.get_kernels()
    poly = sample_su2(n, sample_seed)
    zeros = _local_zeros(poly.coefficients, r0, kernels)
    crits = _local_criticals(poly.coefficients, n, r0, kernels)
    return zeros, crits


def su2_rescaled_correlation(n, samples, bin_edges, seed, workers=1):
    """Empirical pair correlation of sqrt(n)-rescaled local zero/critical sets.

    Collects both point sets in the chart-0 disk of radius 2 r_max / sqrt(n),
    rescales coordinates by sqrt(n), and feeds the minus-sampling estimator;
    as n grows the curve approaches the flat-model evaluation.  Per-sample
    seeds are fixed by (seed, index), so the result is independent of the
    worker count.
    """
    _check_degree(n)
    if n < 100:
        raise ArgumentOutOfRange(f"degree {n} below the rescaling minimum 100")
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise BinningInvalid("bin edges must be ascending with >= 2 entries")
    if edges[0] < 0.2 - 1e-12 or edges[-1] > 4.0 + 1e-12:
        raise BinningInvalid(f"bins [{edges[0]}, {edges[-1]}] outside [0.2, 4]")
    samples = int(samples)
    r_max = float(edges[-1])
    sqrt_n = math.sqrt(n)
    r0 = 2.0 * r_max / sqrt_n

    jobs = [(n, (int(seed) + i) & streams.MASK64, r0) for i in range(samples)]
    results = _map_jobs(_one_rescaled, jobs, workers)
    patterns = [
        _RescaledPattern(sqrt_n * z, sqrt_n * c, 2.0 * r_max) for z, c in results
    ]
    curve = estimate_ktilde(patterns, edges, which="chern")
    curve.metadata.update(
        {"n": int(n), "seed": int(seed), "disk_radius": r0, "rescale": sqrt_n}
    )
    return curve


def _map_jobs(fn, jobs, workers):
    if workers <= 1 or len(jobs) < 2 * workers:
        return [fn(job) for job in jobs]
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(1, len(jobs) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=chunk))


def _one_count(args):
    n, sample_seed = args
    poly = sample_su2(n, sample_seed)
    return len(su2_zeros(poly)), len(su2_critical_points(poly))


def count_survey(n, samples, seed, workers=1):
    """Per-sample (zero count, critical count) over a seeded batch."""
    jobs = [(n, (int(seed) + i) & streams.MASK64) for i in range(int(samples))]
    pairs = _map_jobs(_one_count, jobs, workers)
    out = np.asarray(pairs, dtype=float)
    return out[:, 0], out[:, 1]


def critical_count_stats(n, samples, seed, workers=1):
    """Mean and stderr of the sphere-wide critical count over a batch."""
    _, counts = count_survey(n, samples, seed, workers)
    return float(counts.mean()), float(counts.std(ddof=1) / np.sqrt(len(counts)))
