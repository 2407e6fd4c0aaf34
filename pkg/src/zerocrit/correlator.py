"""Exact and Monte Carlo evaluation of the two-point correlation.

The target quantity at separation r is

    K(r) = E[(xi* M_P xi) · |xi* M_Q xi|] / detA,

with xi a standard complex 3-vector Gaussian and (M_P, M_Q, detA) from the
covariance bundle.  Unitarily diagonalizing M_Q = U diag(d) U* and writing
p = diag(U* M_P U), phase independence of the coordinates reduces the Gaussian
expectation to

    E[...] = sum_i p_i · E[X_i · |d_1 X_1 + d_2 X_2 + d_3 X_3|],

with X_j independent unit exponentials.  The inner expectation over any one
exponential against |linear form| has a piecewise closed form; because M_Q has
rank <= 2 for every covariance bundle (Q itself has rank 2), the whole
evaluation collapses to closed forms.  Synthetic full-rank M_Q inputs fall
back to adaptive quadrature over the two outer variables, split along the sign
change of the linear form.

The long-range constant is 5/3 = E[X·|2Y−Z|]; the module also exposes the
companion moment E[X·|2Y−X|] = 16/9 that a miscopied integrand would produce,
as a guard against regressions in the variable ordering.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import numerics, streams
from .covariance import higher_dim_spec
from .errors import (
    ArgumentOutOfRange,
    CovarianceInvalid,
    DimensionOutOfRange,
    QuadratureNoConvergence,
    SeparationOutOfRange,
    TooFewSamples,
)
from .estimator import CorrelationCurve

LONG_RANGE_CONSTANT = 5.0 / 3.0
TOL_MIN, TOL_MAX = 1e-10, 1e-4
MC_MIN_SAMPLES = 10_000
CM_MIN_SAMPLES = 100_000
MC_BLOCK = 1 << 16

# Eigenvalues of M_Q below this relative size are the structural zero mode.
ZERO_EIG_RTOL = 5e-14


@dataclass(frozen=True)
class EvalResult:
    """One evaluation of the correlation at separation r."""

    r: float
    value: float
    method: str
    stderr: float = 0.0
    samples: int = 0


@dataclass(frozen=True)
class CmEstimate:
    """Monte Carlo estimate of the dimension-m long-range constant."""

    m: int
    value: float
    stderr: float
    samples: int
    seed: int
    metadata: dict = field(default_factory=dict)


# --- closed-form exponential moments ---------------------------------------
#
# X, Y unit exponentials; D, L > 0.
#   E|aX + s|            : same sign  -> D + S          (D=|a|, S=|s|)
#                          opposite   -> 2D e^{-S/D} - D + S
#   E[X|aX + s|]         : same sign  -> 2D + S
#                          opposite   -> (4D + 2S) e^{-S/D} - 2D + S
#   E|aX + bY|           : same sign  -> D + L
#                          opposite   -> 2D²/(D+L) - D + L
#   E[X|aX + bY|]        : same sign  -> 2D + L
#                          opposite   -> 4D²/(D+L) + 2LD²/(D+L)² - 2D + L


def _exp_abs_linear(a, s, weighted):
    """E[X^w · |a X + s|] for exponential X, w in {0, 1}."""
    D = abs(a)
    S = abs(s)
    if D == 0.0:
        return S
    if a * s >= 0.0:
        return (2.0 * D if weighted else D) + S
    e = np.exp(-S / D)
    if weighted:
        return (4.0 * D + 2.0 * S) * e - 2.0 * D + S
    return 2.0 * D * e - D + S


def _pair_moment(a, b, weighted):
    """E[X^w · |a X + b Y|] for independent exponentials X, Y; a, b nonzero."""
    D, L = abs(a), abs(b)
    if a * b > 0.0:
        return (2.0 * D if weighted else D) + L
    if weighted:
        return 4.0 * D * D / (D + L) + 2.0 * L * D * D / (D + L) ** 2 - 2.0 * D + L
    return 2.0 * D * D / (D + L) - D + L


def _triple_moment(d_inner, d_x, d_y, weighted_x, tol, scale):
    """E[X^w · |d_inner Z + d_x X + d_y Y|] by closed-form inner integral and
    adaptive quadrature over (x, y); used only for full-rank M_Q."""

    def integrand(y, x):
        s = d_x * x + d_y * y
        val = _exp_abs_linear(d_inner, s, weighted=False)
        w = x if weighted_x else 1.0
        return w * np.exp(-x - y) * val

    epsabs = 0.25 * tol * scale
    epsrel = 0.25 * tol
    pieces = []
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if d_x * d_y < 0.0:
                # |d_x x + d_y y| changes no sign, but the *inner* form
                # d_inner z + s kinks where s = 0, i.e. on y = -d_x x / d_y.
                slope = -d_x / d_y
                pieces.append(
                    integrate.dblquad(
                        integrand, 0, np.inf, 0, lambda x: slope * x,
                        epsabs=epsabs, epsrel=epsrel,
                    )
                )
                pieces.append(
                    integrate.dblquad(
                        integrand, 0, np.inf, lambda x: slope * x, np.inf,
                        epsabs=epsabs, epsrel=epsrel,
                    )
                )
            else:
                # Same-sign d_x, d_y: s keeps one sign over the quadrant, so
                # any kink of the inner form sits on at most one line that
                # QUADPACK's subdivision resolves on its own.
                pieces.append(
                    integrate.dblquad(
                        integrand, 0, np.inf, 0, np.inf,
                        epsabs=epsabs, epsrel=epsrel,
                    )
                )
        except integrate.IntegrationWarning as exc:
            raise QuadratureNoConvergence(str(exc)) from exc
    total = sum(p[0] for p in pieces)
    err = sum(p[1] for p in pieces)
    if err > 10.0 * max(epsabs, abs(total) * epsrel):
        raise QuadratureNoConvergence(
            f"quadrature error estimate {err:.3e} exceeds budget"
        )
    return total


def _weighted_abs_moment(i, d, tol):
    """T_i = E[X_i · |d_1 X_1 + d_2 X_2 + d_3 X_3|], X_j unit exponentials."""
    scale = float(np.max(np.abs(d)))
    if scale == 0.0:
        return 0.0
    nz = [j for j in range(len(d)) if abs(d[j]) > ZERO_EIG_RTOL * scale]
    di = d[i] if i in nz else 0.0

    if nz and (all(d[j] > 0 for j in nz) or all(d[j] < 0 for j in nz)):
        # One sign: |sum d_j X_j| = sum |d_j| X_j, all moments factor.
        return abs(di) + sum(abs(d[j]) for j in nz)

    if di == 0.0:
        # Weight factorizes: E[X_i] = 1 times the unweighted moment.
        if not nz:
            return 0.0
        if len(nz) == 1:
            return abs(d[nz[0]])
        if len(nz) == 2:
            a, b = d[nz[0]], d[nz[1]]
            inner, outer = (a, b) if abs(a) >= abs(b) else (b, a)
            return _pair_moment(inner, outer, weighted=False)
        k = max(nz, key=lambda j: abs(d[j]))
        rest = [j for j in nz if j != k]
        return _triple_moment(
            d[k], d[rest[0]], d[rest[1]], weighted_x=False, tol=tol, scale=scale
        )

    others = [j for j in nz if j != i]
    if not others:
        return 2.0 * abs(di)
    if len(others) == 1:
        return _pair_moment(di, d[others[0]], weighted=True)
    # Full rank: closed form over the largest non-weighted coefficient,
    # adaptive quadrature over x_i (weighted) and the remaining variable.
    k = max(others, key=lambda j: abs(d[j]))
    rest = [j for j in others if j != k][0]
    return _triple_moment(
        d[k], di, d[rest], weighted_x=True, tol=tol, scale=scale
    )


def quadratic_abs_expectation(M_P, M_Q, tol=1e-8):
    """E[(xi* M_P xi)·|xi* M_Q xi|] for a standard complex 3-vector Gaussian.

    Exact (closed form) whenever M_Q has rank <= 2, which covers every
    covariance bundle; full-rank M_Q falls back to adaptive quadrature with
    the requested tolerance.
    """
    M_P = numerics.require_hermitian(M_P)
    M_Q = numerics.require_hermitian(M_Q)
    d, U = numerics.hermitian_eig(M_Q)
    p = np.real(np.diagonal(U.conj().T @ M_P @ U)).copy()
    pscale = float(np.max(np.abs(p))) if p.size else 0.0
    total = 0.0
    for i in range(len(d)):
        if abs(p[i]) <= 1e-15 * pscale:
            continue
        total += p[i] * _weighted_abs_moment(i, d, tol)
    return float(total)


def _validate_cov(cov):
    for name in ("M_P", "M_Q"):
        M = getattr(cov, name)
        if not np.all(np.isfinite(M)):
            raise CovarianceInvalid(f"{name} has non-finite entries")
        if numerics.hermitian_defect(M) > 1e-10 * max(1.0, float(np.max(np.abs(M)))):
            raise CovarianceInvalid(f"{name} is not Hermitian")
    if not np.isfinite(cov.detA) or cov.detA <= 0.0:
        raise CovarianceInvalid(f"detA = {cov.detA!r} is not positive")


def _validate_tol(tol):
    if not TOL_MIN <= tol <= TOL_MAX:
        raise ArgumentOutOfRange(f"tolerance {tol!r} outside [{TOL_MIN}, {TOL_MAX}]")


def ktilde_quadrature(cov, tol=1e-8):
    """Exact correlation value at cov.r, deterministic (stderr 0)."""
    _validate_tol(tol)
    _validate_cov(cov)
    value = quadratic_abs_expectation(cov.M_P, cov.M_Q, tol) / cov.detA
    return EvalResult(r=cov.r, value=value, method="quadrature")


def ktilde_monte_carlo(cov, samples, seed):
    """Monte Carlo correlation value with a Wick-moment control variate.

    The product form Y = (xi* M_P xi)(xi* M_Q xi) has the exact mean
    tr(M_P)tr(M_Q) + tr(M_P M_Q); subtracting the fitted multiple of
    (Y - E Y) removes most of the shared variance.  Sampling is blocked over
    keyed substreams and reduced in block order, so the result depends only
    on (seed, samples), not the worker layout.
    """
    samples = int(samples)
    if samples < MC_MIN_SAMPLES:
        raise TooFewSamples(f"samples = {samples} below minimum {MC_MIN_SAMPLES}")
    _validate_cov(cov)

    mu_y = float(
        (np.trace(cov.M_P) * np.trace(cov.M_Q) + np.trace(cov.M_P @ cov.M_Q)).real
    )
    sums = np.zeros(5)  # sum_w, sum_y, sum_ww, sum_yy, sum_wy
    for block, start, stop in streams.block_ranges(samples, MC_BLOCK):
        gen = streams.generator(seed, streams.TAG_KTILDE_MC, block)
        xi = streams.complex_normals(gen, (stop - start, 3))
        qp = np.einsum("ni,ij,nj->n", xi.conj(), cov.M_P, xi).real
        qq = np.einsum("ni,ij,nj->n", xi.conj(), cov.M_Q, xi).real
        w = qp * np.abs(qq) / cov.detA
        y = qp * qq
        part = np.array(
            [w.sum(), y.sum(), (w * w).sum(), (y * y).sum(), (w * y).sum()]
        )
        sums = sums + part

    n = samples
    mean_w = sums[0] / n
    mean_y = sums[1] / n
    var_w = max(sums[2] / n - mean_w**2, 0.0) * n / (n - 1)
    var_y = max(sums[3] / n - mean_y**2, 0.0) * n / (n - 1)
    cov_wy = (sums[4] / n - mean_w * mean_y) * n / (n - 1)
    if var_y > 0.0:
        beta = cov_wy / var_y
        value = mean_w - beta * (mean_y - mu_y)
        resid_var = max(var_w - cov_wy**2 / var_y, 0.0)
    else:
        value = mean_w
        resid_var = var_w
    stderr = float(np.sqrt(resid_var / n))
    return EvalResult(
        r=cov.r, value=float(value), method="monte-carlo",
        stderr=stderr, samples=n,
    )


def ktilde_curve(r_grid, tol=1e-8):
    """Quadrature evaluation on an ascending grid in [0.01, 6].

    Returns a point-sampled curve: bin_edges holds the grid itself and the
    metadata marks the layout, so binned and point curves cannot be mixed up
    in comparisons.
    """
    from .covariance import build_joint_covariance

    grid = np.asarray(r_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise SeparationOutOfRange("empty evaluation grid")
    if np.any(np.diff(grid) <= 0):
        raise SeparationOutOfRange("grid must be strictly ascending")
    if grid[0] < 0.01 or grid[-1] > 6.0:
        raise SeparationOutOfRange(
            f"grid [{grid[0]}, {grid[-1]}] outside [0.01, 6]"
        )
    values = np.array(
        [ktilde_quadrature(build_joint_covariance(r), tol).value for r in grid]
    )
    return CorrelationCurve(
        bin_edges=grid,
        values=values,
        stderr=np.zeros_like(values),
        pair_counts=np.zeros(values.shape, dtype=int),
        normalization="ktilde",
        metadata={"kind": "point", "tol": tol, "method": "quadrature"},
    )


def ktilde_binned(bin_edges, tol=1e-8, nodes=8):
    """Annulus-averaged exact curve on the given bins.

    The empirical estimator measures the average of the correlation over each
    annulus with weight 2r dr; comparing against point values at bin midpoints
    would bias bins where the curve is convex.  Gauss-Legendre with `nodes`
    points per bin is far below the statistical resolution everywhere.
    """
    from .covariance import build_joint_covariance

    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise SeparationOutOfRange("bin edges must be ascending with >= 2 entries")
    x, wts = np.polynomial.legendre.leggauss(nodes)
    values = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        k = np.array(
            [ktilde_quadrature(build_joint_covariance(ri), tol).value for ri in r]
        )
        integral = 0.5 * (hi - lo) * np.sum(wts * 2.0 * r * k)
        values.append(integral / (hi * hi - lo * lo))
    values = np.asarray(values)
    return CorrelationCurve(
        bin_edges=edges,
        values=values,
        stderr=np.zeros_like(values),
        pair_counts=np.zeros(values.shape, dtype=int),
        normalization="ktilde",
        metadata={"kind": "binned", "tol": tol, "method": "quadrature-annulus-average"},
    )


# --- higher-dimensional constant -------------------------------------------

def _cm_block(gen, m, count, eta_scale=1.0):
    """Sample count values of ||xi||² · |det(H* H - |eta|² I)|."""
    xi = streams.complex_normals(gen, (count, m))
    diag = streams.complex_normals(gen, (count, m)) * np.sqrt(2.0)
    off = streams.complex_normals(gen, (count, m * (m - 1) // 2))
    eta = streams.complex_normals(gen, count) * eta_scale

    H = np.zeros((count, m, m), dtype=complex)
    idx = 0
    for i in range(m):
        H[:, i, i] = diag[:, i]
        for j in range(i + 1, m):
            H[:, i, j] = off[:, idx]
            H[:, j, i] = off[:, idx]
            idx += 1
    G = np.conj(np.transpose(H, (0, 2, 1))) @ H
    G -= (np.abs(eta) ** 2)[:, None, None] * np.eye(m)
    dets = np.abs(np.linalg.det(G))
    return np.sum(np.abs(xi) ** 2, axis=1) * dets


def cm_estimate(m, samples, seed):
    """Monte Carlo long-range constant in dimension m.

    `value` is the plain probabilistic expectation (it equals 5/3 at m = 1);
    metadata additionally records the variant multiplied by the volume factor
    pi^{m+1}/det(diag of variances) = pi^{m+1}/2^m, for comparison with
    conventions that keep that prefactor explicit.
    """
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise DimensionOutOfRange(f"dimension must be an integer, got {m!r}")
    if not 1 <= m <= 4:
        raise DimensionOutOfRange(f"dimension {m} outside [1, 4]")
    samples = int(samples)
    if samples < CM_MIN_SAMPLES:
        raise TooFewSamples(f"samples = {samples} below minimum {CM_MIN_SAMPLES}")

    sum_g = 0.0
    sum_gg = 0.0
    for block, start, stop in streams.block_ranges(samples, MC_BLOCK):
        gen = streams.generator(seed, streams.TAG_CM, block)
        g = _cm_block(gen, m, stop - start)
        sum_g += g.sum()
        sum_gg += (g * g).sum()
    n = samples
    value = sum_g / n
    var = max(sum_gg / n - value**2, 0.0) * n / (n - 1)
    stderr = float(np.sqrt(var / n))
    prefactor = np.pi ** (m + 1) / 2.0**m
    return CmEstimate(
        m=int(m),
        value=float(value),
        stderr=stderr,
        samples=n,
        seed=int(seed),
        metadata={
            "raw_expectation": float(value),
            "volume_prefactor": float(prefactor),
            "prefactored_value": float(prefactor * value),
        },
    )


def cm_estimate_direct(m, samples, seed):
    """Independent straight-line reimplementation of cm_estimate.

    Used as a dual-route check: different bit generator (PCG64), different
    draw order (one flat vector per the diagonal variance listing), different
    assembly, hand determinants at m <= 2.  Statistically identical target.
    """
    if not 1 <= m <= 4:
        raise DimensionOutOfRange(f"dimension {m} outside [1, 4]")
    samples = int(samples)
    spec = higher_dim_spec(m)
    sd = np.sqrt(np.asarray(spec.variances)) / np.sqrt(2.0)
    gen = np.random.Generator(np.random.PCG64(seed))
    z = (gen.standard_normal((samples, len(sd))) +
         1j * gen.standard_normal((samples, len(sd)))) * sd

    xi = z[:, :m]
    eta = z[:, -1]
    H = np.zeros((samples, m, m), dtype=complex)
    col = m
    for i in range(m):
        H[:, i, i:] = z[:, col : col + (m - i)]
        H[:, i:, i] = z[:, col : col + (m - i)]
        col += m - i
    G = np.conj(np.transpose(H, (0, 2, 1))) @ H
    G -= (np.abs(eta) ** 2)[:, None, None] * np.eye(m)
    if m == 1:
        dets = G[:, 0, 0]
    elif m == 2:
        dets = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
    else:
        dets = np.linalg.det(G)
    g = np.sum(np.abs(xi) ** 2, axis=1) * np.abs(dets)
    value = float(np.mean(g))
    stderr = float(np.std(g, ddof=1) / np.sqrt(samples))
    return CmEstimate(
        m=int(m), value=value, stderr=stderr, samples=samples, seed=int(seed),
        metadata={"route": "direct"},
    )
