"""Polynomial scaling, trimming, and simultaneous root finding.

Coefficient sequences here are ascending.  The solvers work in a rescaled
frame: substituting z = s*zeta maps the working disk |z| <= s to the unit
disk, after which coefficients irrelevant at that scale (relative magnitude
below TRIM_RTOL anywhere on the disk) are dropped.  Trimming the top end
removes roots far outside the working disk; trimming the bottom end merges
roots indistinguishable from the origin at working precision.  Callers that
need exact total counts account for both via the returned valuation and the
number of dropped leading terms.
"""

import numpy as np

from .errors import RootFindingStalled

TRIM_RTOL = 1e-60
ABERTH_MAX_ITER = 400
ABERTH_TOL = 1e-12


def scaled_coefficients(log_mags, phases, scale):
    """exp(log_mags + j*log(scale)) * phases, normalized to unit max modulus.

    log_mags may contain -inf for structurally zero coefficients.  Returns
    (coeffs, log_max) with max |coeffs| = 1.
    """
    j = np.arange(len(log_mags))
    lm = np.asarray(log_mags, dtype=float) + j * np.log(scale)
    log_max = float(np.max(lm))
    if not np.isfinite(log_max):
        raise ValueError("all coefficients vanish")
    with np.errstate(under="ignore"):
        mags = np.exp(lm - log_max)
    return mags * np.asarray(phases), log_max


def trim(coeffs, rel_tol=TRIM_RTOL):
    """Drop negligible leading and trailing coefficients.

    Returns (core, valuation, dropped_top): coeffs ~ z^valuation * core(z)
    on the unit disk, with dropped_top coefficients removed from the top.
    """
    c = np.asarray(coeffs, dtype=complex)
    mags = np.abs(c)
    cutoff = rel_tol * float(np.max(mags))
    keep = np.flatnonzero(mags > cutoff)
    if keep.size == 0:
        raise ValueError("all coefficients below trim threshold")
    lo, hi = keep[0], keep[-1]
    core = c[lo : hi + 1].copy()
    return core, int(lo), int(len(c) - 1 - hi)


def bini_init(coeffs):
    """Starting configuration for Aberth: Newton-polygon rings.

    Root moduli are estimated from the upper convex hull of (j, log|c_j|);
    each hull edge of horizontal extent m contributes m points equally spaced
    on the circle of the edge's modulus estimate, with a per-edge angular
    offset to break symmetry.
    """
    c = np.asarray(coeffs, dtype=complex)
    n = len(c) - 1
    if n < 1:
        return np.empty(0, dtype=complex)
    with np.errstate(divide="ignore"):
        h = np.log(np.abs(c))
    # Upper hull over points (j, h_j), -inf entries never become vertices.
    hull = []
    for j in range(n + 1):
        if not np.isfinite(h[j]):
            continue
        while len(hull) >= 2:
            (j1, h1), (j2, h2) = hull[-2], hull[-1]
            if (h[j] - h1) * (j2 - j1) >= (h2 - h1) * (j - j1):
                hull.pop()
            else:
                break
        hull.append((j, h[j]))
    init = np.empty(n, dtype=complex)
    pos = 0
    for e in range(len(hull) - 1):
        j1, h1 = hull[e]
        j2, h2 = hull[e + 1]
        m = j2 - j1
        radius = np.exp((h1 - h2) / m)
        angles = 2.0 * np.pi * (np.arange(m) + 0.5) / m + 0.4 * (e + 1)
        init[pos : pos + m] = radius * np.exp(1j * angles)
        pos += m
    assert pos == n, "hull edges must cover every root slot"
    return init


def all_roots(coeffs, kernels, max_iter=ABERTH_MAX_ITER, tol=ABERTH_TOL):
    """All roots of an ascending coefficient sequence via Aberth-Ehrlich.

    The input should already be scaled so the interesting roots are O(1).
    Raises RootFindingStalled if the iteration budget is exhausted.
    """
    c = np.asarray(coeffs, dtype=complex)
    if len(c) < 2:
        return np.empty(0, dtype=complex)
    init = bini_init(c)
    roots, iters, converged = kernels.aberth(c, init, max_iter, tol)
    if not converged:
        raise RootFindingStalled(
            f"Aberth did not converge within {max_iter} iterations "
            f"(degree {len(c) - 1})"
        )
    # Backward-error certificate: |p(z)| <= tol_be * sum |c_j||z|^j means z
    # is an exact root of a coefficientwise-perturbed polynomial.  This
    # catches a stalled configuration that still passed the small-step test.
    # Roots outside the unit circle are certified through the reversed
    # polynomial at 1/z; the common factor |z|^deg cancels from the ratio, so
    # the certificate is the same quantity evaluated without overflow.
    if not np.all(np.isfinite(roots)):
        raise RootFindingStalled("non-finite root in converged configuration")
    backward = np.empty(roots.size)
    inner = np.abs(roots) <= 1.0
    for mask, cj in ((inner, c), (~inner, c[::-1].copy())):
        if not mask.any():
            continue
        pts = roots[mask] if cj is c else 1.0 / roots[mask]
        p, _, _ = kernels.horner3(cj, pts)
        mag, _, _ = kernels.horner3(
            np.abs(cj).astype(complex), np.abs(pts).astype(complex)
        )
        backward[mask] = np.abs(p) / np.maximum(np.abs(mag), 1e-300)
    if np.max(backward) > 1e-8:
        raise RootFindingStalled(
            f"root set failed the backward-error certificate "
            f"(worst {float(np.max(backward)):.3e})"
        )
    return roots


def dedupe_sorted(points, tol):
    """Canonically ordered representatives with pairwise distance > tol.

    Returns (unique_points, multiplicities).  Greedy clustering after a
    lexicographic (re, im) sort; adequate for the well-separated point sets
    produced here, where clusters are numerical duplicates of one root.
    """
    pts = np.asarray(points, dtype=complex)
    if pts.size == 0:
        return pts, np.empty(0, dtype=int)
    order = np.lexsort((pts.imag, pts.real))
    pts = pts[order]
    reps = [pts[0]]
    mult = [1]
    for p in pts[1:]:
        if abs(p - reps[-1]) <= tol:
            mult[-1] += 1
        else:
            reps.append(p)
            mult.append(1)
    return np.asarray(reps), np.asarray(mult)


def circle_max(eval_fn, centers, rho=1e-2, points=8):
    """max |eval_fn| over `points` equally spaced points on each circle.

    eval_fn maps a complex array to an array of values; used as the local
    scale in residual certificates.
    """
    centers = np.asarray(centers, dtype=complex)
    angles = np.exp(2j * np.pi * np.arange(points) / points)
    grid = centers[:, None] + rho * angles[None, :]
    vals = np.abs(eval_fn(grid.ravel())).reshape(grid.shape)
    return vals.max(axis=1)
