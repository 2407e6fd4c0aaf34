"""Pure numpy implementation of the polynomial root-hunting kernels.

Semantics shared with the compiled extension: coefficients ascending,
complex128 throughout.  All per-point arithmetic is elementwise, so results
do not depend on how callers batch the points.

Newton status codes: 0 converged, 1 escaped the search disk, 2 Wirtinger
Jacobian (locally) singular, 3 iteration budget exhausted.
"""

import numpy as np

OK, ESCAPED, SINGULAR, NO_CONVERGENCE = 0, 1, 2, 3


def horner3(coeffs, z):
    """Evaluate p, p', p'' at each z by a fused Horner recurrence."""
    z = np.asarray(z, dtype=np.complex128)
    p = np.full(z.shape, coeffs[-1], dtype=np.complex128)
    dp = np.zeros(z.shape, dtype=np.complex128)
    ddp = np.zeros(z.shape, dtype=np.complex128)
    for j in range(len(coeffs) - 2, -1, -1):
        ddp = ddp * z + dp
        dp = dp * z + p
        p = p * z + coeffs[j]
    return p, dp, 2.0 * ddp


def _connection(z, mode, fs_n):
    """Connection coefficient c and Wirtinger partials (c, c_z, c_zbar)."""
    if mode == 0:
        zb = np.conj(z)
        return zb, np.zeros_like(z), np.ones_like(z)
    denom = 1.0 + np.abs(z) ** 2
    zb = np.conj(z)
    c = fs_n * zb / denom
    c_z = -fs_n * zb * zb / denom**2
    c_zbar = fs_n / denom**2
    return c, c_z, c_zbar


def newton_connection(coeffs, seeds, mode, fs_n, max_iter, step_tol, escape_radius):
    """Newton iteration for g(z) = p'(z) - c(z, zbar) p(z) = 0.

    The real 2-D system is solved in Wirtinger form: with g_z and g_zbar the
    holomorphic and antiholomorphic partials, the update is

        dz = (g_zbar conj(g) - conj(g_z) g) / (|g_z|^2 - |g_zbar|^2).
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    z = np.array(seeds, dtype=np.complex128)
    status = np.full(z.shape, NO_CONVERGENCE, dtype=np.uint8)
    active = np.ones(z.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        za = z[active]
        p, dp, ddp = horner3(coeffs, za)
        c, c_z, c_zbar = _connection(za, mode, fs_n)
        g = dp - c * p
        g_z = ddp - c * dp - c_z * p
        g_zbar = -c_zbar * p
        det = np.abs(g_z) ** 2 - np.abs(g_zbar) ** 2
        scale = np.abs(g_z) ** 2 + np.abs(g_zbar) ** 2
        singular = np.abs(det) <= 1e-14 * np.maximum(scale, 1e-300)
        dz = np.where(
            singular,
            0.0,
            (g_zbar * np.conj(g) - np.conj(g_z) * g) / np.where(singular, 1.0, det),
        )
        znew = za + dz
        escaped = np.abs(znew) > escape_radius
        done = np.abs(dz) <= step_tol * np.maximum(1.0, np.abs(znew))

        idx = np.flatnonzero(active)
        z[idx] = znew
        status[idx[singular]] = SINGULAR
        status[idx[escaped & ~singular]] = ESCAPED
        status[idx[done & ~singular & ~escaped]] = OK
        still = ~(singular | escaped | done)
        active[idx[~still]] = False
    return z, status


def newton_polish(coeffs, seeds, max_iter, step_tol):
    """Plain Newton p(z)/p'(z) polish for holomorphic roots."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    z = np.array(seeds, dtype=np.complex128)
    status = np.full(z.shape, NO_CONVERGENCE, dtype=np.uint8)
    active = np.ones(z.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        za = z[active]
        p, dp, _ = horner3(coeffs, za)
        singular = np.abs(dp) <= 1e-300
        dz = np.where(singular, 0.0, p / np.where(singular, 1.0, dp))
        znew = za - dz
        done = np.abs(dz) <= step_tol * np.maximum(1.0, np.abs(znew))
        idx = np.flatnonzero(active)
        z[idx] = znew
        status[idx[singular]] = SINGULAR
        status[idx[done & ~singular]] = OK
        active[idx[singular | done]] = False
    return z, status


def aberth(coeffs, init, max_iter, tol):
    """Aberth-Ehrlich simultaneous iteration for all roots of p.

    Returns (roots, iterations, converged).  The caller supplies the initial
    configuration (Bini-style ring placement) and should polish afterwards.

    Points outside the unit circle take their Newton ratio from the
    coefficient-reversed polynomial at w = 1/z: with p(z) = z^d pr(w),

        p/p' = z^2 pr / (d z pr - pr'),

    so Horner only ever sees |w| < 1 and bounded coefficients, and a root far
    outside the coefficient scale cannot overflow the evaluation.  Steps are
    capped at twice the point's scale, and any residual non-finite update
    pulls the point toward the origin instead, so a runaway iterate cannot
    poison the coupled sums.

    A point also counts as converged once its residual reaches the Horner
    rounding floor, |p(z)| <= 2 (d+1) eps sum_j |c_j||z|^j: such a point is an
    exact root of a coefficientwise-perturbed polynomial and further steps
    only chase rounding noise, which for ill-conditioned coefficients can
    jitter above any fixed step tolerance forever.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    rev = coeffs[::-1].copy()
    acoeffs = np.abs(coeffs).astype(np.complex128)
    arev = acoeffs[::-1].copy()
    z = np.array(init, dtype=np.complex128)
    n = z.size
    if n == 0:
        return z, 0, True
    deg = coeffs.size - 1
    settle = 2.0 * coeffs.size * np.finfo(float).eps
    eye = np.eye(n, dtype=bool)
    nk = np.zeros(n, dtype=np.complex128)
    for it in range(1, max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            nk[:] = 0.0
            bad = np.zeros(n, dtype=bool)
            settled = np.zeros(n, dtype=bool)
            inner = np.abs(z) <= 1.0
            outer = ~inner
            if inner.any():
                zi = z[inner]
                p, dp, _ = horner3(coeffs, zi)
                mag, _, _ = horner3(acoeffs, np.abs(zi).astype(complex))
                fin = np.isfinite(p) & np.isfinite(dp)
                safe = fin & (np.abs(dp) > 1e-300)
                nk[inner] = np.where(safe, p / np.where(safe, dp, 1.0), 0.0)
                bad[inner] = ~fin
                settled[inner] = fin & (np.abs(p) <= settle * np.abs(mag))
            if outer.any():
                zo = z[outer]
                w = 1.0 / zo
                pr, dpr, _ = horner3(rev, w)
                mag, _, _ = horner3(arev, np.abs(w).astype(complex))
                den = deg * zo * pr - dpr
                fin = np.isfinite(pr) & np.isfinite(dpr) & np.isfinite(den)
                safe = fin & (np.abs(den) > 1e-300)
                nk[outer] = np.where(
                    safe, zo * zo * pr / np.where(safe, den, 1.0), 0.0
                )
                bad[outer] = ~fin
                settled[outer] = fin & (np.abs(pr) <= settle * np.abs(mag))
            bad |= ~np.isfinite(nk) | (np.abs(nk) > 1e290)
            nk[bad] = 0.0
            settled &= ~bad
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            inv[eye] = 0.0
            sk = inv.sum(axis=1)
            denom = 1.0 - nk * sk
            small = np.abs(denom) <= 1e-300
            dz = np.where(small, nk, nk / np.where(small, 1.0, denom))
            dz = np.where(np.isfinite(dz), dz, nk)
            cap = 2.0 * (1.0 + np.abs(z))
            ad = np.abs(dz)
            over = ad > cap
            dz = np.where(over, dz * (cap / np.where(over, ad, 1.0)), dz)
            znew = np.where(bad, 0.7 * z, z - dz)
            step = np.abs(znew - z)
            z = znew
        if (
            not bad.any()
            and np.all(np.isfinite(step))
            and np.all(settled | (step <= tol * np.maximum(1.0, np.abs(z))))
        ):
            return z, it, True
    return z, max_iter, False
