# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled polynomial root-hunting kernels.

Scalar-loop translation of the numpy fallback with the same call signatures
and status codes; see _kernels_py.py for the reference semantics.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

OK, ESCAPED, SINGULAR, NO_CONVERGENCE = 0, 1, 2, 3

cdef enum:
    STATUS_OK = 0
    STATUS_ESCAPED = 1
    STATUS_SINGULAR = 2
    STATUS_NO_CONVERGENCE = 3


cdef inline void _horner3_one(const double complex* c, Py_ssize_t n,
                              double complex z, double complex* out) noexcept nogil:
    cdef double complex p = c[n - 1]
    cdef double complex dp = 0
    cdef double complex ddp = 0
    cdef Py_ssize_t j
    for j in range(n - 2, -1, -1):
        ddp = ddp * z + dp
        dp = dp * z + p
        p = p * z + c[j]
    out[0] = p
    out[1] = dp
    out[2] = 2.0 * ddp


def horner3(coeffs, z):
    """Evaluate p, p', p'' at each z by a fused Horner recurrence."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cc = np.ascontiguousarray(
        coeffs, dtype=np.complex128)
    zarr = np.asarray(z, dtype=np.complex128)
    shape = zarr.shape
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(
        zarr.ravel())
    cdef Py_ssize_t m = zz.shape[0]
    cdef Py_ssize_t nc = cc.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] p = np.empty(m, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] dp = np.empty(m, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ddp = np.empty(m, dtype=np.complex128)
    cdef double complex out[3]
    cdef Py_ssize_t i
    with nogil:
        for i in range(m):
            _horner3_one(&cc[0], nc, zz[i], out)
            p[i] = out[0]
            dp[i] = out[1]
            ddp[i] = out[2]
    return p.reshape(shape), dp.reshape(shape), ddp.reshape(shape)


def newton_connection(coeffs, seeds, mode, fs_n, max_iter, step_tol, escape_radius):
    """Newton iteration for g(z) = p'(z) - c(z, zbar) p(z) = 0 (Wirtinger form)."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cc = np.ascontiguousarray(
        coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] z = np.array(
        seeds, dtype=np.complex128).ravel()
    cdef Py_ssize_t m = z.shape[0]
    cdef Py_ssize_t nc = cc.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] status = np.full(
        m, STATUS_NO_CONVERGENCE, dtype=np.uint8)
    cdef int cmode = mode
    cdef double cn = fs_n
    cdef int budget = max_iter
    cdef double tol = step_tol
    cdef double rmax = escape_radius
    cdef double complex out[3]
    cdef double complex zi, c, c_z, c_zbar, g, g_z, g_zbar, dz, zb
    cdef double det, scale, denom, an
    cdef Py_ssize_t i
    cdef int it
    with nogil:
        for i in range(m):
            zi = z[i]
            for it in range(budget):
                _horner3_one(&cc[0], nc, zi, out)
                zb = zi.conjugate()
                if cmode == 0:
                    c = zb
                    c_z = 0
                    c_zbar = 1
                else:
                    denom = 1.0 + zi.real * zi.real + zi.imag * zi.imag
                    c = cn * zb / denom
                    c_z = -cn * zb * zb / (denom * denom)
                    c_zbar = cn / (denom * denom)
                g = out[1] - c * out[0]
                g_z = out[2] - c * out[1] - c_z * out[0]
                g_zbar = -c_zbar * out[0]
                det = (g_z.real * g_z.real + g_z.imag * g_z.imag
                       - g_zbar.real * g_zbar.real - g_zbar.imag * g_zbar.imag)
                scale = (g_z.real * g_z.real + g_z.imag * g_z.imag
                         + g_zbar.real * g_zbar.real + g_zbar.imag * g_zbar.imag)
                if scale < 1e-300:
                    scale = 1e-300
                if det < 1e-14 * scale and det > -1e-14 * scale:
                    status[i] = STATUS_SINGULAR
                    break
                dz = (g_zbar * g.conjugate() - g_z.conjugate() * g) / det
                zi = zi + dz
                an = abs(zi)
                if an > rmax:
                    status[i] = STATUS_ESCAPED
                    break
                if abs(dz) <= tol * (1.0 if an < 1.0 else an):
                    status[i] = STATUS_OK
                    break
            z[i] = zi
    return z, status


def newton_polish(coeffs, seeds, max_iter, step_tol):
    """Plain Newton p(z)/p'(z) polish for holomorphic roots."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cc = np.ascontiguousarray(
        coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] z = np.array(
        seeds, dtype=np.complex128).ravel()
    cdef Py_ssize_t m = z.shape[0]
    cdef Py_ssize_t nc = cc.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] status = np.full(
        m, STATUS_NO_CONVERGENCE, dtype=np.uint8)
    cdef int budget = max_iter
    cdef double tol = step_tol
    cdef double complex out[3]
    cdef double complex zi, dz
    cdef double an
    cdef Py_ssize_t i
    cdef int it
    with nogil:
        for i in range(m):
            zi = z[i]
            for it in range(budget):
                _horner3_one(&cc[0], nc, zi, out)
                if abs(out[1]) <= 1e-300:
                    status[i] = STATUS_SINGULAR
                    break
                dz = out[0] / out[1]
                zi = zi - dz
                an = abs(zi)
                if abs(dz) <= tol * (1.0 if an < 1.0 else an):
                    status[i] = STATUS_OK
                    break
            z[i] = zi
    return z, status


def aberth(coeffs, init, max_iter, tol):
    """Aberth-Ehrlich simultaneous iteration for all roots of p.

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
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cc = np.ascontiguousarray(
        coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] rc = np.ascontiguousarray(
        cc[::-1])
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ac = np.abs(cc)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ar = np.ascontiguousarray(ac[::-1])
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] z = np.array(
        init, dtype=np.complex128).ravel()
    cdef Py_ssize_t n = z.shape[0]
    if n == 0:
        return z, 0, True
    cdef Py_ssize_t nc = cc.shape[0]
    cdef double deg = nc - 1
    cdef double settle = 2.0 * nc * 2.220446049250313e-16
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] nk = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] bad = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] settled = np.zeros(n, dtype=np.uint8)
    cdef int budget = max_iter
    cdef double rtol = tol
    cdef double complex out[3]
    cdef double complex sk, denom, dz, zk, num, res
    cdef double lim, an, ap, adp, ank, ad, cap, aw, mag
    cdef Py_ssize_t i, j
    cdef int it
    cdef bint done = False
    for it in range(1, budget + 1):
        done = True
        with nogil:
            for i in range(n):
                bad[i] = 0
                settled[i] = 0
                zk = z[i]
                if abs(zk) <= 1.0:
                    _horner3_one(&cc[0], nc, zk, out)
                    denom = out[1]
                    num = out[0]
                    res = out[0]
                    aw = abs(zk)
                    mag = ac[nc - 1]
                    for j in range(nc - 2, -1, -1):
                        mag = mag * aw + ac[j]
                else:
                    _horner3_one(&rc[0], nc, 1.0 / zk, out)
                    denom = deg * zk * out[0] - out[1]
                    num = zk * zk * out[0]
                    res = out[0]
                    aw = 1.0 / abs(zk)
                    mag = ar[nc - 1]
                    for j in range(nc - 2, -1, -1):
                        mag = mag * aw + ar[j]
                ap = abs(num)
                adp = abs(denom)
                if not (ap == ap and adp == adp and ap < 1e300 and adp < 1e300):
                    nk[i] = 0
                    bad[i] = 1
                elif adp <= 1e-300:
                    nk[i] = 0
                else:
                    nk[i] = num / denom
                    ank = abs(nk[i])
                    if not (ank == ank and ank < 1e290):
                        nk[i] = 0
                        bad[i] = 1
                if not bad[i] and abs(res) <= settle * mag:
                    settled[i] = 1
            for i in range(n):
                zk = z[i]
                if bad[i]:
                    z[i] = 0.7 * zk
                    done = False
                    continue
                sk = 0
                for j in range(n):
                    if j != i:
                        sk = sk + 1.0 / (zk - z[j])
                denom = 1.0 - nk[i] * sk
                if abs(denom) <= 1e-300 or not (abs(denom) == abs(denom)):
                    dz = nk[i]
                else:
                    dz = nk[i] / denom
                ad = abs(dz)
                if not (ad == ad):
                    dz = nk[i]
                    ad = abs(dz)
                cap = 2.0 * (1.0 + abs(zk))
                if ad > cap:
                    dz = dz * (cap / ad)
                    ad = cap
                zk = zk - dz
                z[i] = zk
                an = abs(zk)
                lim = rtol * (1.0 if an < 1.0 else an)
                if not (ad <= lim or settled[i]):
                    done = False
        if done:
            return np.asarray(z), it, True
    return np.asarray(z), budget, False
