"""Small dense complex-matrix kernel.

Hermitian eigendecomposition (cyclic Jacobi), PSD square root, Schur
complement, determinant and linear solve: everything the covariance and
evaluator layers need, for dimensions up to ~30.

Matrices are plain complex numpy arrays.  Tolerances are relative to max|M| so
the same code survives the e^{r²} dynamic range of the covariance blocks; the
Jacobi rotation criterion is relative to the local diagonal, which preserves
high relative accuracy on strongly graded matrices.
"""

from typing import NamedTuple

import numpy as np

from .errors import (
    NoConvergence,
    NonHermitianInput,
    NotPositiveSemidefinite,
    Singular,
    SingularA,
)

HERMITIAN_RTOL = 1e-12
PSD_CLAMP_RTOL = 1e-10
SCHUR_PIVOT_RTOL = 1e-13
MAX_JACOBI_SWEEPS = 100


class EigDecomposition(NamedTuple):
    """Eigenvalues in ascending order and the matching unitary basis."""

    eigenvalues: np.ndarray
    basis: np.ndarray


def as_matrix(M):
    """Validate and return a finite 2-D complex array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def hermitian_defect(M):
    """max|M - M*|, the absolute deviation from Hermitian symmetry."""
    return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0


def require_hermitian(M, rtol=HERMITIAN_RTOL):
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise NonHermitianInput(f"matrix is not square: {A.shape}")
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    if hermitian_defect(A) > rtol * max(scale, np.finfo(float).tiny):
        raise NonHermitianInput(
            f"matrix deviates from Hermitian symmetry by {hermitian_defect(A):.3e} "
            f"(allowed {rtol:.1e} * {scale:.3e})"
        )
    return A


def hermitian_eig(M):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns eigenvalues ascending and a unitary basis U with U D U* = M.
    Raises NonHermitianInput if the symmetry check fails and NoConvergence if
    the sweep budget is exhausted.
    """
    A = require_hermitian(M).copy()
    n = A.shape[0]
    U = np.eye(n, dtype=complex)
    if n <= 1:
        vals = A.real.diagonal().copy()
        return EigDecomposition(vals, U)

    for _ in range(MAX_JACOBI_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                # Relative-to-local-diagonal threshold: keeps tiny but
                # meaningful couplings on graded matrices, skips rounding
                # noise so sweeps quiesce.
                local = np.sqrt(abs(A[p, p].real) * abs(A[q, q].real))
                if local == 0.0:
                    local = max(abs(A[p, p].real), abs(A[q, q].real))
                if abs(apq) <= 1e-15 * local or apq == 0.0:
                    continue
                rotated = True

                # Phase that makes the (p, q) entry real, then a real
                # Jacobi rotation on the 2x2 block.
                phase = apq / abs(apq)
                b = abs(apq)
                tau = (A[q, q].real - A[p, p].real) / (2.0 * b)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                # U_rot columns: col p = (c, -s*conj(phase)), col q = (s, c*conj(phase))
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * np.conj(phase) * col_q
                A[:, q] = s * col_p + c * np.conj(phase) * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * phase * row_q
                A[q, :] = s * row_p + c * phase * row_q

                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real

                ucol_p = U[:, p].copy()
                ucol_q = U[:, q].copy()
                U[:, p] = c * ucol_p - s * np.conj(phase) * ucol_q
                U[:, q] = s * ucol_p + c * np.conj(phase) * ucol_q
        if not rotated:
            break
    else:
        raise NoConvergence(
            f"Jacobi eigensolver did not converge in {MAX_JACOBI_SWEEPS} sweeps"
        )

    vals = A.real.diagonal().copy()
    order = np.argsort(vals, kind="stable")
    return EigDecomposition(vals[order], U[:, order])


def psd_sqrt(M):
    """Hermitian PSD square root S with S·S = M.

    Eigenvalues in the band [-1e-10·max|M|, 0) are clamped to zero (the
    covariance matrix is exactly singular at r = 0); anything below the band
    raises NotPositiveSemidefinite.
    """
    vals, U = hermitian_eig(M)
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    band = PSD_CLAMP_RTOL * scale
    if np.any(vals < -band):
        worst = float(vals.min())
        raise NotPositiveSemidefinite(
            f"eigenvalue {worst:.3e} below clamp band -{band:.3e}"
        )
    clamped = np.clip(vals, 0.0, None)
    S = (U * np.sqrt(clamped)) @ U.conj().T
    return 0.5 * (S + S.conj().T)


def schur_complement(A, B, C):
    """C - B* A^{-1} B, symmetrized.

    A must be Hermitian positive definite relative to its own scale; a
    smallest eigenvalue below 1e-13·max|A| raises SingularA.
    """
    A = require_hermitian(A)
    B = as_matrix(B)
    C = as_matrix(C)
    if A.shape[0] != B.shape[0] or C.shape[0] != B.shape[1] or C.shape[0] != C.shape[1]:
        raise ValueError(
            f"non-conformable blocks: A {A.shape}, B {B.shape}, C {C.shape}"
        )
    vals, _ = hermitian_eig(A)
    scale = float(np.max(np.abs(A)))
    if vals[0] < SCHUR_PIVOT_RTOL * scale:
        raise SingularA(
            f"smallest eigenvalue {vals[0]:.3e} below {SCHUR_PIVOT_RTOL:.0e} * max|A| = "
            f"{SCHUR_PIVOT_RTOL * scale:.3e}"
        )
    X = solve(A, B)
    L = C - B.conj().T @ X
    return 0.5 * (L + L.conj().T)


def det(M):
    """Determinant via LU with partial pivoting."""
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"determinant of non-square matrix {A.shape}")
    return complex(np.linalg.det(A))


def solve(A, rhs):
    """Solve A x = rhs; raises Singular when A is numerically singular."""
    A = as_matrix(A)
    b = np.asarray(rhs, dtype=complex)
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise Singular(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise Singular("solve produced non-finite entries")
    return x
