"""Joint covariance data for the flat-model Gaussian analytic function.

The Gaussian vector under study is (f(u), g(v); g(u), ∂g(v), ∂̄g(v)) with
g = f' - z̄·f, for the entire Gaussian function with covariance kernel
E[f(z) conj(f(w))] = e^{z w̄}.  The value block (first two coordinates) is
conditioned to vanish; Lambda is the conditional covariance of the derivative
block, and M_P, M_Q carry the weight quadratic forms of the pair-correlation
integrand through the square-root change of variables.

Both the reduced frame (u = r ≥ 0, v = 0) and the general-(u, v) frame are
provided; the general frame exists to make translation/rotation invariance a
testable statement about evaluator output.
"""

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import ArgumentOutOfRange, DimensionOutOfRange, SeparationOutOfRange

R_MAX = 6.0
POINT_MAX = 6.0

P_MATRIX = np.array([[1.0, 0, 0], [0, 0, 0], [0, 0, 0]], dtype=complex)
Q_MATRIX = np.diag([0.0, 1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class JointCovariance:
    """Covariance bundle at separation r.

    A, B, C are the value/cross/derivative blocks; Lambda the conditional
    covariance C - B* A^{-1} B; M_P = S P S and M_Q = S Q S with S = Lambda^{1/2},
    P = e1 e1*, Q = diag(0, 1, -1); detA the value-block determinant.
    """

    r: float
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Lambda: np.ndarray
    M_P: np.ndarray
    M_Q: np.ndarray
    detA: float


@dataclass(frozen=True)
class HigherDimSpec:
    """Diagonal variance listing for the dimension-m sampling problem.

    The variance sequence lists, in order: the m moduli of the conditioned
    gradient vector (all 1), then the upper triangle of the symmetric second
    derivative matrix row by row (each diagonal entry 2 followed by its
    off-diagonal row of 1s), then the mixed-derivative scalar (1).
    """

    m: int
    variances: tuple


def _derived_parts(A, B, C, Lambda, detA, r):
    S = numerics.psd_sqrt(Lambda)
    M_P = S @ P_MATRIX @ S
    M_Q = S @ Q_MATRIX @ S
    M_P = 0.5 * (M_P + M_P.conj().T)
    M_Q = 0.5 * (M_Q + M_Q.conj().T)
    return JointCovariance(
        r=float(r), A=A, B=B, C=C, Lambda=Lambda, M_P=M_P, M_Q=M_Q, detA=float(detA)
    )


def build_joint_covariance(r):
    """Covariance bundle in the reduced frame u = r, v = 0.

    The Schur complement is computed from the exact closed form of B* A^{-1} B
    (the 2x2 A inverts analytically), which stays accurate across the full
    e^{r²} dynamic range; a numerical solve against A is never needed here.
    """
    r = float(r)
    if not 0.0 <= r <= R_MAX or not np.isfinite(r):
        raise SeparationOutOfRange(f"separation {r!r} outside [0, {R_MAX}]")

    e = np.exp(r * r)
    detA = e - r * r
    A = np.array([[e, r], [r, 1.0]], dtype=complex)
    B = np.array([[0.0, r * r, -1.0], [1.0 - r * r, 0.0, 0.0]], dtype=complex)
    C = np.array(
        [[e, 2 * r - r**3, r], [2 * r - r**3, 2.0, 0.0], [r, 0.0, 1.0]],
        dtype=complex,
    )

    q = 1.0 - r * r
    BAB = (
        np.array(
            [
                [q * q * e, -(r**3) * q, r * q],
                [-(r**3) * q, r**4, -(r * r)],
                [r * q, -(r * r), 1.0],
            ],
            dtype=complex,
        )
        / detA
    )
    Lambda = C - BAB
    Lambda = 0.5 * (Lambda + Lambda.conj().T)
    if r == 0.0:
        # Exactly diag(0, 2, 0) in the limit; kill the rounding residue so the
        # PSD clamp sees a clean singular matrix.
        Lambda = np.diag([0.0, 2.0, 0.0]).astype(complex)
    return _derived_parts(A, B, C, Lambda, detA, r)


def build_general_covariance(u, v):
    """Value/cross/derivative blocks at general chart points (u, v).

    Entries follow from Wirtinger derivatives of the kernel e^{z w̄}; the
    reduced frame is the special case (u, v) = (r, 0).
    """
    u = complex(u)
    v = complex(v)
    if abs(u) > POINT_MAX or abs(v) > POINT_MAX:
        raise ArgumentOutOfRange(
            f"|u| = {abs(u):.3f}, |v| = {abs(v):.3f} exceed the cap {POINT_MAX}"
        )

    uc, vc = np.conj(u), np.conj(v)
    euv = np.exp(u * vc)       # E f(u) conj(f(v))
    evu = np.exp(v * uc)       # E f(v) conj(f(u))
    eu2 = np.exp(abs(u) ** 2)
    ev2 = np.exp(abs(v) ** 2)
    d = u - v
    dc = np.conj(d)
    s = 2.0 - abs(d) ** 2

    A = np.array([[eu2, d * euv], [dc * evu, ev2]])
    B = np.array([[0.0, d * d * euv, -euv], [(1.0 - abs(d) ** 2) * evu, 0.0, 0.0]])
    C = np.array(
        [
            [eu2, d * s * euv, dc * euv],
            [dc * s * evu, 2.0 * ev2, 0.0],
            [d * evu, 0.0, ev2],
        ]
    )
    return A, B, C


def build_general_joint_covariance(u, v):
    """Full bundle (Lambda, M_P, M_Q, detA) from the general-(u, v) blocks.

    Uses the analytic 2x2 inverse of A, so the e^{|u|²} scale never enters a
    numerical solve.  detA = e^{2 Re(u v̄)}(e^{r²} - r²) is real positive.
    """
    A, B, C = build_general_covariance(u, v)
    detA = (A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]).real
    Ainv = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]]) / detA
    Lambda = C - B.conj().T @ Ainv @ B
    Lambda = 0.5 * (Lambda + Lambda.conj().T)
    return _derived_parts(A, B, C, Lambda, detA, abs(u - v))


def limit_lambda(r):
    """Large-separation closed form of Lambda (exact up to O(r^{-inf}) terms)."""
    r = float(r)
    e = np.exp(r * r)
    return np.array(
        [
            [e - (r * r - 1.0) ** 2, 2 * r - r**3, r],
            [2 * r - r**3, 2.0, 0.0],
            [r, 0.0, 1.0],
        ],
        dtype=complex,
    )


def higher_dim_spec(m):
    """Variance diagonal for the dimension-m problem; length (m+1)(m+2)/2."""
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise DimensionOutOfRange(f"dimension must be an integer, got {m!r}")
    if not 1 <= m <= 4:
        raise DimensionOutOfRange(f"dimension {m} outside [1, 4]")
    variances = [1.0] * m
    for row in range(m):
        variances.append(2.0)
        variances.extend([1.0] * (m - 1 - row))
    variances.append(1.0)
    assert len(variances) == (m + 1) * (m + 2) // 2
    return HigherDimSpec(m=int(m), variances=tuple(variances))
