"""Period matrices and branch-point variations of the genus-2 curve
q^2 = p(p-1)(p-a)(p-b)(p-c) with real-separated branch points.

Periods are computed from interval integrals of the holomorphic
differentials dp/q and p dp/q between consecutive real branch points,
continued along the upper lip of the real axis.  On the interval between
the k-th and (k+1)-th branch point (1-indexed, ordering 0 < 1 < a < b < c)
the root carries the constant phase i^(5-k).  The square-root endpoint
singularities are removed by the substitution p = mid + half*sin(theta),
after which Gauss-Legendre quadrature converges spectrally.

The homology basis, expressed in the interval integrals J_1..J_4, is

    A_1 = 2 J_1,          A_2 = 2 J_3,
    B_1 = 2 (J_2 + J_4),  B_2 = 2 J_4.

This combination was validated numerically: it yields a symmetric period
matrix with positive-definite imaginary part whose branch-point derivatives
match the local-coordinate variational formula at every branch point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NonConvergence

A_CYCLES = (np.array([2, 0, 0, 0]), np.array([0, 0, 2, 0]))
B_CYCLES = (np.array([0, 2, 0, 2]), np.array([0, 0, 0, 2]))

DEFAULT_NODES = 200


def _validate_moduli(moduli) -> tuple[float, float, float]:
    a, b, c = (float(x) for x in moduli)
    if not (1.0 < a < b < c):
        raise ConfigError(
            f"branch points must satisfy 1 < a < b < c, got {(a, b, c)}"
        )
    gaps = (a - 1.0, b - a, c - b)
    if min(gaps) < 1e-3:
        raise ConfigError(f"branch points too close: gaps {gaps}")
    return a, b, c


def interval_integrals(moduli, nodes: int = DEFAULT_NODES) -> np.ndarray:
    """2x4 matrix J[j, k] = integral of p^j dp / q over the k-th gap."""
    a, b, c = _validate_moduli(moduli)
    es = [0.0, 1.0, a, b, c]
    x, w = np.polynomial.legendre.leggauss(nodes)
    th = 0.5 * math.pi * x
    wt = 0.5 * math.pi * w
    J = np.zeros((2, 4), dtype=complex)
    for k in range(4):
        e0, e1 = es[k], es[k + 1]
        mid, half = 0.5 * (e0 + e1), 0.5 * (e1 - e0)
        p = mid + half * np.sin(th)
        quintic = p * (p - 1.0) * (p - a) * (p - b) * (p - c)
        q = (1j ** (5 - (k + 1))) * np.sqrt(np.abs(quintic))
        common = wt * half * np.cos(th) / q
        J[0, k] = np.sum(common)
        J[1, k] = np.sum(common * p)
    return J


@dataclass(frozen=True)
class PeriodData:
    moduli: tuple[float, float, float]
    J: np.ndarray  # interval integrals, 2x4
    A: np.ndarray  # a-periods of the raw differentials, 2x2
    Braw: np.ndarray  # b-periods of the raw differentials, 2x2
    C: np.ndarray  # normalization: omega_j = sum_l C[j,l] p^l dp / q
    B: np.ndarray  # normalized period matrix, 2x2
    symmetry_error: float
    im_eigenvalues: tuple[float, float]
    convergence_error: float

    @property
    def positive(self) -> bool:
        return min(self.im_eigenvalues) > 0


def periods(moduli, nodes: int = DEFAULT_NODES,
            check_tol: float | None = None) -> PeriodData:
    """Normalized period matrix of the curve; node doubling estimates the
    quadrature error."""

    def assemble(n):
        J = interval_integrals(moduli, n)
        A = np.column_stack([J @ v for v in A_CYCLES])
        Braw = np.column_stack([J @ v for v in B_CYCLES])
        C = np.linalg.inv(A)
        return J, A, Braw, C @ Braw

    J, A, Braw, B = assemble(nodes)
    _, _, _, B2 = assemble(2 * nodes)
    conv = float(np.max(np.abs(B - B2)))
    if check_tol is not None and conv > check_tol:
        raise NonConvergence(
            f"period matrix changed by {conv:.3e} under node doubling"
        )
    ev = np.linalg.eigvalsh(B2.imag)
    return PeriodData(
        moduli=tuple(float(x) for x in moduli),
        J=J,
        A=A,
        Braw=Braw,
        C=np.linalg.inv(A),
        B=B2,
        symmetry_error=float(np.max(np.abs(B2 - B2.T))),
        im_eigenvalues=(float(ev[0]), float(ev[1])),
        convergence_error=conv,
    )


@dataclass(frozen=True)
class RauchData:
    moduli: tuple[float, float, float]
    branch: int  # 0 -> a, 1 -> b, 2 -> c
    delta: float
    dB_numeric: np.ndarray
    dB_predicted: np.ndarray
    max_rel_error: float
    step_stability: float  # change of the numeric derivative when delta halves


def rauch_prediction(pd: PeriodData, branch: int) -> np.ndarray:
    """Variational formula at one branch point.

    In the local coordinate t with p = e + t^2 the normalized differential
    has value w_j = 2 (C[j,0] + C[j,1] e) / sqrt(R(e)) at the branch point,
    R(p) = quintic(p) / (p - e); the derivative of the period matrix in e
    is pi i w_j w_k.
    """
    a, b, c = pd.moduli
    e = (a, b, c)[branch]
    others = [x for i, x in enumerate((a, b, c)) if i != branch]
    R = e * (e - 1.0) * (e - others[0]) * (e - others[1])
    w = [2.0 * (pd.C[j, 0] + pd.C[j, 1] * e) / np.sqrt(complex(R)) for j in range(2)]
    return np.array(
        [[1j * math.pi * w[j] * w[k] for k in range(2)] for j in range(2)]
    )


def rauch_check(moduli, branch: int, delta: float = 1e-4,
                nodes: int = DEFAULT_NODES) -> RauchData:
    """Central-difference derivative of the period matrix in one branch
    point against the variational formula; the derivative is recomputed at
    half the step to confirm it has converged."""
    a, b, c = _validate_moduli(moduli)
    if branch not in (0, 1, 2):
        raise ConfigError("branch must be 0 (a), 1 (b) or 2 (c)")

    def B_at(step):
        args = [a, b, c]
        args[branch] += step
        return periods(args, nodes).B

    def diff(d):
        return (B_at(d) - B_at(-d)) / (2.0 * d)

    dB = diff(delta)
    dB_half = diff(delta / 2.0)
    pd = periods(moduli, nodes)
    pred = rauch_prediction(pd, branch)
    rel = float(np.max(np.abs(dB_half - pred) / np.maximum(np.abs(pred), 1e-12)))
    return RauchData(
        moduli=(a, b, c),
        branch=branch,
        delta=delta,
        dB_numeric=dB_half,
        dB_predicted=pred,
        max_rel_error=rel,
        step_stability=float(np.max(np.abs(dB - dB_half))),
    )
