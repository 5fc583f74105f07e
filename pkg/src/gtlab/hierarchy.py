"""Whitham-type hierarchy analysis through its potentials.

A family of potentials h_1(z, v), ..., h_N(z, v) defines a hierarchy whose
compatibility conditions are spanned, for each triple of indices (i, j, k),
by the 3m functions of z

    h_i'(z) h_{j, v_l}(z) - h_j'(z) h_{i, v_l}(z)   (and the two cyclic blocks).

The dimension D of that span controls the equivalent hydrodynamic-type
system; the integrability criterion ties the family back to a structure by
reconstructing f and lambda from any two potentials.  Times are never
instantiated: everything is analyzed through the potentials as functions of
the spectral parameter z and the fiber point v.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from .core import EnhancedGT, GTStructure, Potential, VerificationReport, _make_report
from .errors import ConfigError, DomainViolation, NonConvergence, SamplingExhausted
from .gtsys import GTSystem
from .kernel import Box, SplitMix64


@dataclass
class PotentialFamily:
    """An ordered family of potentials over a shared structure.

    ``z_box`` bounds the sampling region of the spectral parameter; fiber
    points come from the structure's own boxes.  ``enhanced`` is optional
    and only used as the oracle for lambda reconstruction.
    """

    structure: GTStructure
    potentials: list[Potential]
    z_box: Box | None = None
    enhanced: EnhancedGT | None = None
    label: str = "family"

    def __post_init__(self):
        if len(self.potentials) < 3:
            raise ConfigError("a potential family needs at least 3 members")
        if self.z_box is None:
            self.z_box = self.structure.p_box

    @property
    def N(self) -> int:
        return len(self.potentials)

    @property
    def m(self) -> int:
        return self.structure.m

    def h_jet(self, i: int, z: complex, v: Sequence[complex]) -> tuple:
        """(h_i'(z), [h_{i, v_l}(z)]) at the fiber point v."""
        e = self.potentials[i].h
        args = (z, *v)
        dz = [1] + [0] * self.m
        hp = e.partial(args, dz)
        hv = []
        for l in range(self.m):
            multi = [0] * (1 + self.m)
            multi[1 + l] = 1
            hv.append(e.partial(args, multi))
        return hp, hv

    def sample_z(self, count: int, seed: int, v: Sequence[complex],
                 min_clearance: float | None = None) -> list[complex]:
        """Seeded z points inside z_box clearing every potential's poles."""
        rng = SplitMix64(seed)
        floor = (min_clearance if min_clearance is not None
                 else self.structure.min_separation)
        out = []
        budget = 500 * count
        while len(out) < count and budget > 0:
            budget -= 1
            z = rng.complex_in_box(self.z_box)
            args = (z, *v)
            if all(p.h.domain.clearance(args, 0) > floor for p in self.potentials):
                out.append(z)
        if len(out) < count:
            raise SamplingExhausted(
                f"could not place {count} z points clear of the poles"
            )
        return out

    def independence_rank(self, v: Sequence[complex], z_points: Sequence[complex],
                          svd_tol: float = 1e-10) -> int:
        """Numeric rank of the (h_i', h_{i,v}) jet matrix; equals N for a
        functionally independent family."""
        rows = []
        for i in range(self.N):
            row = []
            for z in z_points:
                hp, hv = self.h_jet(i, z, v)
                row.extend([hp, *hv])
            rows.append(row)
        sv = np.linalg.svd(np.array(rows), compute_uv=False)
        return int(np.sum(sv > svd_tol * sv[0]))


def _tensor_block(fam: PotentialFamily, i: int, j: int, z: complex,
                  v: Sequence[complex]) -> list[complex]:
    hpi, hvi = fam.h_jet(i, z, v)
    hpj, hvj = fam.h_jet(j, z, v)
    return [hpi * hvj[l] - hpj * hvi[l] for l in range(fam.m)]


def compatibility_tensor(
    fam: PotentialFamily,
    i: int,
    j: int,
    k: int,
    v: Sequence[complex],
    z_points: Sequence[complex],
) -> np.ndarray:
    """The 3m coefficient functions of the triple (i, j, k) sampled in z.

    Row layout: l-th row of block 0 multiplies dv_l/dt_k, block 1 (rows
    m..2m-1) multiplies dv_l/dt_i, block 2 multiplies dv_l/dt_j.
    """
    if len({i, j, k}) != 3:
        raise ConfigError("indices i, j, k must be pairwise distinct")
    for idx in (i, j, k):
        if not 0 <= idx < fam.N:
            raise ConfigError(f"potential index {idx} out of range")
    cols = []
    for z in z_points:
        col = (
            _tensor_block(fam, i, j, z, v)
            + _tensor_block(fam, j, k, z, v)
            + _tensor_block(fam, k, i, z, v)
        )
        cols.append(col)
    return np.array(cols, dtype=complex).T


def dimension_D(
    fam: PotentialFamily,
    i: int,
    j: int,
    k: int,
    v: Sequence[complex],
    z_count: int = 40,
    seed: int = 7,
    svd_tol: float = 1e-8,
) -> int:
    """dim V_{i,j,k}: numeric rank of the sampled coefficient functions.

    The rank is recomputed on a doubled sample; a mismatch is reported as
    non-convergence rather than guessed away.
    """
    if z_count < 3 * fam.m + 5:
        raise ConfigError("need at least 3m + 5 z samples for a stable rank")

    def rank(count, s):
        zs = fam.sample_z(count, s, v)
        mat = compatibility_tensor(fam, i, j, k, v, zs)
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv[0] == 0:
            return 0
        return int(np.sum(sv > svd_tol * sv[0]))

    d = rank(z_count, seed)
    d2 = rank(2 * z_count, seed + 1)
    if d != d2:
        raise NonConvergence(
            f"rank unstable under sample doubling: {d} vs {d2}"
        )
    return d


@dataclass
class HydroSystem:
    """The hydrodynamic-type system equivalent to one compatibility triple.

    a, b, c are (D x m) coefficient matrices at the fiber point: row r is
    sum_l a[r,l] dv_l/dt_i + b[r,l] dv_l/dt_j + c[r,l] dv_l/dt_k = 0.
    basis_rows indexes which sampled coefficient functions serve as
    S_1..S_D; expansion_residual is measured on held-out z points.
    """

    D: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    basis_rows: tuple[int, ...]
    basis_samples: np.ndarray
    z_points: tuple[complex, ...]
    expansion_residual: float
    v: tuple[complex, ...]

    @property
    def rank_abc(self) -> int:
        stacked = np.hstack([self.a, self.b, self.c])
        sv = np.linalg.svd(stacked, compute_uv=False)
        if sv[0] == 0:
            return 0
        return int(np.sum(sv > 1e-10 * sv[0]))


def hydro_coefficients(
    fam: PotentialFamily,
    i: int,
    j: int,
    k: int,
    v: Sequence[complex],
    z_count: int = 40,
    seed: int = 7,
    svd_tol: float = 1e-8,
    residual_tol: float = 1e-8,
) -> HydroSystem:
    """Extract the hydrodynamic system of one compatibility triple.

    A pivoted QR over the sampled coefficient functions picks the basis
    S_1..S_D; least squares gives the expansion of every coefficient
    function, and the expansion is validated on a held-out half of the z
    sample before the a, b, c matrices are assembled.
    """
    zs = fam.sample_z(2 * z_count, seed, v)
    fit_z, held_z = zs[:z_count], zs[z_count:]
    mat = compatibility_tensor(fam, i, j, k, v, fit_z)  # (3m, nz)
    held = compatibility_tensor(fam, i, j, k, v, held_z)
    sv = np.linalg.svd(mat, compute_uv=False)
    D = int(np.sum(sv > svd_tol * sv[0])) if sv[0] else 0
    if D == 0:
        raise NonConvergence("compatibility tensor vanishes identically")
    # pivoted QR on the transposed matrix: columns are the 3m functions
    _, _, piv = _qr_pivots(mat.T)
    basis_rows = tuple(int(r) for r in piv[:D])
    S = mat[list(basis_rows)]  # (D, nz)
    # expansion of every function in the S basis
    coef, *_ = np.linalg.lstsq(S.T, mat.T, rcond=None)  # (D, 3m)
    S_held = held[list(basis_rows)]
    recomposed = coef.T @ S_held
    scale = max(np.abs(held).max(), 1.0)
    residual = float(np.abs(recomposed - held).max() / scale)
    if residual > residual_tol:
        raise NonConvergence(
            f"basis expansion residual {residual:.3e} above {residual_tol:.1e}"
        )
    m = fam.m
    # block 0 multiplies dv/dt_k, block 1 dv/dt_i, block 2 dv/dt_j
    c_mat = coef.T[0:m].T
    a_mat = coef.T[m:2 * m].T
    b_mat = coef.T[2 * m:3 * m].T
    return HydroSystem(
        D=D,
        a=np.array(a_mat),
        b=np.array(b_mat),
        c=np.array(c_mat),
        basis_rows=basis_rows,
        basis_samples=S,
        z_points=tuple(fit_z),
        expansion_residual=residual,
        v=tuple(v),
    )


def _qr_pivots(mat: np.ndarray):
    """QR with column pivoting via scipy when available, greedy otherwise."""
    try:
        from scipy.linalg import qr

        q, r, piv = qr(mat, pivoting=True)
        return q, r, piv
    except ImportError:  # pragma: no cover - scipy is a hard dependency
        work = mat.copy()
        piv = []
        for _ in range(min(work.shape)):
            norms = np.linalg.norm(work, axis=0)
            norms[piv] = -1.0
            p = int(np.argmax(norms))
            piv.append(p)
            col = work[:, p : p + 1]
            denom = (col.conj().T @ col).item()
            if abs(denom) < 1e-300:
                break
            work = work - col @ (col.conj().T @ work) / denom
        rest = [c for c in range(mat.shape[1]) if c not in piv]
        return None, None, np.array(piv + rest)


# ---------------------------------------------------------------------------
# reconstruction of f and lambda from the potentials
# ---------------------------------------------------------------------------


def _apply_g(s: GTStructure, pot: Potential, p1: complex, p2: complex,
             v: Sequence[complex]) -> complex:
    """g(p1) acting on h(p2) through the fiber coordinates."""
    total = 0.0 + 0.0j
    args2 = (p2, *v)
    for kk in range(s.m):
        multi = [0] * (1 + s.m)
        multi[1 + kk] = 1
        total += s.g[kk].value((p1, *v)) * pot.h.partial(args2, multi)
    return total


def _h_prime(pot: Potential, z: complex, v: Sequence[complex], m: int) -> complex:
    return pot.h.partial((z, *v), [1] + [0] * m)


def reconstruct_f(
    fam: PotentialFamily,
    i: int,
    j: int,
    samples: int = 30,
    seed: int = 11,
    tol: float = 1e-8,
    den_floor: float = 1e-6,
) -> tuple[Callable, VerificationReport]:
    """Rebuild the two-point function from potentials i and j.

        f(p1, p2) = sum_k (h_i'(p1) h_{j,v_k}(p2) - h_j'(p1) h_{i,v_k}(p2)) g_k(p1)
                    / (h_j'(p1) h_i'(p2) - h_j'(p2) h_i'(p1))

    The report compares against the structure's own f (relative residual)
    over seeded samples; near-zero denominators are resampled.
    """
    if i == j:
        raise ConfigError("need two distinct potentials")
    s = fam.structure
    m = s.m
    hi, hj = fam.potentials[i], fam.potentials[j]

    def rec(p1, p2, v):
        hpi1 = _h_prime(hi, p1, v, m)
        hpj1 = _h_prime(hj, p1, v, m)
        hpi2 = _h_prime(hi, p2, v, m)
        hpj2 = _h_prime(hj, p2, v, m)
        den = hpj1 * hpi2 - hpj2 * hpi1
        if abs(den) < den_floor:
            raise DomainViolation("reconstruction denominator vanishes")
        num = 0.0 + 0.0j
        for kk in range(m):
            multi = [0] * (1 + m)
            multi[1 + kk] = 1
            num += (
                hpi1 * hj.h.partial((p2, *v), multi)
                - hpj1 * hi.h.partial((p2, *v), multi)
            ) * s.g[kk].value((p1, *v))
        return num / den

    residuals = []
    resampled = 0
    draw = 0
    while len(residuals) < samples and draw < 50 * samples:
        ps, v = s.sample(1, seed + draw, 2)[0]
        draw += 1
        try:
            got = rec(ps[0], ps[1], v)
        except DomainViolation:
            resampled += 1
            continue
        want = s.f.value((ps[0], ps[1], *v))
        residuals.append(abs(got - want) / max(abs(want), 1.0))
    if len(residuals) < samples:
        raise SamplingExhausted("reconstruction denominator kept vanishing")
    return rec, _make_report(
        "reconstruct_f", residuals, tol, seed,
        pair=(i, j), resampled=resampled, label=fam.label,
    )


def reconstruct_lambda(
    fam: PotentialFamily,
    i: int,
    samples: int = 30,
    seed: int = 13,
    tol: float = 1e-8,
    den_floor: float = 1e-6,
) -> tuple[Callable, VerificationReport]:
    """Rebuild lambda from potential i:

        lambda(p1, p2) = (f(p1, p2) h_i'(p2) + g(p1)(h_i(p2))) / h_i'(p1)

    compared against the enhanced structure's lambda when available and
    against the same formula through every other potential (independence
    of i) otherwise.
    """
    s = fam.structure
    m = s.m

    def rec_for(idx):
        pot = fam.potentials[idx]

        def rec(p1, p2, v):
            hp1 = _h_prime(pot, p1, v, m)
            if abs(hp1) < den_floor:
                raise DomainViolation("h'(p1) vanishes")
            fval = s.f.value((p1, p2, *v))
            return (fval * _h_prime(pot, p2, v, m)
                    + _apply_g(s, pot, p1, p2, v)) / hp1

        return rec

    rec = rec_for(i)
    residuals = []
    resampled = 0
    draw = 0
    others = [idx for idx in range(fam.N) if idx != i]
    while len(residuals) < samples and draw < 50 * samples:
        ps, v = s.sample(1, seed + draw, 2)[0]
        draw += 1
        try:
            got = rec(ps[0], ps[1], v)
            alt = [rec_for(idx)(ps[0], ps[1], v) for idx in others]
        except DomainViolation:
            resampled += 1
            continue
        worst = max(abs(got - x) for x in alt) if alt else 0.0
        if fam.enhanced is not None:
            want = fam.enhanced.lam.value((ps[0], ps[1], *v))
            worst = max(worst, abs(got - want))
        residuals.append(worst / max(abs(got), 1.0))
    if len(residuals) < samples:
        raise SamplingExhausted("lambda reconstruction kept hitting zeros")
    return rec, _make_report(
        "reconstruct_lambda", residuals, tol, seed,
        index=i, resampled=resampled, label=fam.label,
    )


def criterion_integrable(
    fam: PotentialFamily,
    sys: GTSystem,
    samples: int = 30,
    seed: int = 19,
    tol: float = 1e-8,
) -> VerificationReport:
    """The pairwise integrability criterion

        h_j'(p1) D1(h_i(p2)) = h_i'(p1) D1(h_j(p2))

    where D1(X) = (f(p1, p2) X'(p2) + g(p1)(X(p2))) / g_1(p1) is the
    hierarchy derivative taken through the quasilinear system with unit
    pivot slope.
    """
    if sys.structure is not fam.structure:
        raise ConfigError("family and system must share the structure")
    s = fam.structure
    m = s.m
    g1 = s.g[sys.pivot]
    residuals = []
    raw = s.sample(samples, seed, 2)
    for ps, v in raw:
        p1, p2 = ps
        fval = s.f.value((p1, p2, *v))
        g1p1 = g1.value((p1, *v))
        d1 = []
        hp1 = []
        for pot in fam.potentials:
            d1.append(
                (fval * _h_prime(pot, p2, v, m) + _apply_g(s, pot, p1, p2, v))
                / g1p1
            )
            hp1.append(_h_prime(pot, p1, v, m))
        worst = 0.0
        scale = max(max(abs(x) for x in d1), 1.0)
        for a in range(fam.N):
            for b in range(a + 1, fam.N):
                worst = max(
                    worst, abs(hp1[b] * d1[a] - hp1[a] * d1[b]) / scale
                )
        residuals.append(worst)
    return _make_report(
        "integrability_criterion", residuals, tol, seed, label=fam.label,
    )
