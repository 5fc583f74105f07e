"""GT-structure calculus.

Data model for (enhanced) local GT structures and potentials, numeric
verification of the defining functional identities, and the structure
transforms: adding punctures, colliding punctures, coordinate pushforward,
contour-generated potentials, and the Lie-algebroid constant table.

A structure with fiber dimension m carries m vector-field components
g_i(p, v) and a two-point function f(p1, p2, v) with a normalized simple
pole on the diagonal.  All verification is by dense seeded sampling: the
in-scope functions are meromorphic, so vanishing at many generic points is
the practical test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .errors import DomainViolation, NonConvergence, SamplingExhausted
from .kernel import (
    Box,
    Diagonal,
    Domain,
    EMPTY_DOMAIN,
    JetEvaluator,
    PathSpec,
    ReindexedEvaluator,
    SplitMix64,
    cauchy_derivative,
    laurent_coeff,
    path_integrate,
)

Sample = tuple[tuple[complex, ...], tuple[complex, ...]]  # (p-points, fiber point)


@dataclass(frozen=True)
class VerificationReport:
    identity: str
    samples: int
    max_residual: float
    mean_residual: float
    tol: float
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def as_dict(self) -> dict:
        return {
            "identity": self.identity,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tolerance": self.tol,
            "pass": self.passed,
            "seed": self.seed,
            "params": self.params,
        }


def _make_report(identity, residuals, tol, seed, **params) -> VerificationReport:
    res = [float(r) for r in residuals]
    return VerificationReport(
        identity=identity,
        samples=len(res),
        max_residual=max(res) if res else 0.0,
        mean_residual=(sum(res) / len(res)) if res else 0.0,
        tol=tol,
        seed=seed,
        params=params,
    )


class GTStructure:
    """Fiber dimension m, vector-field family g and two-point function f.

    ``g`` is a tuple of m evaluators of arity 1 + m over (p, v1..vm);
    ``f`` has arity 2 + m over (p1, p2, v1..vm).  ``p_box``/``v_boxes``
    bound the sampling region; admissibility of a sample is decided from
    the evaluators' declared domains, so transforms that build correct
    domains inherit correct sampling.
    """

    def __init__(
        self,
        m: int,
        g: Sequence[JetEvaluator],
        f: JetEvaluator,
        label: str = "",
        p_box: Box = (-1.5, 1.5, -1.5, 1.5),
        v_boxes: Sequence[Box] | None = None,
        min_separation: float = 0.25,
        sampler: Callable[[int, int, int], list[Sample]] | None = None,
        puncture_slots: tuple[int, ...] = (),
    ):
        assert len(g) == m
        assert f.arity == 2 + m
        for gi in g:
            assert gi.arity == 1 + m
        self.m = m
        self.g = tuple(g)
        self.f = f
        self.label = label
        self.p_box = p_box
        self.v_boxes = tuple(v_boxes) if v_boxes is not None else tuple([p_box] * m)
        self.min_separation = min_separation
        self._sampler = sampler
        # fiber slots whose g-component is f(p, v_slot): collidable punctures
        self.puncture_slots = puncture_slots

    # -- sampling ----------------------------------------------------------

    def clearance(self, ps: Sequence[complex], v: Sequence[complex]) -> float:
        """Smallest clearance of any evaluator over all p-slot assignments."""
        best = math.inf
        for p in ps:
            args = (p, *v)
            for gi in self.g:
                for slot in range(gi.arity):
                    best = min(best, gi.domain.clearance(args, slot))
        for pa, pb in product(ps, ps):
            if pa is pb:
                continue
            args = (pa, pb, *v)
            for slot in range(self.f.arity):
                best = min(best, self.f.domain.clearance(args, slot))
        return best

    def sample(self, count: int, seed: int, n_p: int) -> list[Sample]:
        """count admissible points (p_1..p_{n_p}, v), deterministically."""
        if self._sampler is not None:
            return self._sampler(count, seed, n_p)
        rng = SplitMix64(seed)
        out: list[Sample] = []
        tries = 0
        budget = 2000 * max(count, 1)
        while len(out) < count:
            if tries >= budget:
                raise SamplingExhausted(
                    f"{self.label}: {len(out)}/{count} samples after {tries} draws"
                )
            tries += 1
            ps = tuple(rng.complex_in_box(self.p_box) for _ in range(n_p))
            v = tuple(rng.complex_in_box(b) for b in self.v_boxes)
            if any(
                abs(pa - pb) < self.min_separation
                for i, pa in enumerate(ps)
                for pb in ps[i + 1 :]
            ):
                continue
            if self.clearance(ps, v) < self.min_separation:
                continue
            out.append((ps, v))
        return out

    # -- evaluation helpers --------------------------------------------------

    def g_value(self, p: complex, v: Sequence[complex], i: int) -> complex:
        return self.g[i].value((p, *v))

    def g_apply(
        self, p: complex, v: Sequence[complex], e: JetEvaluator, eargs: Sequence[complex], v_offset: int
    ) -> complex:
        """Action of the vector field g(p) on evaluator e: sum_j g_j d/dv_j.

        ``v_offset`` locates the fiber coordinates inside ``eargs``.
        """
        total = 0.0 + 0.0j
        for j in range(self.m):
            multi = [0] * e.arity
            multi[v_offset + j] = 1
            total += self.g[j].value((p, *v)) * e.partial(eargs, multi)
        return total

    def f_value(self, p1: complex, p2: complex, v: Sequence[complex]) -> complex:
        return self.f.value((p1, p2, *v))

    def f_partial(self, p1, p2, v, slot: int, order: int = 1) -> complex:
        multi = [0] * self.f.arity
        multi[slot] = order
        return self.f.partial((p1, p2, *v), multi)


@dataclass
class EnhancedGT:
    """GT structure plus the hierarchy-defining two-point function lambda."""

    base: GTStructure
    lam: JetEvaluator

    def __post_init__(self):
        assert self.lam.arity == 2 + self.base.m

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def label(self) -> str:
        return self.base.label


@dataclass
class Potential:
    h: JetEvaluator  # arity 1 + m over (p, v)
    label: str = ""


@dataclass
class CoordinateChange:
    """p = mu(p~, v), invertible in p~ on the working region."""

    mu: JetEvaluator  # arity 1 + m

    def check_invertible(self, s: GTStructure, samples: int = 20, seed: int = 7,
                         floor: float = 1e-6) -> None:
        for ps, v in s.sample(samples, seed, 1):
            d = self.mu.partial((ps[0], *v), [1] + [0] * s.m)
            if abs(d) < floor:
                raise DomainViolation(
                    f"mu'({ps[0]}) = {d} below invertibility floor {floor}"
                )


# ---------------------------------------------------------------------------
# identity verification
# ---------------------------------------------------------------------------


def verify_pole(s: GTStructure, samples: int = 100, seed: int = 1,
                tol: float = 1e-8, nodes: int = 64) -> VerificationReport:
    """Diagonal normalization: Laurent coefficient -1 of f in p1 about p2
    equals 1; orders -2 and -3 vanish."""
    residuals = []
    for ps, v in s.sample(samples, seed, 2):
        p2 = ps[0]
        args = (ps[1], p2, *v)
        # radius limited by every locus near the circle center p2; loci that
        # vanish there are the probed diagonal itself (however declared)
        clearances = [
            c
            for e in s.f.domain.exclusions
            for c in [e.clearance((p2, p2, *v), 0)]
            if c > 1e-9
        ]
        radius = 0.25 * min(clearances + [1.0])
        c_m1 = laurent_coeff(s.f, 0, args, p2, -1, radius, nodes)
        c_m2 = laurent_coeff(s.f, 0, args, p2, -2, radius, nodes)
        c_m3 = laurent_coeff(s.f, 0, args, p2, -3, radius, nodes)
        residuals.append(max(abs(c_m1 - 1.0), abs(c_m2), abs(c_m3)))
    return _make_report("diagonal_pole", residuals, tol, seed,
                        structure=s.label, nodes=nodes)


def _bracket_residual(s: GTStructure, p1, p2, v) -> float:
    """Componentwise residual of the commutation identity at one sample."""
    m = s.m
    gv1 = [s.g_value(p1, v, i) for i in range(m)]
    gv2 = [s.g_value(p2, v, i) for i in range(m)]
    f12 = s.f_value(p1, p2, v)
    f21 = s.f_value(p2, p1, v)
    f21_d1 = s.f_partial(p2, p1, v, slot=1)  # d/d(p1) of f(p2, p1)
    f12_d2 = s.f_partial(p1, p2, v, slot=1)  # d/d(p2) of f(p1, p2)
    worst = 0.0
    for i in range(m):
        gi = s.g[i]
        dp = [1] + [0] * m
        gi_p1 = gi.partial((p1, *v), dp)
        gi_p2 = gi.partial((p2, *v), dp)
        bracket = 0.0 + 0.0j
        for j in range(m):
            dv = [0] * (1 + m)
            dv[1 + j] = 1
            bracket += gv1[j] * gi.partial((p2, *v), dv) - gv2[j] * gi.partial((p1, *v), dv)
        rhs = (
            f21 * gi_p1
            - f12 * gi_p2
            + 2 * f21_d1 * gi.value((p1, *v))
            - 2 * f12_d2 * gi.value((p2, *v))
        )
        worst = max(worst, abs(bracket - rhs))
    return worst


def verify_bracket(s: GTStructure, samples: int = 100, seed: int = 2,
                   tol: float = 1e-8) -> VerificationReport:
    residuals = [
        _bracket_residual(s, ps[0], ps[1], v) for ps, v in s.sample(samples, seed, 2)
    ]
    return _make_report("bracket", residuals, tol, seed, structure=s.label)


def _cocycle_residual(s: GTStructure, p1, p2, p3, v) -> float:
    f = s.f_value
    fd = s.f_partial
    lhs = s.g_apply(p2, v, s.f, (p1, p3, *v), v_offset=2) - s.g_apply(
        p1, v, s.f, (p2, p3, *v), v_offset=2
    )
    rhs = (
        f(p1, p2, v) * fd(p2, p3, v, slot=0)
        - f(p2, p1, v) * fd(p1, p3, v, slot=0)
        + f(p1, p3, v) * fd(p2, p3, v, slot=1)
        - f(p2, p3, v) * fd(p1, p3, v, slot=1)
        + 2 * f(p2, p3, v) * fd(p1, p2, v, slot=1)
        - 2 * f(p1, p3, v) * fd(p2, p1, v, slot=1)
    )
    return abs(lhs - rhs)


def verify_cocycle(s: GTStructure, samples: int = 100, seed: int = 3,
                   tol: float = 1e-8) -> VerificationReport:
    residuals = [
        _cocycle_residual(s, ps[0], ps[1], ps[2], v)
        for ps, v in s.sample(samples, seed, 3)
    ]
    return _make_report("cocycle", residuals, tol, seed, structure=s.label)


def verify_lambda(e: EnhancedGT, samples: int = 100, seed: int = 4,
                  tol: float = 1e-8, nodes: int = 64) -> VerificationReport:
    """Functional identity for lambda, plus its diagonal residue = 1."""
    s = e.base
    lam = e.lam

    def lam_d(pa, pb, v, slot):
        multi = [0] * lam.arity
        multi[slot] = 1
        return lam.partial((pa, pb, *v), multi)

    residuals = []
    for ps, v in s.sample(samples, seed, 3):
        p1, p2, p3 = ps
        lhs = s.g_apply(p1, v, lam, (p2, p3, *v), v_offset=2)
        rhs = (
            lam.value((p1, p3, *v)) * lam_d(p2, p1, v, slot=1)
            - lam.value((p2, p3, *v)) * s.f_partial(p1, p2, v, slot=1)
            - s.f_value(p1, p2, v) * lam_d(p2, p3, v, slot=0)
            - s.f_value(p1, p3, v) * lam_d(p2, p3, v, slot=1)
        )
        residuals.append(abs(lhs - rhs))
    # diagonal residue check on a handful of pairs
    for ps, v in s.sample(min(samples, 10), seed + 1, 2):
        p2 = ps[0]
        args = (ps[1], p2, *v)
        clearances = [
            c
            for ex in lam.domain.exclusions
            for c in [ex.clearance((p2, p2, *v), 0)]
            if c > 1e-9
        ]
        radius = 0.25 * min(clearances + [1.0])
        res = laurent_coeff(lam, 0, args, p2, -1, radius, nodes)
        residuals.append(abs(res - 1.0))
    return _make_report("lambda_identity", residuals, tol, seed, structure=s.label)


def verify_potential(e: EnhancedGT, pot: Potential, samples: int = 100,
                     seed: int = 5, tol: float = 1e-8) -> VerificationReport:
    s = e.base
    h = pot.h
    dp = [1] + [0] * s.m
    residuals = []
    for ps, v in s.sample(samples, seed, 2):
        p1, p2 = ps
        lhs = s.g_apply(p1, v, h, (p2, *v), v_offset=1)
        rhs = e.lam.value((p1, p2, *v)) * h.partial((p1, *v), dp) - s.f_value(
            p1, p2, v
        ) * h.partial((p2, *v), dp)
        residuals.append(abs(lhs - rhs))
    return _make_report(
        f"potential:{pot.label}", residuals, tol, seed, structure=s.label
    )


def verify_all(s: GTStructure, samples: int = 100, seed: int = 1,
               tol: float = 1e-8) -> list[VerificationReport]:
    return [
        verify_pole(s, samples, seed, tol),
        verify_bracket(s, samples, seed + 1, tol),
        verify_cocycle(s, samples, seed + 2, tol),
    ]


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def add_points(s: GTStructure, n: int) -> GTStructure:
    """Extend the fiber by n puncture coordinates; new g-components are
    f(p, u_j) and f is unchanged.  New coordinates are appended in call
    order after the existing ones."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m, mn = s.m, s.m + n
    # argument layout of the new structure: (p, v_1..v_m, u_1..u_n)
    g_new: list[JetEvaluator] = []
    for i in range(m):
        src = tuple(range(1 + m))  # old g_i ignores the punctures
        g_new.append(ReindexedEvaluator(s.g[i], 1 + mn, src, label=s.g[i].label))
    for j in range(n):
        # f(p, u_j, v): base slots (p1, p2, v...) <- (0, 1+m+j, 1..m)
        src = (0, 1 + m + j) + tuple(range(1, 1 + m))
        g_new.append(
            ReindexedEvaluator(s.f, 1 + mn, src, label=f"{s.label}:g[u{j + 1}]")
        )
    f_src = (0, 1) + tuple(range(2, 2 + m))
    f_new = ReindexedEvaluator(s.f, 2 + mn, f_src, label=s.f.label)
    return GTStructure(
        m=mn,
        g=g_new,
        f=f_new,
        label=f"{s.label}+{n}pt",
        p_box=s.p_box,
        v_boxes=list(s.v_boxes) + [s.p_box] * n,
        min_separation=s.min_separation,
        puncture_slots=s.puncture_slots + tuple(range(m, mn)),
    )


def _collision_substitution(group: Sequence[int], eps: float, v: list[complex]) -> list[complex]:
    """Binomial collision ladder: old coordinate r of the group becomes
    sum_{s<=r} C(r, s) eps^s u_s."""
    out = list(v)
    u = [v[slot] for slot in group]
    for r, slot in enumerate(group):
        out[slot] = sum(math.comb(r, sk) * eps**sk * u[sk] for sk in range(r + 1))
    return out


class _RichardsonLimit(JetEvaluator):
    """eps -> 0 limit of a family of values by Neville extrapolation over a
    fixed ladder.  ``fn_eps(args, eps)`` supplies the family."""

    def __init__(self, arity, fn_eps, ladder, domain=EMPTY_DOMAIN, label="",
                 check_tol: float | None = None):
        self.fn_eps = fn_eps
        self.ladder = tuple(ladder)
        self.check_tol = check_tol
        self.last_correction = 0.0
        if any(b >= a for a, b in zip(self.ladder, self.ladder[1:])) or self.ladder[-1] <= 0:
            raise ValueError("ladder must decrease strictly toward 0")
        super().__init__(arity, self._fn, domain=domain, label=label)

    def _fn(self, *args):
        eps = list(self.ladder)
        vals = [complex(self.fn_eps(args, ei)) for ei in eps]
        # Neville tableau in eps toward 0
        for level in range(1, len(eps)):
            for i in range(len(eps) - level):
                num = eps[i] * vals[i + 1] - eps[i + level] * vals[i]
                vals[i] = num / (eps[i] - eps[i + level])
            self.last_correction = abs(vals[0] - vals[1]) if len(eps) - level > 1 else self.last_correction
        if self.check_tol is not None and self.last_correction > self.check_tol:
            raise NonConvergence(
                f"Richardson ladder residual {self.last_correction:.3e} above "
                f"{self.check_tol:.1e}"
            )
        return vals[0]


DEFAULT_LADDER = tuple(0.05 * 0.5**k for k in range(5))


def collide_points_limit(
    s: GTStructure,
    groups: Sequence[Sequence[int]],
    ladder: Sequence[float] = DEFAULT_LADDER,
    check_tol: float | None = None,
) -> GTStructure:
    """Collide each group of fiber coordinates; evaluators are the Richardson
    eps -> 0 limit of the binomial substitution applied to s."""
    flat = [slot for grp in groups for slot in grp]
    assert len(set(flat)) == len(flat), "groups must be disjoint"
    for grp in groups:
        for slot in grp:
            assert 0 <= slot < s.m
    m = s.m

    def subst_all(v, eps):
        out = list(v)
        for grp in groups:
            out = _collision_substitution(grp, eps, out)
        return out

    # inverse-Jacobian rows for the group coordinates
    def g_component(i: int) -> JetEvaluator:
        owner = next((grp for grp in groups if i in grp), None)

        def fn_eps(args, eps):
            p, v = args[0], list(args[1:])
            vv = subst_all(v, eps)
            if owner is None:
                return s.g[i].value((p, *vv))
            # r-th finite difference of f(p, v_l) across the group, scaled
            # by eps^-r (the inverse Jacobian of the triangular substitution)
            r = owner.index(i)
            total = 0.0 + 0.0j
            for l_idx in range(r + 1):
                coeff = (-1) ** (r - l_idx) * math.comb(r, l_idx) / eps**r
                total += coeff * s.g[owner[l_idx]].value((p, *vv))
            return total

        dom = _collided_domain(s.g[i].domain, groups, offset=1, arity=1 + m)
        return _RichardsonLimit(1 + m, fn_eps, ladder, domain=dom,
                                label=f"{s.label}:collided g[{i}]",
                                check_tol=check_tol)

    def f_eval() -> JetEvaluator:
        def fn_eps(args, eps):
            p1, p2, v = args[0], args[1], list(args[2:])
            return s.f.value((p1, p2, *subst_all(v, eps)))

        dom = _collided_domain(s.f.domain, groups, offset=2, arity=2 + m)
        return _RichardsonLimit(2 + m, fn_eps, ladder, domain=dom,
                                label=f"{s.label}:collided f", check_tol=check_tol)

    return GTStructure(
        m=m,
        g=[g_component(i) for i in range(m)],
        f=f_eval(),
        label=f"{s.label}:collided",
        p_box=s.p_box,
        v_boxes=s.v_boxes,
        min_separation=s.min_separation,
    )


def _collided_domain(domain: Domain, groups, offset: int, arity: int) -> Domain:
    """Domain for collided evaluators: every locus that mentioned a group
    coordinate now sits at the group's leading coordinate (in the limit all
    group members collapse onto the leader)."""
    mapping = list(range(arity))
    for grp in groups:
        leader = offset + grp[0]
        for slot in grp[1:]:
            mapping[offset + slot] = leader
    return domain.remap(mapping)


def _partitions_weighted(s_total: int):
    """Multisets {i_r} with sum r*i_r = s_total; yields (i_1..i_s, weight)
    with weight = s! / (prod i_r! (r!)^{i_r}) - the chain-rule constants of
    the nested collision limit."""
    def rec(remaining, r):
        if remaining == 0:
            yield {}
            return
        if r > remaining:
            return
        for count in range(remaining // r + 1):
            for rest in rec(remaining - r * count, r + 1):
                if count:
                    d = dict(rest)
                    d[r] = count
                    yield d
                else:
                    yield rest

    for partition in rec(s_total, 1):
        w = math.factorial(s_total)
        for r, c in partition.items():
            w //= math.factorial(c) * math.factorial(r) ** c
        yield partition, w


def collide_points_closed(s: GTStructure, groups: Sequence[Sequence[int]]) -> GTStructure:
    """Closed-form collision: the depth-r component attached to a group is
    the r-th coefficient of f(p, u0 + u1 t + u2 t^2/2! + ...), expanded by
    the chain rule.  Only valid when every group coordinate is a puncture
    (its g-component is f(p, u))."""
    for grp in groups:
        for slot in grp:
            if slot not in s.puncture_slots:
                raise ValueError(
                    f"coordinate {slot} of {s.label} is not a puncture; use "
                    f"collide_points_limit"
                )
    m = s.m

    def g_component(i: int) -> JetEvaluator:
        owner = next((grp for grp in groups if i in grp), None)
        if owner is None:
            return s.g[i]
        r = owner.index(i)
        u0_slot = owner[0]

        def fn(*args):
            p, v = args[0], args[1:]
            u = [v[slot] for slot in owner]
            total = 0.0 + 0.0j
            for partition, w in _partitions_weighted(r) if r > 0 else [({}, 1)]:
                order = sum(partition.values())
                multi = [0] * s.f.arity
                multi[1] = order
                dval = s.f.partial((p, v[u0_slot], *v), multi)
                mono = 1.0 + 0.0j
                for rr, c in partition.items():
                    mono *= u[rr] ** c
                total += w * dval * mono
            return total

        dom = _collided_domain(s.g[i].domain, groups, offset=1, arity=1 + m)
        return JetEvaluator(1 + m, fn, domain=dom,
                            label=f"{s.label}:closed-collided g[{i}]")

    return GTStructure(
        m=m,
        g=[g_component(i) for i in range(m)],
        f=s.f,
        label=f"{s.label}:closed-collided",
        p_box=s.p_box,
        v_boxes=s.v_boxes,
        min_separation=s.min_separation,
    )


def collide_enhanced(
    e: EnhancedGT,
    groups: Sequence[Sequence[int]],
    ladder: Sequence[float] = DEFAULT_LADDER,
) -> EnhancedGT:
    """Collide the base structure and push lambda through the same limit."""
    base = collide_points_limit(e.base, groups, ladder)
    m = e.m

    def subst_all(v, eps):
        out = list(v)
        for grp in groups:
            out = _collision_substitution(grp, eps, out)
        return out

    def fn_eps(args, eps):
        p1, p2, v = args[0], args[1], list(args[2:])
        return e.lam.value((p1, p2, *subst_all(v, eps)))

    lam = _RichardsonLimit(2 + m, fn_eps, ladder, domain=e.lam.domain,
                           label=f"{e.label}:collided lambda")
    return EnhancedGT(base, lam)


def collide_potential(
    pot: Potential,
    groups: Sequence[Sequence[int]],
    order: int,
    m: int,
    eps_radius: float = 0.05,
    nodes: int = 32,
) -> Potential:
    """Taylor coefficient in the collision parameter of a transported
    potential.  Coefficients that stay finite in the limit are potentials of
    the collided structure; they are extracted by a circle quadrature in the
    collision parameter (the composition is analytic in it)."""

    def subst(v, eps):
        out = list(v)
        for grp in groups:
            out = _collision_substitution(grp, eps, out)
        return out

    def eps_coeff(sample: Callable[[complex], complex]) -> complex:
        total = 0.0 + 0.0j
        for k in range(nodes):
            eps = eps_radius * np.exp(2j * math.pi * k / nodes)
            total += sample(eps) * np.exp(-2j * math.pi * k * order / nodes)
        return total / (nodes * eps_radius**order)

    def fn(*args):
        p, v = args[0], list(args[1:])
        return eps_coeff(lambda eps: pot.h.value((p, *subst(v, eps))))

    def pf(args, multi):
        # differentiate under the eps-integral; first order only (chain
        # rule through the triangular substitution), higher orders fall
        # back to circle quadrature of fn
        if sum(multi) != 1:
            return NotImplemented
        p, v = args[0], list(args[1:])
        slot = multi.index(1)
        if slot == 0:
            dmulti = [1] + [0] * (len(args) - 1)
            return eps_coeff(
                lambda eps: pot.h.partial((p, *subst(v, eps)), dmulti)
            )
        r_slot = slot - 1
        owner = next((grp for grp in groups if r_slot in grp), None)

        def chain(eps):
            if owner is None:
                dmulti = [0] * len(args)
                dmulti[slot] = 1
                return pot.h.partial((p, *subst(v, eps)), dmulti)
            r = owner.index(r_slot)
            total = 0.0 + 0.0j
            vv = subst(v, eps)
            for l_idx, vslot in enumerate(owner):
                if l_idx < r:
                    continue
                dmulti = [0] * len(args)
                dmulti[1 + vslot] = 1
                total += math.comb(l_idx, r) * eps**r * pot.h.partial(
                    (p, *vv), dmulti
                )
            return total

        return eps_coeff(chain)

    dom = _collided_domain(pot.h.domain, groups, offset=1, arity=1 + m)
    return Potential(
        JetEvaluator(1 + m, fn, domain=dom, partial_fn=pf,
                     label=f"{pot.label}:collided[{order}]"),
        label=f"{pot.label}:collided[{order}]",
    )


def pushforward(s: GTStructure, c: CoordinateChange,
                clearance_scale: float = 0.5) -> GTStructure:
    """Transport the structure through p = mu(p~, v).

    g~(p~) = mu'(p~)^2 g(mu(p~)); f picks up the extra g(mu(p~1))(mu(p~2))
    term so that the pole normalization survives.
    """
    m = s.m
    mu = c.mu
    dp = [1] + [0] * m

    def mu_val(pt, v):
        return mu.value((pt, *v))

    def mu_d(pt, v):
        return mu.partial((pt, *v), dp)

    def g_fn(i):
        def fn(*args):
            pt, v = args[0], args[1:]
            return mu_d(pt, v) ** 2 * s.g[i].value((mu_val(pt, v), *v))

        return fn

    def f_fn(*args):
        pt1, pt2, v = args[0], args[1], args[2:]
        z1, z2 = mu_val(pt1, v), mu_val(pt2, v)
        # g(mu(p1)) applied to mu(p2, v) through the fiber coordinates
        gterm = 0.0 + 0.0j
        for j in range(m):
            dv = [0] * (1 + m)
            dv[1 + j] = 1
            gterm += s.g[j].value((z1, *v)) * mu.partial((pt2, *v), dv)
        return (mu_d(pt1, v) ** 2 / mu_d(pt2, v)) * (s.f.value((z1, z2, *v)) - gterm)

    g_dom = _PullbackDomain(lambda args: (mu_val(args[0], args[1:]), *args[1:]),
                            [s.g[i].domain for i in range(m)], clearance_scale)
    f_dom = _PullbackDomain(
        lambda args: (mu_val(args[0], args[2:]), mu_val(args[1], args[2:]), *args[2:]),
        [s.f.domain], clearance_scale)
    return GTStructure(
        m=m,
        g=[JetEvaluator(1 + m, g_fn(i), domain=Domain((g_dom,)),
                        label=f"{s.label}:pushed g[{i}]") for i in range(m)],
        f=JetEvaluator(2 + m, f_fn, domain=Domain((f_dom,)),
                       label=f"{s.label}:pushed f"),
        label=f"{s.label}:pushed",
        p_box=s.p_box,
        v_boxes=s.v_boxes,
        min_separation=s.min_separation,
    )


class _PullbackDomain:
    """Clearance of a mapped locus, pulled back conservatively: the image
    clearance scaled down to absorb the local stretch of the map."""

    def __init__(self, mapping, domains, scale):
        self.mapping = mapping
        self.domains = domains
        self.scale = scale

    def clearance(self, args, slot):
        image = self.mapping(tuple(args))
        best = math.inf
        for d in self.domains:
            for s_img in range(len(image)):
                best = min(best, d.clearance(image, s_img))
        return self.scale * best

    def remap(self, mapping):
        raise NotImplementedError("pullback domains are terminal")


def pushforward_lambda(e: EnhancedGT, c: CoordinateChange) -> EnhancedGT:
    base = pushforward(e.base, c)
    m = e.m
    mu = c.mu
    dp = [1] + [0] * m

    def fn(*args):
        pt1, pt2, v = args[0], args[1], args[2:]
        z1, z2 = mu.value((pt1, *v)), mu.value((pt2, *v))
        return mu.partial((pt1, *v), dp) * e.lam.value((z1, z2, *v))

    dom = _PullbackDomain(
        lambda args: (mu.value((args[0], *args[2:])), mu.value((args[1], *args[2:])), *args[2:]),
        [e.lam.domain], 0.5)
    lam = JetEvaluator(2 + m, fn, domain=Domain((dom,)),
                       label=f"{e.label}:pushed lambda")
    return EnhancedGT(base, lam)


def contour_endpoint_defect(
    e: EnhancedGT, path: PathSpec, p1: complex, p2: complex, v: Sequence[complex]
) -> float:
    """|[lambda(t, p2) f(p1, t)] at path end - same at path start|; zero is
    the sufficient condition for the contour potential."""
    if path.closed:
        return 0.0
    t0, t1 = path.vertices[0], path.vertices[-1]

    def boundary(t):
        return e.lam.value((t, p2, *v)) * e.base.f_value(p1, t, v)

    return abs(boundary(t1) - boundary(t0))


def potential_from_contour(
    e: EnhancedGT,
    path: PathSpec | Callable[[Sequence[complex]], PathSpec],
    label: str = "contour",
    endpoint_tol: float | None = None,
    endpoint_probe: Sample | None = None,
    domain: Domain = EMPTY_DOMAIN,
) -> Potential:
    """h(p, v) = integral of lambda(t, p, v) dt along the path.

    The path may be a factory of the fiber point (endpoints that move with
    the moduli are then differentiated through automatically).  When
    ``endpoint_tol`` is set and the path is fixed and open, the endpoint
    condition is enforced at the probe sample.
    """
    m = e.m
    lam = e.lam

    def path_for(v) -> PathSpec:
        return path(v) if callable(path) else path

    if endpoint_tol is not None and not callable(path) and not path.closed:
        if endpoint_probe is None:
            raise ValueError("endpoint_tol requires an endpoint_probe sample")
        ps, v = endpoint_probe
        defect = contour_endpoint_defect(e, path, ps[0], ps[1], v)
        if defect > endpoint_tol:
            raise DomainViolation(
                f"contour endpoint condition violated: defect {defect:.3e}"
            )

    def fn(*args):
        p, v = args[0], args[1:]
        return path_integrate(lam, 0, (0.0, p, *v), path_for(v))

    return Potential(
        JetEvaluator(1 + m, fn, domain=domain, label=label), label=label
    )


# ---------------------------------------------------------------------------
# Lie-algebroid constants
# ---------------------------------------------------------------------------


@dataclass
class AlgebroidTable:
    """Taylor data of f - 1/(p1-p2) about a diagonal point z, plus the
    induced structure-constant table on the basis e_1 = d/dz,
    e_{i+2} = (i-th Taylor coefficient of g about z)."""

    z: complex
    order: int
    f_coeffs: dict  # (i, j) -> complex

    def f_coeff(self, i: int, j: int) -> complex:
        if i < 0 or j < 0:
            return 0.0 + 0.0j
        if (i, j) not in self.f_coeffs:
            raise ValueError(f"coefficient ({i},{j}) beyond truncation order {self.order}")
        return self.f_coeffs[(i, j)]

    def bracket(self, i: int, j: int) -> dict[int, complex]:
        """[e_i, e_j] as a map basis-index -> coefficient."""
        if min(i, j) < 1:
            raise ValueError("basis indices start at 1")
        out: dict[int, complex] = {}

        def add(idx, coeff):
            if abs(coeff) > 0:
                out[idx] = out.get(idx, 0.0 + 0.0j) + coeff

        add(i + j, complex(j - i))
        for r in range(0, i):
            add(i - r + 1, (i + r - 1) * self.f_coeff(j - 2, r))
        for r in range(0, j):
            add(j - r + 1, -(j + r - 1) * self.f_coeff(i - 2, r))
        return {k: v for k, v in out.items() if abs(v) > 0}


def algebroid_constants(
    s: GTStructure,
    z: complex,
    v: Sequence[complex],
    order: int,
    nodes: int = 64,
) -> AlgebroidTable:
    """Taylor coefficients f_{i,j} of f - 1/(p1 - p2) about (z, z).

    Nested circle quadrature with distinct radii keeps the two arguments
    off the diagonal; the subtracted principal part makes the integrand
    holomorphic there anyway.
    """
    if order > 6:
        raise ValueError("truncation order above 6 is outside the reliable range")
    base_clear = min(
        (ex.clearance((z, z, *v), 0) for ex in s.f.domain.exclusions
         if not isinstance(ex, Diagonal)),
        default=1.0,
    )
    r1 = 0.2 * base_clear
    r2 = 0.1 * base_clear
    coeffs: dict[tuple[int, int], complex] = {}
    # inner rings in p2 at each p1 node, then the outer transform in p1
    p1_nodes = [z + r1 * np.exp(2j * math.pi * k / nodes) for k in range(nodes)]
    inner = np.empty((nodes, order + 1), dtype=complex)
    for k, p1 in enumerate(p1_nodes):
        ring = np.array(
            [
                s.f.value((p1, z + r2 * np.exp(2j * math.pi * l / nodes), *v))
                - 1.0 / (p1 - z - r2 * np.exp(2j * math.pi * l / nodes))
                for l in range(nodes)
            ]
        )
        for j in range(order + 1):
            phases = np.exp(-2j * math.pi * j * np.arange(nodes) / nodes)
            inner[k, j] = np.sum(ring * phases) / (nodes * r2**j)
    for i in range(order + 1):
        phases = np.exp(-2j * math.pi * i * np.arange(nodes) / nodes)
        for j in range(order + 1):
            coeffs[(i, j)] = complex(np.sum(inner[:, j] * phases) / (nodes * r1**i))
    return AlgebroidTable(z=z, order=order, f_coeffs=coeffs)


def basis_field_components(
    s: GTStructure, z: complex, v: Sequence[complex], k: int
) -> list[complex]:
    """Components of e_k at (z, v): e_1 is the base translation (no fiber
    components); e_{i+2} is the i-th Taylor coefficient of g about z."""
    if k == 1:
        return [0.0 + 0.0j] * s.m
    i = k - 2
    out = []
    for j in range(s.m):
        multi = [i] + [0] * s.m
        out.append(s.g[j].partial((z, *v), multi) / math.factorial(i))
    return out
