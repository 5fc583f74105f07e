"""Deterministic complex-analytic numerics.

Everything downstream is built on three primitives: derivatives of
holomorphic evaluators by Cauchy circle quadrature, Gauss-Legendre path
integration, and seeded rejection sampling in complex boxes.  The genus-1
special functions (the odd theta series and its logarithmic derivative)
live here as well since they are plain scalar functions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainViolation,
    InvalidModulus,
    NonConvergence,
    PoleHit,
    SamplingExhausted,
)

TWO_PI_I = 2j * math.pi

DEFAULT_NODES = 32
DEFAULT_RADIUS_FRACTION = 0.25
MAX_RADIUS = 0.35


def require_finite(*values: complex) -> None:
    for z in values:
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainViolation(f"non-finite complex value {z!r}")


# ---------------------------------------------------------------------------
# exclusion loci / domains
# ---------------------------------------------------------------------------


class Exclusion:
    """A singular locus.  clearance() bounds how far args[slot] may move
    before the locus is hit; slots not involved return +inf."""

    def clearance(self, args: Sequence[complex], slot: int) -> float:
        raise NotImplementedError

    def remap(self, mapping: Sequence[int]) -> "Exclusion":
        """Return the same locus with slot s renamed to mapping[s]."""
        raise NotImplementedError


class FixedPoints(Exclusion):
    """args[slot] must avoid a fixed finite point set (e.g. p in {0, 1})."""

    def __init__(self, slots: Sequence[int], points: Sequence[complex]):
        self.slots = tuple(slots)
        self.points = tuple(complex(p) for p in points)

    def clearance(self, args, slot):
        if slot not in self.slots:
            return math.inf
        return min(abs(args[slot] - p) for p in self.points)

    def remap(self, mapping):
        return FixedPoints([mapping[s] for s in self.slots], self.points)


class Diagonal(Exclusion):
    """args[i] = args[j] is excluded (simple pole on the diagonal)."""

    def __init__(self, i: int, j: int):
        self.i, self.j = i, j

    def clearance(self, args, slot):
        if slot not in (self.i, self.j):
            return math.inf
        return abs(args[self.i] - args[self.j])

    def remap(self, mapping):
        return Diagonal(mapping[self.i], mapping[self.j])


class HalfPlane(Exclusion):
    """Im args[slot] > 0 required (modular parameters)."""

    def __init__(self, slot: int):
        self.slot = slot

    def clearance(self, args, slot):
        if slot != self.slot:
            return math.inf
        return args[self.slot].imag

    def remap(self, mapping):
        return HalfPlane(mapping[self.slot])


class LatticePoints(Exclusion):
    """args[i] - args[j] (or args[i] alone, j None) must avoid Z + tau Z,
    with tau read from args[tau_slot]."""

    def __init__(self, i: int, tau_slot: int, j: int | None = None):
        self.i, self.j, self.tau_slot = i, j, tau_slot

    def clearance(self, args, slot):
        involved = {self.i, self.tau_slot}
        if self.j is not None:
            involved.add(self.j)
        if slot not in involved:
            return math.inf
        z = args[self.i] - (args[self.j] if self.j is not None else 0.0)
        return lattice_distance(z, args[self.tau_slot])

    def remap(self, mapping):
        j = None if self.j is None else mapping[self.j]
        return LatticePoints(mapping[self.i], mapping[self.tau_slot], j)


class CallableExclusion(Exclusion):
    """Arbitrary clearance rule: fn(args) bounds how far the listed slots
    may move before a singular locus is hit."""

    def __init__(self, fn: Callable[[Sequence[complex]], float], slots: Sequence[int]):
        self.fn = fn
        self.slots = tuple(slots)

    def clearance(self, args, slot):
        if slot not in self.slots:
            return math.inf
        return self.fn(args)

    def remap(self, mapping):
        raise NotImplementedError("callable exclusions cannot be remapped")


def lattice_distance(z: complex, tau: complex) -> float:
    """Distance from z to the lattice Z + tau Z (Im tau > 0)."""
    if tau.imag <= 0:
        raise InvalidModulus(f"Im tau must be positive, got {tau}")
    n = round(z.imag / tau.imag)
    best = math.inf
    for dn in (-1, 0, 1):
        w = z - (n + dn) * tau
        m = round(w.real)
        for dm in (-1, 0, 1):
            best = min(best, abs(w - (m + dm)))
    return best


@dataclass(frozen=True)
class Domain:
    """Set of declared singular loci for an evaluator."""

    exclusions: tuple[Exclusion, ...] = ()

    def clearance(self, args: Sequence[complex], slot: int) -> float:
        if not self.exclusions:
            return math.inf
        return min(e.clearance(args, slot) for e in self.exclusions)

    def remap(self, mapping: Sequence[int]) -> "Domain":
        return Domain(tuple(e.remap(mapping) for e in self.exclusions))

    def merged(self, other: "Domain") -> "Domain":
        return Domain(self.exclusions + other.exclusions)


EMPTY_DOMAIN = Domain()


# ---------------------------------------------------------------------------
# jet evaluators
# ---------------------------------------------------------------------------


class JetEvaluator:
    """A pure holomorphic function handle: values plus partial derivatives.

    ``fn`` maps ``arity`` complex arguments to a complex value.  Partials
    default to Cauchy circle quadrature with the radius derived from the
    declared domain; an optional ``partial_fn(args, multi)`` may supply
    analytic derivatives (return NotImplemented to fall back).
    """

    def __init__(
        self,
        arity: int,
        fn: Callable[..., complex],
        domain: Domain = EMPTY_DOMAIN,
        partial_fn: Callable | None = None,
        label: str = "",
        nodes: int = DEFAULT_NODES,
    ):
        self.arity = arity
        self.fn = fn
        self.domain = domain
        self.partial_fn = partial_fn
        self.label = label
        self.nodes = nodes

    def value(self, args: Sequence[complex]) -> complex:
        assert len(args) == self.arity, (len(args), self.arity)
        return complex(self.fn(*args))

    def deriv_radius(self, args: Sequence[complex], slot: int) -> float:
        c = self.domain.clearance(args, slot)
        if c <= 0:
            raise DomainViolation(
                f"argument {slot} of {self.label or 'evaluator'} sits on a "
                f"declared singular locus"
            )
        r = DEFAULT_RADIUS_FRACTION * c
        return min(r, MAX_RADIUS)

    def eval_circle(
        self,
        slot: int,
        args: Sequence[complex],
        center: complex,
        radius: float,
        nodes: int,
    ) -> np.ndarray:
        """Values on an equispaced circle in one slot.  Subclasses with
        multivalued ingredients override this to continue them along the
        circle."""
        args = list(args)
        out = np.empty(nodes, dtype=complex)
        for k in range(nodes):
            args[slot] = center + radius * cmath.exp(TWO_PI_I * k / nodes)
            out[k] = self.fn(*args)
        return out

    def partial(self, args: Sequence[complex], multi: Sequence[int]) -> complex:
        assert len(multi) == self.arity
        if all(o == 0 for o in multi):
            return self.value(args)
        if self.partial_fn is not None:
            res = self.partial_fn(tuple(args), tuple(multi))
            if res is not NotImplemented:
                return complex(res)
        slot = next(i for i, o in enumerate(multi) if o > 0)
        order = multi[slot]
        rest = tuple(0 if i == slot else o for i, o in enumerate(multi))
        radius = self.deriv_radius(args, slot)
        center = args[slot]
        nodes = self.nodes
        if any(rest):
            work = list(args)
            vals = np.empty(nodes, dtype=complex)
            for k in range(nodes):
                work[slot] = center + radius * cmath.exp(TWO_PI_I * k / nodes)
                vals[k] = self.partial(work, rest)
            return _circle_coeff(vals, radius, order) * math.factorial(order)
        vals = self.eval_circle(slot, args, center, radius, nodes)
        return _circle_coeff(vals, radius, order) * math.factorial(order)


def _circle_coeff(vals: np.ndarray, radius: float, k: int) -> complex:
    """k-th Taylor/Laurent coefficient from equispaced circle samples."""
    n = len(vals)
    phases = np.exp(-TWO_PI_I * k * np.arange(n) / n)
    return complex(np.sum(vals * phases) / (n * radius**k))


def evaluator_from_fn(
    arity: int,
    fn: Callable[..., complex],
    domain: Domain = EMPTY_DOMAIN,
    label: str = "",
    partial_fn: Callable | None = None,
) -> JetEvaluator:
    return JetEvaluator(arity, fn, domain=domain, partial_fn=partial_fn, label=label)


class ReindexedEvaluator(JetEvaluator):
    """Wrap a base evaluator with permuted/embedded argument slots.

    ``source[b]`` gives the slot of the new argument vector feeding base
    slot b.  Sources must be distinct; new slots not referenced are inert
    (the function is constant in them, partials there vanish).
    """

    def __init__(self, base: JetEvaluator, arity: int, source: Sequence[int], label: str = ""):
        assert len(source) == base.arity
        assert len(set(source)) == len(source)
        self.base = base
        self.source = tuple(source)
        domain = base.domain.remap(self.source)
        super().__init__(arity, self._fn, domain=domain, label=label or base.label)

    def _fn(self, *args):
        return self.base.fn(*(args[s] for s in self.source))

    def eval_circle(self, slot, args, center, radius, nodes):
        if slot not in self.source:
            return np.full(nodes, self.value(args), dtype=complex)
        bslot = self.source.index(slot)
        bargs = [args[s] for s in self.source]
        return self.base.eval_circle(bslot, bargs, center, radius, nodes)

    def partial(self, args, multi):
        if any(o > 0 and s not in self.source for s, o in enumerate(multi)):
            return 0.0 + 0.0j
        bargs = [args[s] for s in self.source]
        bmulti = [multi[s] for s in self.source]
        return self.base.partial(bargs, bmulti)


# ---------------------------------------------------------------------------
# circle quadrature operations
# ---------------------------------------------------------------------------


def cauchy_derivative(
    e: JetEvaluator,
    slot: int,
    args: Sequence[complex],
    order: int,
    radius: float | None = None,
    nodes: int = DEFAULT_NODES,
    tol: float | None = None,
) -> complex:
    """order-th derivative in one slot via trapezoid quadrature on a circle.

    Spectrally accurate for holomorphic integrands.  With ``tol`` set the
    node count is doubled once and the two results must agree.
    """
    require_finite(*args)
    if order < 0:
        raise ValueError("order must be >= 0")
    args = list(args)
    center = args[slot]
    if radius is None:
        radius = e.deriv_radius(args, slot)
    clearance = e.domain.clearance(args, slot)
    if radius >= clearance:
        raise DomainViolation(
            f"derivative disc of radius {radius} intersects a pole locus "
            f"(clearance {clearance})"
        )
    if order == 0 and tol is None:
        return e.value(args)

    def compute(n):
        vals = e.eval_circle(slot, args, center, radius, n)
        return _circle_coeff(vals, radius, order) * math.factorial(order)

    res = compute(nodes)
    if tol is not None:
        res2 = compute(2 * nodes)
        scale = max(abs(res2), 1.0)
        if abs(res - res2) > tol * scale:
            raise NonConvergence(
                f"cauchy_derivative did not converge: {abs(res - res2):.3e} "
                f"change on node doubling"
            )
        res = res2
    return res


def laurent_coeff(
    e: JetEvaluator,
    slot: int,
    args: Sequence[complex],
    center: complex,
    k: int,
    radius: float,
    nodes: int = DEFAULT_NODES,
    tol: float | None = None,
) -> complex:
    """k-th Laurent coefficient of e (in one slot) about ``center``."""
    require_finite(*args, center)
    args = list(args)

    def compute(n):
        vals = e.eval_circle(slot, args, center, radius, n)
        return _circle_coeff(vals, radius, k)

    res = compute(nodes)
    if tol is not None:
        res2 = compute(2 * nodes)
        scale = max(abs(res2), 1.0)
        if abs(res - res2) > tol * scale:
            raise NonConvergence("laurent_coeff did not converge under node doubling")
        res = res2
    return res


# ---------------------------------------------------------------------------
# paths and path integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathSpec:
    """Integration path: a circle or a (closed) polyline.

    ``nodes`` is the Gauss-Legendre order used per panel.
    """

    kind: str  # "circle" | "polyline" | "closed_polyline"
    nodes: int = 24
    center: complex = 0.0
    radius: float = 0.0
    vertices: tuple[complex, ...] = ()

    def __post_init__(self):
        if self.kind == "circle":
            if self.radius <= 0:
                raise ValueError("circle radius must be positive")
        elif self.kind in ("polyline", "closed_polyline"):
            if len(self.vertices) < 2:
                raise ValueError("polyline needs at least 2 vertices")
        else:
            raise ValueError(f"unknown path kind {self.kind!r}")
        if self.nodes < 8:
            raise ValueError("node count must be >= 8")

    @property
    def closed(self) -> bool:
        if self.kind == "circle" or self.kind == "closed_polyline":
            return True
        return abs(self.vertices[0] - self.vertices[-1]) < 1e-14

    def segments(self) -> list[tuple[complex, complex]]:
        if self.kind == "circle":
            raise ValueError("circle paths have no straight segments")
        verts = list(self.vertices)
        if self.kind == "closed_polyline":
            verts = verts + [verts[0]]
        return list(zip(verts[:-1], verts[1:]))

    def reversed(self) -> "PathSpec":
        if self.kind == "circle":
            # reversal of a circle is handled by negating in path_integrate
            raise ValueError("use polyline paths for reversal tests")
        return PathSpec(self.kind, self.nodes, vertices=tuple(reversed(self.vertices)))


def circle_path(center: complex, radius: float, nodes: int = 24) -> PathSpec:
    return PathSpec("circle", nodes, center=complex(center), radius=radius)


def polyline_path(vertices: Sequence[complex], nodes: int = 24, closed: bool = False) -> PathSpec:
    kind = "closed_polyline" if closed else "polyline"
    return PathSpec(kind, nodes, vertices=tuple(complex(v) for v in vertices))


def path_integrate(
    e: JetEvaluator,
    slot: int,
    args: Sequence[complex],
    path: PathSpec,
    panels: int = 1,
    tol: float | None = None,
) -> complex:
    """Gauss-Legendre panel quadrature of e along the path (in one slot)."""
    require_finite(*args)

    def compute(refine: int) -> complex:
        x, w = np.polynomial.legendre.leggauss(path.nodes)
        total = 0.0 + 0.0j
        work = list(args)
        if path.kind == "circle":
            # parametrize by angle, split into panels
            npan = 4 * refine
            for j in range(npan):
                t0, t1 = 2 * math.pi * j / npan, 2 * math.pi * (j + 1) / npan
                tm, th = 0.5 * (t0 + t1), 0.5 * (t1 - t0)
                for xi, wi in zip(x, w):
                    t = tm + th * xi
                    z = path.center + path.radius * cmath.exp(1j * t)
                    dz = 1j * path.radius * cmath.exp(1j * t)
                    work[slot] = z
                    total += wi * th * e.fn(*work) * dz
            return total
        for a, b in path.segments():
            for j in range(refine):
                za = a + (b - a) * j / refine
                zb = a + (b - a) * (j + 1) / refine
                zm, zh = 0.5 * (za + zb), 0.5 * (zb - za)
                for xi, wi in zip(x, w):
                    work[slot] = zm + zh * xi
                    total += wi * zh * e.fn(*work)
        return total

    res = compute(panels)
    if tol is not None:
        res2 = compute(2 * panels)
        scale = max(abs(res2), 1.0)
        if abs(res - res2) > tol * scale:
            raise NonConvergence("path_integrate did not converge under panel refinement")
        res = res2
    return res


# ---------------------------------------------------------------------------
# seeded sampling (splitmix64)
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Fixed, documented 64-bit generator so reports reproduce across
    platforms.  Reference: Steele, Lea & Flood, splitmix64."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = self.next_u64() >> 11  # 53 bits
        return lo + (hi - lo) * (u * (1.0 / (1 << 53)))

    def complex_in_box(self, box: tuple[float, float, float, float]) -> complex:
        re = self.uniform(box[0], box[1])
        im = self.uniform(box[2], box[3])
        return complex(re, im)


Box = tuple[float, float, float, float]  # (re_min, re_max, im_min, im_max)


def sample_points(
    region: Box,
    count: int,
    seed: int,
    exclusions: Sequence[complex] = (),
    min_separation: float = 0.0,
    max_tries_per_point: int = 1000,
    rng: SplitMix64 | None = None,
) -> list[complex]:
    """Deterministic rejection sampling in a complex box."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return []
    gen = rng if rng is not None else SplitMix64(seed)
    pts: list[complex] = []
    tries = 0
    budget = max_tries_per_point * count
    while len(pts) < count:
        if tries >= budget:
            raise SamplingExhausted(
                f"placed {len(pts)}/{count} points after {tries} draws"
            )
        tries += 1
        z = gen.complex_in_box(region)
        if any(abs(z - q) < min_separation for q in exclusions):
            continue
        if any(abs(z - q) < min_separation for q in pts):
            continue
        pts.append(z)
    return pts


# ---------------------------------------------------------------------------
# genus-1 special functions
# ---------------------------------------------------------------------------


def _theta_trunc_index(im_p: float, im_tau: float, tol: float) -> int:
    """Symmetric truncation index K with the dropped tail below tol.

    Term magnitudes are exp(-2 pi (k im_p + k(k-1)/2 im_tau)); beyond the
    quadratic turnaround they decay faster than a geometric series with
    ratio exp(-pi im_tau), so bounding the first dropped term suffices.
    """
    if im_tau <= 0:
        raise InvalidModulus("Im tau must be positive")
    # turnaround index plus the tail-depth needed for the quadratic decay
    k0 = abs(im_p) / im_tau + 1.0
    depth = math.sqrt(max(-math.log(tol), 1.0) / (math.pi * im_tau))
    return int(math.ceil(k0 + depth)) + 3


def theta(p: complex, tau: complex, tol: float = 1e-12) -> complex:
    """Odd Jacobi-style theta series sum_k (-1)^k e^{2 pi i (k p + k(k-1) tau / 2)}.

    Truncation index is computed from the explicit tail bound, never
    hard-coded.
    """
    return theta_partial(p, tau, 0, 0, tol)


def theta_partial(
    p: complex, tau: complex, dp: int = 0, dtau: int = 0, tol: float = 1e-12
) -> complex:
    """Term-wise partial derivative of the theta series.

    Each term gains factors (2 pi i k)^dp (pi i k(k-1))^dtau; the
    polynomial growth is absorbed by widening the truncation window.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise InvalidModulus(f"Im tau must be positive, got {tau}")
    K = _theta_trunc_index(p.imag, tau.imag, tol) + 4 * (dp + dtau)
    total = 0.0 + 0.0j
    for k in range(-K, K + 1):
        expo = TWO_PI_I * (k * p + 0.5 * k * (k - 1) * tau)
        term = (-1) ** (k & 1) * cmath.exp(expo)
        if dp:
            term *= (TWO_PI_I * k) ** dp
        if dtau:
            term *= (1j * math.pi * k * (k - 1)) ** dtau
        total += term
    return total


def rho(p: complex, tau: complex, tol: float = 1e-12, guard: float = 1e-7) -> complex:
    """Logarithmic derivative theta'/theta (derivative in p)."""
    tau = complex(tau)
    p = complex(p)
    if tau.imag <= 0:
        raise InvalidModulus(f"Im tau must be positive, got {tau}")
    if lattice_distance(p, tau) < guard:
        raise PoleHit(f"rho evaluated within {guard} of a theta zero")
    th = theta_partial(p, tau, 0, 0, tol)
    thp = theta_partial(p, tau, 1, 0, tol)
    return thp / th


def rho_partial(p: complex, tau: complex, dp: int, dtau: int, tol: float = 1e-12) -> complex:
    """Partial derivatives of rho from truncated two-variable jets of theta.

    rho = (d/dp) log theta, so the (dp, dtau) partial of rho is the
    (dp+1, dtau) Taylor coefficient of log theta scaled by factorials.
    """
    n = dp + 1 + dtau
    jet = {}
    for i in range(n + 1):
        for j in range(n + 1 - i):
            jet[(i, j)] = theta_partial(p, tau, i, j, tol) / (
                math.factorial(i) * math.factorial(j)
            )
    log_jet = _jet_log(jet, n)
    c = log_jet[(dp + 1, dtau)]
    return c * math.factorial(dp + 1) * math.factorial(dtau)


def _jet_mul(a: dict, b: dict, n: int) -> dict:
    out = {(i, j): 0.0 + 0.0j for i in range(n + 1) for j in range(n + 1 - i)}
    for (i1, j1), v1 in a.items():
        for (i2, j2), v2 in b.items():
            i, j = i1 + i2, j1 + j2
            if i + j <= n:
                out[(i, j)] += v1 * v2
    return out


def _jet_log(a: dict, n: int) -> dict:
    """log of a truncated 2-variable Taylor series with a[(0,0)] != 0."""
    a00 = a[(0, 0)]
    if a00 == 0:
        raise PoleHit("log of a jet vanishing at the expansion point")
    u = {k: v / a00 for k, v in a.items()}
    u[(0, 0)] = 0.0 + 0.0j  # u = (a/a00) - 1
    out = {k: 0.0 + 0.0j for k in a}
    out[(0, 0)] = cmath.log(a00)
    power = {k: (1.0 + 0.0j if k == (0, 0) else 0.0 + 0.0j) for k in a}
    for m in range(1, n + 1):
        power = _jet_mul(power, u, n)
        sign = (-1) ** (m + 1) / m
        for k, v in power.items():
            out[k] += sign * v
    return out
