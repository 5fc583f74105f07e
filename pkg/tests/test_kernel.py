"""Numeric kernel: RNG, domains, jet evaluation, quadrature, theta/rho."""

from __future__ import annotations

import cmath
import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtlab.errors import DomainViolation, NonConvergence, SamplingExhausted
from gtlab.kernel import (
    Diagonal,
    Domain,
    FixedPoints,
    HalfPlane,
    JetEvaluator,
    LatticePoints,
    SplitMix64,
    cauchy_derivative,
    circle_path,
    lattice_distance,
    laurent_coeff,
    path_integrate,
    rho,
    sample_points,
    theta,
)

# ---------------------------------------------------------------------------
# SplitMix64
# ---------------------------------------------------------------------------


def test_splitmix64_reference_vectors():
    # first three outputs for seed 0, from the reference C implementation
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_splitmix64_is_deterministic_per_seed():
    a = [SplitMix64(42).uniform() for _ in range(5)]
    b = [SplitMix64(42).uniform() for _ in range(5)]
    assert a == b
    assert a != [SplitMix64(43).uniform() for _ in range(5)]


@given(st.integers(min_value=0, max_value=2**64 - 1))
@settings(max_examples=50, deadline=None)
def test_splitmix64_uniform_in_range(seed):
    rng = SplitMix64(seed)
    for _ in range(10):
        x = rng.uniform(-2.0, 3.0)
        assert -2.0 <= x <= 3.0


def test_complex_in_box_stays_inside():
    rng = SplitMix64(7)
    for _ in range(100):
        z = rng.complex_in_box((-1.0, 2.0, 0.5, 1.5))
        assert -1.0 <= z.real <= 2.0 and 0.5 <= z.imag <= 1.5


# ---------------------------------------------------------------------------
# domains and exclusions
# ---------------------------------------------------------------------------


def test_fixed_points_clearance():
    ex = FixedPoints([0], [1.0, -1.0])
    assert ex.clearance((1.0 + 0.5j, 9.0), 0) == pytest.approx(0.5)
    # other slots are unconstrained
    assert ex.clearance((1.0, 1.0), 1) == math.inf


def test_diagonal_clearance_both_slots():
    ex = Diagonal(0, 1)
    args = (0.2 + 0.1j, 0.5 + 0.1j)
    assert ex.clearance(args, 0) == pytest.approx(0.3)
    assert ex.clearance(args, 1) == pytest.approx(0.3)
    assert ex.clearance(args, 2) == math.inf


def test_half_plane_clearance():
    ex = HalfPlane(0)
    assert ex.clearance((0.3 + 0.7j,), 0) == pytest.approx(0.7)


def test_domain_remap_relabels_slots():
    dom = Domain((FixedPoints([0], [2.0]),))
    moved = dom.remap([3, 0])  # old slot 0 -> new slot 3
    assert moved.clearance((0.0, 0.0, 0.0, 2.0 + 0.25j), 3) == pytest.approx(0.25)
    assert moved.clearance((2.0, 0.0, 0.0, 9.0), 0) == math.inf


def test_domain_merged_takes_min_clearance():
    dom = Domain((FixedPoints([0], [0.0]),)).merged(
        Domain((FixedPoints([0], [1.0]),))
    )
    assert dom.clearance((0.1,), 0) == pytest.approx(0.1)
    assert dom.clearance((0.9,), 0) == pytest.approx(0.1)


def test_lattice_points_clearance_uses_tau():
    tau = 0.2 + 1.3j
    ex = LatticePoints(0, tau_slot=1)
    z = 0.4 + 0.3j
    assert ex.clearance((z, tau), 0) == pytest.approx(lattice_distance(z, tau))


def test_lattice_distance_zero_on_lattice():
    tau = 0.1 + 0.9j
    assert lattice_distance(2.0 + 3.0 * tau, tau) < 1e-12
    assert lattice_distance(0.5, tau) > 0.2


# ---------------------------------------------------------------------------
# jets and quadrature
# ---------------------------------------------------------------------------


def _rational():
    return JetEvaluator(
        1,
        lambda p: 1.0 / (p - 2.0),
        domain=Domain((FixedPoints([0], [2.0]),)),
        label="1/(p-2)",
    )


def test_first_derivative_of_simple_pole():
    # d/dp [1/(p-2)] at p=0 equals -1/(0-2)^2 = -1/4
    val = _rational().partial((0.0,), (1,))
    assert val == pytest.approx(-0.25, abs=1e-10)


def test_higher_derivatives_match_factorial_formula():
    e = _rational()
    for k in range(2, 6):
        expected = math.factorial(k) * (-1) ** k / (0.0 - 2.0) ** (k + 1)
        assert e.partial((0.0,), (k,)) == pytest.approx(expected, rel=1e-9)


def test_mixed_partials_of_exponential():
    e = JetEvaluator(2, lambda p, v: cmath.exp(p * v), domain=Domain())
    args = (0.3 + 0.1j, 0.7 - 0.2j)
    p, v = args
    # d^2/dp dv e^{pv} = (1 + pv) e^{pv}
    expected = (1 + p * v) * cmath.exp(p * v)
    assert e.partial(args, (1, 1)) == pytest.approx(expected, rel=1e-9)


def test_partial_fn_hook_takes_precedence():
    calls = []

    def pf(args, multi):
        calls.append(tuple(multi))
        if tuple(multi) == (1,):
            return 123.0 + 0.0j
        return NotImplemented

    e = JetEvaluator(1, lambda p: p * p, domain=Domain(), partial_fn=pf)
    assert e.partial((0.5,), (1,)) == 123.0
    # NotImplemented falls back to quadrature
    assert e.partial((0.5,), (2,)) == pytest.approx(2.0, rel=1e-9)
    assert (1,) in calls and (2,) in calls


def test_cauchy_derivative_rejects_disc_through_pole():
    with pytest.raises(DomainViolation):
        cauchy_derivative(_rational(), 0, (2.0 + 1e-12,), 1, radius=0.5)


def test_cauchy_derivative_node_doubling_flags_noise():
    # an integrand that is rough along the circle cannot converge under
    # node doubling
    e = JetEvaluator(
        1, lambda p: complex(hash(round(p.real * 1e6)) % 997) / 997.0,
        domain=Domain(),
    )
    with pytest.raises(NonConvergence):
        cauchy_derivative(e, 0, (0.7 + 0.2j,), 1, radius=0.3, tol=1e-10)


def test_laurent_coeff_recovers_residue():
    res = laurent_coeff(_rational(), 0, (0.0,), 2.0, -1, radius=0.3)
    assert res == pytest.approx(1.0, rel=1e-10)


def test_path_integrate_winding_number():
    e = JetEvaluator(1, lambda p: 1.0 / p, domain=Domain((FixedPoints([0], [0.0]),)))
    val = path_integrate(e, 0, (0.0,), circle_path(0.0, 1.0, nodes=32))
    assert val == pytest.approx(2j * math.pi, rel=1e-10)


def test_sample_points_respects_exclusions():
    pts = sample_points((-1, 1, -1, 1), 20, seed=3, exclusions=[0.0],
                        min_separation=0.3)
    assert len(pts) == 20
    assert all(abs(z) >= 0.3 for z in pts)
    with pytest.raises(SamplingExhausted):
        sample_points((-1, 1, -1, 1), 200, seed=3, min_separation=0.5)


# ---------------------------------------------------------------------------
# theta / rho against an independent special-function library
# ---------------------------------------------------------------------------

TAU = 0.3 + 1.1j
ZS = [0.17 + 0.24j, -0.31 + 0.08j, 0.45 - 0.12j]


def _jtheta1(z, tau, order=0):
    q = mp.exp(1j * mp.pi * tau)
    return complex(mp.jtheta(1, mp.pi * z, q, order))


def test_theta_matches_jtheta1_up_to_normalization():
    # theta(p, tau) = C(tau) e^{i pi p} theta_1(pi p | tau): the ratio, with
    # the exponential stripped, must be p-independent
    ratios = [
        complex(theta(z, TAU)) / _jtheta1(z, TAU) * cmath.exp(-1j * cmath.pi * z)
        for z in ZS
    ]
    for r in ratios[1:]:
        assert r == pytest.approx(ratios[0], rel=1e-10)


def test_rho_matches_log_derivative_of_jtheta1():
    # rho(p, tau) = pi theta_1'(pi p)/theta_1(pi p) + i pi exactly
    for z in ZS:
        oracle = cmath.pi * _jtheta1(z, TAU, 1) / _jtheta1(z, TAU) + 1j * cmath.pi
        assert complex(rho(z, TAU)) == pytest.approx(oracle, rel=1e-10)


def test_rho_quasi_periodicity():
    z = 0.21 + 0.13j
    assert complex(rho(z + 1.0, TAU)) == pytest.approx(complex(rho(z, TAU)), rel=1e-10)
    jump = complex(rho(z + TAU, TAU)) - complex(rho(z, TAU))
    assert jump == pytest.approx(-2j * math.pi, rel=1e-10)


def test_rho_simple_pole_at_origin():
    # residue-1 pole: z * rho(z) -> 1 as z -> 0
    for eps in (1e-3, 1e-4):
        z = eps * cmath.exp(0.37j)
        assert z * complex(rho(z, TAU)) == pytest.approx(1.0, abs=50 * eps)
