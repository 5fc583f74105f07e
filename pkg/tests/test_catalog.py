"""Catalog instances against independently coded closed forms."""

from __future__ import annotations

import cmath
import math

import mpmath as mp
import pytest

from gtlab import catalog
from gtlab.errors import ConfigError
from gtlab.kernel import JetEvaluator


def test_registry_contents():
    assert set(catalog.CATALOG) == {"benney", "genus0", "genus1", "genus2"}
    for name in ("benney", "genus0", "genus1"):
        assert catalog.CATALOG[name].build_enhanced is not None
        assert catalog.CATALOG[name].potentials is not None


def test_unknown_structure_raises():
    with pytest.raises(ConfigError):
        catalog.build_structure("genus7")
    with pytest.raises(ConfigError):
        catalog.build_enhanced("genus2")


def test_minimum_puncture_counts():
    with pytest.raises(ConfigError):
        catalog.build_structure("benney", 0)
    with pytest.raises(ConfigError):
        catalog.build_structure("genus0", 0)


# ---------------------------------------------------------------------------
# genus 0: independent partial-fraction evaluation
# ---------------------------------------------------------------------------


def _sphere_kernel(p, u):
    # u(u-1) / ((p-u) p (p-1)) recomputed from its partial fractions
    return (u - 1.0) / p - u / (p - 1.0) + 1.0 / (p - u)


def test_genus0_components_match_partial_fractions():
    s = catalog.build_structure("genus0", 2)
    v = (0.5 + 1.2j, -0.8 + 0.7j)
    p1, p2 = 1.3 + 0.4j, -0.5 - 0.6j
    assert s.f.value((p1, p2, *v)) == pytest.approx(
        _sphere_kernel(p1, p2), rel=1e-13)
    for i in range(2):
        assert s.g[i].value((p1, *v)) == pytest.approx(
            _sphere_kernel(p1, v[i]), rel=1e-13)


def test_genus0_analytic_partials_match_quadrature():
    s = catalog.build_structure("genus0", 1)
    args = (1.3 + 0.4j, -0.5 - 0.6j, 0.5 + 1.2j)
    bare = JetEvaluator(3, s.f.fn, domain=s.f.domain)
    for multi in [(1, 0, 0), (0, 1, 0), (2, 0, 0), (1, 1, 0), (0, 2, 0)]:
        assert s.f.partial(args, multi) == pytest.approx(
            bare.partial(args, multi), rel=1e-8)


def test_genus0_f_residue_on_diagonal():
    # f ~ 1/(p1 - p2): the last partial-fraction term carries residue +1
    s = catalog.build_structure("genus0", 1)
    v = (0.6 + 0.9j,)
    p2 = 0.5 + 0.5j
    for eps in (1e-4, 1e-5):
        val = s.f.value((p2 + eps, p2, *v))
        assert val * eps == pytest.approx(1.0, abs=100 * eps)


# ---------------------------------------------------------------------------
# genus 1: independent theta-function evaluation (mpmath)
# ---------------------------------------------------------------------------


def _rho_oracle(z, tau):
    # log-derivative of theta_1 plus the i pi normalization shift
    q = mp.exp(1j * mp.pi * tau)
    return complex(
        mp.pi * mp.jtheta(1, mp.pi * z, q, 1) / mp.jtheta(1, mp.pi * z, q)
    ) + 1j * cmath.pi


def test_genus1_f_matches_theta_oracle():
    s = catalog.build_structure("genus1", 1)
    tau = 0.2 + 1.3j
    u = 0.4 + 0.25j
    p1, p2 = 0.12 + 0.08j, -0.21 + 0.17j
    expected = _rho_oracle(p1 - p2, tau) - _rho_oracle(p1, tau)
    assert s.f.value((p1, p2, u, tau)) == pytest.approx(expected, rel=1e-10)


def test_genus1_g_matches_theta_oracle():
    s = catalog.build_structure("genus1", 1)
    tau = 0.2 + 1.3j
    u = 0.4 + 0.25j
    p = 0.12 + 0.08j
    expected = _rho_oracle(p - u, tau) - _rho_oracle(p, tau)
    assert s.g[0].value((p, u, tau)) == pytest.approx(expected, rel=1e-10)
    # the modulus direction moves with constant speed 2 pi i
    assert s.g[1].value((p, u, tau)) == pytest.approx(2j * math.pi, rel=1e-14)


def test_genus1_f_double_periodicity_in_p2():
    s = catalog.build_structure("genus1", 1)
    tau = 0.1 + 1.1j
    u = 0.35 + 0.2j
    p1, p2 = 0.1 + 0.05j, -0.15 + 0.12j
    base = s.f.value((p1, p2, u, tau))
    assert s.f.value((p1, p2 + 1.0, u, tau)) == pytest.approx(base, rel=1e-9)
    # the lambda enhancement differs from f by the constant 2 pi i, which is
    # exactly the p2 -> p2 + tau monodromy of rho
    shifted = s.f.value((p1, p2 + tau, u, tau))
    assert shifted - base == pytest.approx(2j * math.pi, rel=1e-9)


# ---------------------------------------------------------------------------
# genus 2: independent square-root evaluation
# ---------------------------------------------------------------------------


def _genus2_f_oracle(p1, p2, a, b, c):
    def quintic(p):
        return p * (p - 1.0) * (p - a) * (p - b) * (p - c)

    q1, q2 = cmath.sqrt(quintic(p1)), cmath.sqrt(quintic(p2))
    A1 = (p1 - a) * (p1 - b) * (p1 - c)
    return (A1 * p2 * (p2 - 1.0) + q1 * q2) / (
        2.0 * (p1 - p2) * p1 * (p1 - 1.0) * A1
    )


def test_genus2_f_matches_direct_formula():
    s = catalog.build_structure("genus2")
    a, b, c = 1.7 + 0.1j, 2.9 - 0.05j, 4.1 + 0.2j
    p1, p2 = 0.4 + 0.9j, -1.1 - 0.5j
    assert s.f.value((p1, p2, a, b, c)) == pytest.approx(
        _genus2_f_oracle(p1, p2, a, b, c), rel=1e-13)


def test_genus2_g_is_half_sphere_kernel():
    s = catalog.build_structure("genus2")
    a, b, c = 1.7, 2.9, 4.1
    p = 0.4 + 0.9j
    for i, e in enumerate((a, b, c)):
        expected = e * (e - 1.0) / ((p - e) * 2.0 * p * (p - 1.0))
        assert s.g[i].value((p, a, b, c)) == pytest.approx(expected, rel=1e-13)


def test_genus2_f_diagonal_residue():
    s = catalog.build_structure("genus2")
    a, b, c = 1.7, 2.9, 4.1
    p2 = 0.4 + 0.9j
    for eps in (1e-4, 1e-5):
        val = s.f.value((p2 + eps, p2, a, b, c))
        assert val * eps == pytest.approx(1.0, abs=1e3 * eps)


# ---------------------------------------------------------------------------
# potentials: values against independent formulas
# ---------------------------------------------------------------------------


def test_benney_potentials_are_logs_and_identity():
    pots = catalog.build_potentials("benney", 2)
    v = (0.3 + 0.2j, -0.6 + 0.4j)
    p = 1.2 + 0.8j
    assert pots[0].h.value((p, *v)) == pytest.approx(
        cmath.log(p - v[0]), rel=1e-13)
    assert pots[1].h.value((p, *v)) == pytest.approx(
        cmath.log(p - v[1]), rel=1e-13)
    assert pots[2].h.value((p, *v)) == pytest.approx(p, rel=1e-13)


def test_genus1_linear_potential_slope():
    # the p - tau potential has dh/dp = 1 and dh/dtau = -1
    pots = catalog.build_potentials("genus1", 1)
    fam_args = (0.1 + 0.05j, 0.4 + 0.25j, 0.2 + 1.3j)
    lin = pots[0]
    assert lin.h.partial(fam_args, (1, 0, 0)) == pytest.approx(1.0, abs=1e-12)
    assert lin.h.partial(fam_args, (0, 0, 1)) == pytest.approx(-1.0, abs=1e-12)
