"""Genus-2 period matrix, interval integrals, and the variational check."""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from gtlab.errors import ConfigError
from gtlab.hyperell import (
    PeriodData,
    interval_integrals,
    periods,
    rauch_check,
    rauch_prediction,
)

MODULI = (1.6, 2.8, 4.3)


def test_moduli_validation():
    for bad in [(2.0, 2.0, 3.0), (0.5, 2.0, 3.0), (3.0, 2.0, 4.0),
                (1.5, 1.5005, 3.0)]:
        with pytest.raises(ConfigError):
            interval_integrals(bad)


def test_interval_integrals_match_adaptive_quadrature():
    # independent oracle: mpmath adaptive quadrature of p^j dp / q on each
    # gap; q = i^(4-k) |q| on the k-th gap, so the integral carries i^(k-4)
    a, b, c = MODULI
    es = [0.0, 1.0, a, b, c]
    J = interval_integrals(MODULI, nodes=200)
    for k in range(4):
        phase = 1j ** (k - 4)
        for j in range(2):
            val = mp.quad(
                lambda p: p**j / mp.sqrt(abs(p * (p - 1) * (p - a)
                                              * (p - b) * (p - c))),
                [es[k], es[k + 1]],
            )
            oracle = complex(phase * val)
            assert J[j, k] == pytest.approx(oracle, rel=1e-9), (j, k)


def test_period_matrix_symmetry_and_positivity():
    pd = periods(MODULI)
    assert isinstance(pd, PeriodData)
    scale = float(np.max(np.abs(pd.B)))
    assert pd.symmetry_error / scale < 1e-10
    assert pd.positive
    assert min(pd.im_eigenvalues) > 0.1  # comfortably positive definite
    assert pd.convergence_error < 1e-10


def test_period_matrix_converges_under_node_doubling():
    pd = periods(MODULI, nodes=100, check_tol=1e-8)
    assert pd.convergence_error < 1e-8


def test_rauch_prediction_is_symmetric():
    pd = periods(MODULI)
    for branch in range(3):
        dB = rauch_prediction(pd, branch)
        assert abs(dB[0, 1] - dB[1, 0]) < 1e-14


@pytest.mark.parametrize("branch", [0, 1, 2])
def test_rauch_variation_matches_finite_difference(branch):
    rd = rauch_check(MODULI, branch, delta=1e-4)
    assert rd.max_rel_error < 1e-4, rd.max_rel_error
    # the numeric derivative itself must have converged in the step
    assert rd.step_stability < 1e-4


def test_rauch_rejects_bad_branch():
    with pytest.raises(ConfigError):
        rauch_check(MODULI, 3)


def test_degenerating_handle_blows_up_a_period():
    # as b -> a the cycle around the (a, b) gap pinches: the corresponding
    # entry of Im B grows without bound
    wide = periods((1.6, 2.8, 4.3))
    tight = periods((1.6, 1.605, 4.3))
    assert float(np.max(tight.B.imag)) > 2.0 * float(np.max(wide.B.imag))
