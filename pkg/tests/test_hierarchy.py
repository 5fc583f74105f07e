"""Hydrodynamic analysis of a potential family and reconstruction."""

from __future__ import annotations

import cmath

import numpy as np
import pytest

from gtlab import catalog
from gtlab.core import Potential
from gtlab.errors import ConfigError
from gtlab.gtsys import build_system
from gtlab.hierarchy import (
    PotentialFamily,
    compatibility_tensor,
    criterion_integrable,
    dimension_D,
    hydro_coefficients,
    reconstruct_f,
    reconstruct_lambda,
)
from gtlab.kernel import Domain, JetEvaluator


def _family(name="genus0", n=2):
    ent = catalog.CATALOG[name]
    enh = ent.build_enhanced(n)
    return PotentialFamily(enh.base, ent.potentials(n), enhanced=enh,
                           label=name)


def _fiber(fam, seed=1):
    _, v = fam.structure.sample(1, seed, 1)[0]
    return v


def test_family_needs_three_potentials():
    enh = catalog.build_enhanced("benney", 2)
    with pytest.raises(ConfigError):
        PotentialFamily(enh.base, catalog.build_potentials("benney", 2)[:2])


def test_family_is_functionally_independent():
    fam = _family()
    v = _fiber(fam)
    zs = fam.sample_z(10, seed=3, v=v)
    assert fam.independence_rank(v, zs) == fam.N


def test_compatibility_tensor_is_antisymmetric():
    fam = _family()
    v = _fiber(fam)
    zs = fam.sample_z(6, seed=5, v=v)
    t_ijk = compatibility_tensor(fam, 0, 1, 2, v, zs)
    t_jik = compatibility_tensor(fam, 1, 0, 2, v, zs)
    m = fam.m
    # swapping i and j negates the (i, j) block
    assert np.allclose(t_ijk[:m], -t_jik[:m], atol=1e-12)


def test_compatibility_tensor_rejects_repeated_indices():
    fam = _family()
    v = _fiber(fam)
    zs = fam.sample_z(4, seed=5, v=v)
    with pytest.raises(ConfigError):
        compatibility_tensor(fam, 0, 0, 1, v, zs)


def test_dimension_is_stable_and_in_range():
    fam = _family()
    v = _fiber(fam)
    D = dimension_D(fam, 0, 1, 2, v, z_count=30, seed=7)
    assert fam.m <= D <= 2 * fam.m - 1
    # permuting the triple cannot change the span
    assert dimension_D(fam, 2, 0, 1, v, z_count=30, seed=11) == D


def test_hydro_expansion_validates_on_held_out_points():
    fam = _family()
    v = _fiber(fam)
    hs = hydro_coefficients(fam, 0, 1, 2, v, z_count=30, seed=7)
    assert hs.expansion_residual < 1e-8
    assert hs.a.shape == hs.b.shape == hs.c.shape == (hs.D, fam.m)
    assert hs.rank_abc == hs.D  # the extracted system is not degenerate
    assert len(hs.basis_rows) == hs.D


def test_reconstruct_f_matches_structure():
    fam = _family()
    rec, rep = reconstruct_f(fam, 0, 1, samples=20, seed=11, tol=1e-8)
    assert rep.passed, rep.max_residual
    s = fam.structure
    for ps, v in s.sample(5, seed=21, n_p=2):
        assert rec(ps[0], ps[1], v) == pytest.approx(
            s.f.value((*ps, *v)), rel=1e-7)


def test_reconstruct_f_is_pair_independent():
    fam = _family()
    _, rep01 = reconstruct_f(fam, 0, 1, samples=20, seed=11)
    _, rep12 = reconstruct_f(fam, 1, 2, samples=20, seed=11)
    assert rep01.passed and rep12.passed


def test_reconstruct_lambda_matches_enhancement():
    fam = _family()
    _, rep = reconstruct_lambda(fam, 0, samples=20, seed=13, tol=1e-8)
    assert rep.passed, rep.max_residual


def test_integrability_criterion_holds_for_catalog_family():
    fam = _family()
    sys_ = build_system(fam.structure,
                        extra_exclusions=catalog.CATALOG["genus0"].gt_exclusions)
    rep = criterion_integrable(fam, sys_, samples=20, seed=19, tol=1e-8)
    assert rep.passed, rep.max_residual


def test_integrability_criterion_rejects_foreign_potential():
    # replace one member by p^2, which is not a potential of this structure
    fam = _family()
    m = fam.m
    fake = Potential(
        JetEvaluator(1 + m, lambda *a: a[0] ** 2, domain=Domain(),
                     label="fake"),
        label="p^2",
    )
    broken = PotentialFamily(fam.structure,
                             [fam.potentials[0], fam.potentials[1], fake],
                             enhanced=fam.enhanced)
    sys_ = build_system(fam.structure,
                        extra_exclusions=catalog.CATALOG["genus0"].gt_exclusions)
    rep = criterion_integrable(broken, sys_, samples=20, seed=19, tol=1e-8)
    assert not rep.passed


def test_criterion_requires_shared_structure():
    fam = _family()
    other = build_system(catalog.build_structure("benney", 2))
    with pytest.raises(ConfigError):
        criterion_integrable(fam, other)
