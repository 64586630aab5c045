"""Closed-form classification of invariants and symmetry algebras."""

import json

import numpy as np
import pytest

from ousym import (ConstantForce, LinearForce, NotDiagonalizable,
                   UnclassifiableForce, build_ou_system, classify_invariants,
                   classify_symmetries, expdecay_residual_scan, lie_bracket,
                   max_residuals, mode_rates, parse_force_expression, point,
                   sample_probes, structure_constants)


def lin1d(alpha, beta=3.0, mu=1.0):
    return build_ou_system(1, [beta], [mu], LinearForce([[alpha]]))


def test_1d_linear_kappa_pair_matches_root_oracle():
    sys1 = lin1d(4.0)
    alg = classify_symmetries(sys1)
    assert alg.case_tag == "LinearPair1D"
    assert len(alg.generators) == 2
    kappas = sorted(g.family.kappa.real for g in alg.generators)
    roots = sorted(np.roots([1.0, -3.0, -4.0]))
    assert kappas == pytest.approx(list(roots), abs=1e-12)
    assert kappas == pytest.approx([-1.0, 4.0], abs=1e-12)


def test_kappa_identities():
    for alpha, beta in [(4.0, 3.0), (2.0, 1.0), (-0.2, 2.0)]:
        kp, km = mode_rates(beta, alpha)
        assert kp + km == pytest.approx(beta, rel=1e-13)
        assert kp * km == pytest.approx(-alpha, rel=1e-13)


def test_complex_rates_conjugate():
    kp, km = mode_rates(1.0, -5.0)
    assert kp.imag != 0.0
    assert kp == pytest.approx(np.conj(km))
    assert (kp + km).real == pytest.approx(1.0)


def test_1d_complex_pair_certified():
    sys1 = build_ou_system(1, [1.0], [1.0], LinearForce([[-5.0]]))
    alg = classify_symmetries(sys1)
    assert alg.case_tag == "LinearPair1D"
    assert len(alg.generators) == 2
    parts = sorted(g.family.part for g in alg.generators)
    assert parts == ["im", "re"]
    probes = sample_probes(sys1, count=60, seed=2)
    for g in alg.generators:
        mf, ms = max_residuals(g, sys1, probes)
        assert max(mf, ms) <= 1e-10


def test_nd_isotropic_linear_abelian():
    L = np.array([[0.0, 1.0], [1.0, 0.0]])  # eigenvalues +-1
    sys2 = build_ou_system(2, [3.0, 3.0], [1.0, 1.0], LinearForce(L))
    alg = classify_symmetries(sys2)
    assert alg.case_tag == "LinearAbelian2n"
    assert len(alg.generators) == 4
    # rates from the eigenvalue pair {1, -1} with beta = 3
    expect = set()
    for lam in (1.0, -1.0):
        kp, km = mode_rates(3.0, lam)
        expect |= {round(kp.real, 9), round(km.real, 9)}
    got = {round(g.family.kappa.real, 9) for g in alg.generators}
    assert got == expect
    probes = sample_probes(sys2, count=40, seed=3)
    for g in alg.generators:
        assert max(max_residuals(g, sys2, probes)) <= 1e-8


def test_nd_generators_independent():
    L = np.array([[1.0, 2.0], [-2.0, 1.0]])  # complex eigenvalues
    sys2 = build_ou_system(2, [1.0, 1.0], [1.0, 1.0], LinearForce(L))
    alg = classify_symmetries(sys2)
    assert len(alg.generators) == 4
    p = point(x=[0.0, 0.0], v=[0.0, 0.0], t=0.3, w=[0.0, 0.0])
    rows = []
    for g in alg.generators:
        rows.append([float(np.asarray(c)) for c in g.phi(p)])
    assert np.linalg.matrix_rank(np.array(rows), tol=1e-8) == 4


def test_pairwise_brackets_vanish():
    sys1 = lin1d(4.0)
    alg = classify_symmetries(sys1)
    fa = alg.generators[0].as_extended_field(sys1)
    fb = alg.generators[1].as_extended_field(sys1)
    for p in sample_probes(sys1, count=20, seed=4):
        br = lie_bracket(fa, fb, p)
        assert max(float(np.max(np.abs(np.asarray(e)))) for e in br) <= 1e-10


def test_critically_damped_raises():
    # beta^2 + 4 lambda = 0: 4 - 4 = 0 with lambda = -1, beta = 2
    sys1 = build_ou_system(1, [2.0], [1.0], LinearForce([[-1.0]]))
    with pytest.raises(NotDiagonalizable):
        classify_symmetries(sys1)


def test_defective_matrix_raises():
    L = np.array([[1.0, 1.0], [0.0, 1.0]])  # Jordan block
    sys2 = build_ou_system(2, [3.0, 3.0], [1.0, 1.0], LinearForce(L))
    with pytest.raises(NotDiagonalizable):
        classify_symmetries(sys2)


def test_anisotropic_linear_theory_incomplete():
    L = np.array([[0.0, 1.0], [1.0, 0.0]])
    sys2 = build_ou_system(2, [1.0, 2.0], [1.0, 1.0], LinearForce(L))
    alg = classify_symmetries(sys2)
    assert alg.case_tag == "TheoryIncomplete"
    assert alg.generators == ()
    # the attached W-constraint null space is empty for this pair
    assert alg.wsym_candidates == ()


def test_degenerate_linear_theory_incomplete():
    L = np.array([[1.0, 0.0], [0.0, 0.0]])
    sys2 = build_ou_system(2, [1.0, 1.0], [1.0, 1.0], LinearForce(L))
    alg = classify_symmetries(sys2)
    assert alg.case_tag == "TheoryIncomplete"


def test_constant_module():
    sys3 = build_ou_system(3, [1.0, 2.0, 0.5], [1.0, 3.0, 2.0],
                           ConstantForce([0.5, -1.0, 2.0]))
    alg = classify_symmetries(sys3)
    assert alg.case_tag == "ConstantModule"
    assert alg.module_rank == 6
    assert len(alg.generators) == 6
    kinds = [type(g.family).__name__ for g in alg.generators]
    assert kinds.count("ExpDecay") == 3
    assert kinds.count("Translation") == 3
    # X rates are the frictions
    rates = sorted(g.family.kappa for g in alg.generators
                   if type(g.family).__name__ == "ExpDecay")
    assert rates == [0.5, 1.0, 2.0]


def test_nonlinear_regular_no_real_simple():
    sys1 = build_ou_system(1, [1.0], [1.0],
                           parse_force_expression("x1^3", 1))
    alg = classify_symmetries(sys1)
    assert alg.case_tag == "NoRealSimple"
    assert alg.generators == ()

    f2 = parse_force_expression("(1 + norm(x)^2)*x1; (1 + norm(x)^2)*x2", 2)
    sys2 = build_ou_system(2, [1.0, 1.0], [1.0, 1.0], f2)
    alg2 = classify_symmetries(sys2)
    assert alg2.case_tag == "NoRealSimple"


def test_invariants_chi_basis():
    sys1 = build_ou_system(1, [1.0], [2.0], ConstantForce([0.5]))
    inv = classify_invariants(sys1)
    assert inv.basis_kind == "ChiBasis"
    assert len(inv.generators) == 1
    assert inv.affine_nullspace_dim == 1


def test_invariants_empty_for_linear_regular():
    inv = classify_invariants(lin1d(4.0))
    assert inv.basis_kind == "Empty"
    assert inv.generators == ()
    assert inv.affine_nullspace_dim == 0


def test_invariants_unclassified_annotated():
    sys1 = build_ou_system(1, [1.0], [1.0],
                           parse_force_expression("x1^3", 1))
    inv = classify_invariants(sys1)
    assert inv.basis_kind == "Empty"
    assert "not classified" in inv.annotation
    assert inv.affine_nullspace_dim == 0


def test_unclassifiable_force_propagates():
    f = parse_force_expression("x1^3", 1)
    sys1 = build_ou_system(1, [1.0], [1.0], f)
    bad_probes = [point(x=[0.0]), point(x=[1.0])]
    with pytest.raises(UnclassifiableForce):
        classify_symmetries(sys1, probes=bad_probes)


def test_structure_constants_constant_module():
    sys1 = build_ou_system(1, [1.0], [2.0], ConstantForce([0.5]))
    alg = classify_symmetries(sys1)
    rows = structure_constants(alg)
    assert len(rows) == 48  # 4 f's x 4 g's x 3 bracket kinds
    assert max(r["max_discrepancy"] for r in rows) <= 1e-8


def test_structure_constants_linear_case():
    alg = classify_symmetries(lin1d(4.0))
    rows = structure_constants(alg)
    assert len(rows) == 1
    assert rows[0]["predicted"] == "0"
    assert rows[0]["max_discrepancy"] <= 1e-10


def test_residual_scan_dips_at_true_rate():
    sys1 = lin1d(4.0)
    kappas = np.arange(3.5, 4.5, 0.001)
    vals = expdecay_residual_scan(sys1, kappas, i=1)
    k_best = kappas[int(np.argmin(vals))]
    assert k_best == pytest.approx(4.0, abs=2e-3)
    assert vals.min() <= 1e-8
    assert vals.max() >= 1e-2


def test_residual_scan_floor_for_cubic():
    sys1 = build_ou_system(1, [1.0], [1.0],
                           parse_force_expression("x1^3", 1))
    kappas = np.arange(-10.0, 10.0001, 0.01)  # coarse smoke version
    vals = expdecay_residual_scan(sys1, kappas, i=1)
    assert vals.min() >= 1e-2


def test_algebra_json_serializable():
    for sys_ in [lin1d(4.0),
                 build_ou_system(1, [1.0], [1.0], LinearForce([[-5.0]])),
                 build_ou_system(1, [1.0], [2.0], ConstantForce([0.5]))]:
        alg = classify_symmetries(sys_)
        payload = alg.to_json()
        text = json.dumps(payload, sort_keys=True)
        back = json.loads(text)
        assert back["case_tag"] == alg.case_tag
        assert len(back["generators"]) == len(alg.generators)
        inv = classify_invariants(sys_)
        json.dumps(inv.to_json(), sort_keys=True)
