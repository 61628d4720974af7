"""Concrete reference values and worked examples."""

import numpy as np
import pytest

from symmes import designs as dz
from symmes import mes, mps, protocols, symcheck
from symmes.symspace import dicke_embedding, haar_unitary2, random_density, twirl_mc

s2, s3, s6 = np.sqrt(2), np.sqrt(3), np.sqrt(6)


def test_dicke_columns_n2():
    E = dicke_embedding(2)
    assert np.allclose(E[:, 0], [1, 0, 0, 0])
    assert np.allclose(E[:, 1], [0, 1 / s2, 1 / s2, 0])
    assert np.allclose(E[:, 2], [0, 0, 0, 1])


def test_phi_n2_expansion():
    v = mes.build_phi(2).full_vector().reshape(3, 4)
    expected = np.array([[1 / s3, 0, 0, 0], [0, 1 / s6, 1 / s6, 0], [0, 0, 0, 1 / s3]])
    assert np.allclose(v, expected)


def test_haar_average_n3():
    rho = random_density(4, 2, 0)
    est, err = twirl_mc(rho, 3, 20000, 1)
    assert err < 0.02
    assert np.allclose(est, np.eye(4) / 4, atol=0.02)


def test_haar_average_ground_state_n2():
    rho = np.diag([1.0, 0, 0]).astype(complex)
    est, err = twirl_mc(rho, 2, 10_000, 0)
    assert err < 0.05


def test_invariant_state_n1_is_bell_like():
    fs = mes.fixed_subspace_dimension(1, sample_count=1500)
    assert fs.dimension == 1
    b = fs.basis[0]
    b = b / b[0, 0]
    assert np.allclose(b, np.eye(2), atol=1e-6)


def test_invariant_state_n3_is_phi():
    fs = mes.fixed_subspace_dimension(3, sample_count=2000)
    assert fs.dimension == 1
    assert abs(abs(np.vdot(fs.basis[0].ravel(), mes.build_phi(3).amplitudes.ravel())) - 1) < 1e-8


def test_symmetry_fixes_phi_for_100_unitaries():
    phi = mes.build_phi(4)
    for u in haar_unitary2(3, size=100):
        assert mes.invariance_defect(phi, [u]) < 1e-10


def test_gauge_closed_form_up_to_20():
    for n in range(1, 21):
        assert max(mps.mps_tensors(n).gauge_residuals()) < 1e-12


def test_isometry_columns_orthonormal_up_to_10():
    for n in range(1, 11):
        circ = mps.sequential_circuit(mps.mps_tensors(n))
        for a, g in zip(mps.mps_tensors(n).tensors, circ.gates):
            k = a.shape[2]
            assert np.linalg.norm(g[:, :k].conj().T @ g[:, :k] - np.eye(k)) < 1e-10


def test_contract_n2_matches_phi():
    assert np.allclose(mps.mps_contract(mps.mps_tensors(2)).amplitudes, mes.build_phi(2).amplitudes)


@pytest.mark.parametrize("n", range(1, 7))
def test_transformation_completeness(n, rng):
    d = n + 1
    t = mes.JointState(n, amplitudes=rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))).normalized()
    s = protocols.conjugate_root(t)
    design = dz.find_state_design(s @ s, n, rng_seed=0)
    assert protocols.transform_povm(t, design).completeness_residual <= 1e-10


def test_product_target_state_transfer_n2():
    amps = np.zeros((3, 3), dtype=complex)
    amps[0, 1] = 1  # |0>_A (x) Dicke |1>_P
    target = mes.JointState(2, amplitudes=amps)
    s = protocols.conjugate_root(target)
    design = dz.find_state_design(s @ s, 2, rng_seed=0)
    recs = protocols.run_transformation(target, design)
    assert all(abs(r.fidelity - 1) < 1e-9 for r in recs)


def test_outcome_probabilities_are_weights_for_50_targets(rng):
    worst = 0.0
    for _ in range(50):
        t = mes.JointState(2, amplitudes=rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))).normalized()
        s = protocols.conjugate_root(t)
        design = dz.find_state_design(s @ s, 2, rng_seed=int(rng.integers(1 << 30)))
        recs = protocols.run_transformation(t, design)
        worst = max(worst, 0.5 * sum(abs(r.probability - w) for r, w in zip(recs, design.weights)))
    assert worst <= 1e-10


def test_state_design_ground_state_n2():
    d = dz.find_state_design(np.diag([1.0, 0, 0]).astype(complex), 2, rng_seed=0)
    assert len(d) <= 10 and dz.verify_design(d) <= 1e-8


def test_reduction_of_40_atoms_n2():
    rho = np.diag([1.0, 0, 0]).astype(complex)
    from symmes.symspace import irrep_batch

    us = haar_unitary2(5, size=40)
    atoms = dz._state_atoms(irrep_batch(us, 2), rho)
    w = np.random.default_rng(0).random(40)
    w /= w.sum()
    real = dz._realify(atoms)
    idx, w2 = dz.caratheodory_reduce(real, w)
    assert len(idx) <= 10
    assert np.linalg.norm(w2 @ real[idx] - w @ real) <= 1e-8


def test_channel_design_n2_bound():
    d = dz.find_channel_design(2, rng_seed=0)
    assert len(d) <= 325 and dz.verify_design(d) <= 1e-8


def test_symmetric_input_untouched():
    spec = symcheck.PairMapSpec(5)
    E = dicke_embedding(5)
    rho = E @ random_density(6, 6, 2).real @ E.T
    assert np.max(np.abs(symcheck.channel_apply(rho, spec) - rho)) <= 1e-12


@pytest.mark.slow
def test_gap_exponent_n2_to_9():
    res = symcheck.gap_scan(range(2, 10), "ring")
    assert -3.3 <= res.exponent <= -2.3
    assert res.r2 >= 0.95
    assert abs(res.exponent - (-2.77)) < 0.05  # reference fit value
