from functools import reduce
from math import comb

import numpy as np
import pytest

from symmes import mes
from symmes.symspace import Y, dicke_embedding, haar_unitary2, irrep, sym_projector, to_su2


@pytest.mark.parametrize("n", [1, 3, 8, 20])
def test_phi_schmidt_uniform(n):
    s = mes.build_phi(n).schmidt_coefficients()
    assert np.allclose(s, 1 / np.sqrt(n + 1), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_phi_full_vector_coefficients(n):
    v = mes.build_phi(n).full_vector().reshape(n + 1, 2**n)
    weights = np.array([bin(i).count("1") for i in range(2**n)])
    for a in range(n + 1):
        expected = np.where(weights == a, mes.phi_coefficient(n, a), 0.0)
        assert np.allclose(v[a], expected)
    assert np.isclose(sum(comb(n, a) * mes.phi_coefficient(n, a) ** 2 for a in range(n + 1)), 1)


def dense_singlet_star(n):
    """Reference: sym-project the virtual qubits of n dense singlets, in full 2^(2n) space."""
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    t = reduce(np.kron, [singlet] * n).reshape([2] * (2 * n))
    t = t.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))).reshape(2**n, 2**n)
    return sym_projector(n) @ t


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
def test_singlet_star_matches_dense_construction(n):
    psi = mes.build_psi_singlet(n)
    dense = dense_singlet_star(n)
    # compare after mapping the virtual register to Dicke labels
    E = dicke_embedding(n)
    ref = (E.T @ dense).ravel()
    ref = ref / np.linalg.norm(ref)
    assert abs(abs(np.vdot(ref, (psi.amplitudes @ E.T).ravel())) - 1) < 1e-12


@pytest.mark.parametrize("n", range(1, 11))
def test_singlet_star_norm_and_link_to_phi(n):
    psi = mes.build_psi_singlet(n)
    # unnormalised singlets (|01> - |10>) give squared norm n + 1 after projection
    assert np.isclose(psi.meta["unnormalized_norm_sq"], n + 1)
    flipped = mes.apply_local(psi, participant=Y)
    assert abs(flipped.overlap(mes.build_phi(n)) - 1) < 1e-10


def test_from_full_round_trip_and_rejection(rng):
    phi = mes.build_phi(3)
    back = mes.JointState.from_full(phi.full_vector(), 3)
    assert np.allclose(back.amplitudes, phi.amplitudes)
    bad = rng.standard_normal(4 * 8)
    with pytest.raises(ValueError):
        mes.JointState.from_full(bad, 3)


def test_json_round_trip(tmp_path, rng):
    s = mes.JointState(2, amplitudes=rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))).normalized()
    mes.save_state(s, tmp_path / "s.json")
    t = mes.load_state(tmp_path / "s.json")
    assert np.array_equal(s.amplitudes, t.amplitudes)
    assert s.to_dict()["authority_dim"] == 3


def test_jointstate_validation():
    with pytest.raises(ValueError):
        mes.JointState(2, amplitudes=np.ones((2, 2)))
    with pytest.raises(ValueError):
        mes.JointState(2)


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_phi_is_invariant(n):
    us = haar_unitary2(n, size=25)
    assert mes.invariance_defect(mes.build_phi(n), us) < 1e-12


def test_phase_of_u2_would_spoil_invariance():
    # with a U(2) phase e^{it}, pi(YUY) (x) pi(U) picks up e^{2int}
    n, t = 3, 0.4
    u = np.exp(1j * t) * to_su2(haar_unitary2(0))
    c = mes.build_phi(n).amplitudes
    moved = irrep(Y @ u @ Y, n) @ c @ irrep(u, n).T
    assert np.allclose(moved, np.exp(2j * n * t) * c)


def test_random_state_is_not_invariant(rng):
    s = mes.JointState(2, amplitudes=rng.standard_normal((3, 3))).normalized()
    assert mes.invariance_defect(s, haar_unitary2(0, size=10)) > 1e-2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_invariant_subspace_is_one_dimensional(n):
    fs = mes.fixed_subspace_dimension(n, sample_count=1500)
    assert fs.dimension == 1 and fs.clear_gap
    v = fs.basis[0]
    assert abs(abs(np.vdot(v.ravel(), mes.build_phi(n).amplitudes.ravel())) - 1) < 1e-6


def test_apply_local_authority():
    s = mes.build_phi(2)
    a = np.diag([1, -1, 1j])
    assert np.allclose(mes.apply_local(s, authority=a).amplitudes, a @ s.amplitudes)
