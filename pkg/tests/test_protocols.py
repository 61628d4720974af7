import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symmes import protocols as pr
from symmes.designs import DesignError, find_channel_design, find_state_design, pauli_design
from symmes.mes import JointState, build_phi
from symmes.symspace import haar_unitary2, random_density, random_pure_state


def random_target(n, rng):
    d = n + 1
    return JointState(n, amplitudes=rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))).normalized()


def state_design_for(target, seed=0):
    s = pr.conjugate_root(target)
    return find_state_design(s @ s, target.n, rng_seed=seed)


def test_conjugate_root_squares_to_conjugate_participant_marginal(rng):
    t = random_target(3, rng)
    s = pr.conjugate_root(t)
    c = t.amplitudes
    rho_p = c.T @ c.conj()  # participant marginal in the Dicke basis
    assert np.allclose(s @ s, rho_p.conj())
    assert np.allclose(s, s.conj().T)


def test_correction_rule_selected():
    assert pr.participant_correction_rule() == "Y U^dag Y"


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_transformation_all_branches(n, rng):
    for _ in range(5):
        t = random_target(n, rng)
        d = state_design_for(t, int(rng.integers(1000)))
        povm = pr.transform_povm(t, d)
        assert povm.completeness_residual < 1e-8
        recs = pr.run_transformation(t, d)
        assert min(r.fidelity for r in recs) >= 1 - 1e-9
        assert np.allclose([r.probability for r in recs], d.weights, atol=1e-12)
        for r in recs:
            # the output is the target up to a global phase
            assert abs(r.state.overlap(t) - 1) < 1e-9


def test_transformation_with_channel_design(rng):
    d = find_channel_design(2, rng_seed=3)
    t = random_target(2, rng)
    recs = pr.run_transformation(t, d)
    assert min(r.fidelity for r in recs) >= 1 - 1e-9


def test_transformation_to_phi_is_trivial():
    phi = build_phi(2)
    d = state_design_for(phi)
    recs = pr.run_transformation(phi, d)
    assert all(r.fidelity > 1 - 1e-12 for r in recs)


def test_transformation_forced_outcome(rng):
    t = random_target(2, rng)
    d = state_design_for(t)
    rec = pr.run_transformation(t, d, forced_outcome=1)
    assert len(rec) == 1 and rec[0].outcome == 1


def test_transform_rejects_wrong_design(rng):
    t = random_target(2, rng)
    other = state_design_for(random_target(2, rng))
    with pytest.raises((DesignError, pr.ProtocolError)):
        pr.run_transformation(t, other)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_teleportation_pure_and_mixed(n, rng):
    d = pauli_design() if n == 1 else find_channel_design(n, rng_seed=0)
    assert pr.teleport_povm(n, d).completeness_residual <= 1e-8
    inputs = [random_pure_state(n + 1, rng) for _ in range(3)] + [random_density(n + 1, 2, rng) for _ in range(3)]
    for rho in inputs:
        recs = pr.run_teleportation(rho, d, rng_seed=0)
        assert min(r.fidelity for r in recs) >= 1 - 1e-9
        # outcome statistics do not depend on the input
        assert np.allclose([r.probability for r in recs], d.weights, atol=1e-12)
        assert sum(r.sampled for r in recs) == 1


def test_teleport_povm_elements_resolve_identity():
    d = pauli_design()
    k = pr.teleport_povm(1, d)
    total = sum(op.conj().T @ op for op in k.operators)
    assert np.allclose(total, np.eye(4))


def test_teleport_needs_channel_design(rng):
    rho = random_density(3, 1, rng)
    sd = find_state_design(rho, 2, rng_seed=0)
    with pytest.raises(DesignError):
        pr.teleport_povm(2, sd)


def test_branch_record_dict(rng):
    recs = pr.run_teleportation(random_pure_state(2, rng), pauli_design(), rng_seed=1)
    row = recs[0].to_dict()
    assert set(row) == {"outcome", "probability", "fidelity", "correction_applied"}


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_projective_residual_lower_bound(n, seed):
    us = haar_unitary2(seed, size=n + 1)
    assert pr.projective_residual(us, n) >= np.sqrt(n + 1)


def test_projective_residual_values():
    # one unitary: |tr(U^dag U) - 1| = 1
    assert np.isclose(pr.projective_residual(np.eye(2)), 1.0)
    # the Paulis are trace-orthogonal: G = 2 * 1, residual sqrt(4)
    assert np.isclose(pr.projective_residual(np.array(pauli_design().unitaries), 3), 2.0)
    with pytest.raises(ValueError):
        pr.projective_residual(np.eye(2)[None], 3)
