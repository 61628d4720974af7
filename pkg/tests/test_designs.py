import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symmes import designs as dz
from symmes.symspace import haar_unitary2, irrep_batch, random_density, twirl


def test_pauli_design_exact():
    d = dz.pauli_design()
    assert dz.verify_design(d) < 1e-15
    assert len(d) <= d.cardinality_bound


@pytest.mark.parametrize("n", range(1, 7))
def test_state_design_bounds(n, rng):
    rho = random_density(n + 1, 2, rng)
    d = dz.find_state_design(rho, n, rng_seed=n)
    assert len(d) <= (n + 1) ** 2 + 1
    assert dz.verify_design(d) <= 1e-8
    # independent check: weighted twirl through the public irrep
    assert np.allclose(twirl(rho, n, d.unitaries, d.weights), np.eye(n + 1) / (n + 1), atol=1e-9)


@pytest.mark.parametrize("n", [2, 3])
def test_channel_design_depolarises_everything(n, rng):
    d = dz.find_channel_design(n, rng_seed=0)
    assert len(d) <= 4 * (n + 1) ** 4 + 1
    assert dz.verify_design(d) <= 1e-8
    for _ in range(3):
        x = rng.standard_normal((n + 1, n + 1)) + 1j * rng.standard_normal((n + 1, n + 1))
        out = twirl(x, n, d.unitaries, d.weights)
        assert np.allclose(out, np.trace(x) * np.eye(n + 1) / (n + 1), atol=1e-9)


def test_channel_design_reproducible():
    a = dz.find_channel_design(2, rng_seed=7)
    b = dz.find_channel_design(2, rng_seed=7)
    assert np.array_equal(a.unitaries, b.unitaries) and np.array_equal(a.weights, b.weights)


def test_insufficient_pool_raises():
    rho = np.diag([1.0, 0, 0, 0]).astype(complex)
    with pytest.raises(dz.DesignError):
        dz.find_state_design(rho, 3, pool=3, max_pool=3, tol=1e-12)


def test_random_set_is_not_a_design(rng):
    us = haar_unitary2(rng, size=5)
    d = dz.WeightedUnitarySet(us, np.full(5, 0.2), 2, "channel")
    assert dz.verify_design(d) > 1e-3


def test_json_round_trip(tmp_path):
    d = dz.find_state_design(np.eye(3) / 3 * 0 + np.diag([0.5, 0.5, 0]), 2, rng_seed=1)
    dz.save_design(d, tmp_path / "d.json")
    e = dz.load_design(tmp_path / "d.json")
    assert e.kind == "state" and e.n == 2
    assert np.array_equal(d.unitaries, e.unitaries) and np.array_equal(d.weights, e.weights)
    assert np.allclose(d.rho, e.rho)


def test_weighted_set_validation():
    us = np.array([np.eye(2)] * 2)
    with pytest.raises(ValueError):
        dz.WeightedUnitarySet(us, [0.7, 0.7], 1, "state")
    with pytest.raises(ValueError):
        dz.WeightedUnitarySet(us, [0.5, 0.5], 1, "other")


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_caratheodory_preserves_barycenter(dim, seed):
    rng = np.random.default_rng(seed)
    k = 3 * dim + 4
    pts = rng.standard_normal((k, dim))
    w = rng.random(k)
    w /= w.sum()
    idx, w2 = dz.caratheodory_reduce(pts, w)
    assert len(idx) <= dim + 1
    assert np.all(w2 >= 0) and np.isclose(w2.sum(), 1)
    assert np.allclose(w2 @ pts[idx], w @ pts, atol=1e-9)


def test_caratheodory_low_rank_points():
    # points on a line in R^3 reduce to two
    t = np.linspace(0, 1, 7)[:, None]
    pts = t * np.array([1.0, 2.0, -1.0])
    w = np.full(7, 1 / 7)
    idx, w2 = dz.caratheodory_reduce(pts, w)
    assert len(idx) <= 2
    assert np.allclose(w2 @ pts[idx], w @ pts)


def test_orbit_atoms_are_traceless_shifts():
    pis = irrep_batch(haar_unitary2(0, size=3), 2)
    rho = np.diag([1.0, 0, 0]).astype(complex)
    atoms = dz._state_atoms(pis, rho)
    assert np.allclose(np.trace(atoms, axis1=1, axis2=2), 1)
