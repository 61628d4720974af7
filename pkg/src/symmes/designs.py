"""Finite weighted unitary sets that reproduce the Haar twirl on the symmetric irrep.

Two flavours:

* ``state`` -- ``sum_i w_i pi(U_i) rho pi(U_i)^dag = 1/(n+1)`` for one fixed
  density matrix ``rho``;
* ``channel`` -- the same identity for every input, i.e. the weighted set
  reproduces the completely depolarising channel on the ``(n+1)``-dim space.

Construction: sample a pool of Haar unitaries, solve the nonnegative least
squares problem for the weights (the target sits in the relative interior of
the convex hull of the orbit, so a large enough pool makes it exactly
feasible), then strip the support down with :func:`caratheodory_reduce`.
"""

import json
import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .symspace import PAULIS, check_density, haar_unitary2, irrep_batch

log = logging.getLogger(__name__)

KINDS = ("state", "channel")


class DesignError(RuntimeError):
    """Raised when a weighted set cannot be constructed or fails verification."""


@dataclass
class WeightedUnitarySet:
    unitaries: np.ndarray
    weights: np.ndarray
    n: int
    kind: str
    rho: np.ndarray = None

    def __post_init__(self):
        self.unitaries = np.asarray(self.unitaries, dtype=complex).reshape(-1, 2, 2)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if len(self.weights) != len(self.unitaries):
            raise ValueError("one weight per unitary required")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if self.rho is not None:
            self.rho = np.asarray(self.rho, dtype=complex)

    def __len__(self):
        return len(self.weights)

    @property
    def cardinality_bound(self):
        d = self.n + 1
        return d**2 + 1 if self.kind == "state" else 4 * d**4 + 1

    def to_dict(self):
        entries = [
            {"weight": float(w), "unitary": [[[float(z.real), float(z.imag)] for z in row] for row in u]}
            for w, u in zip(self.weights, self.unitaries)
        ]
        out = {"kind": self.kind, "n": self.n, "entries": entries}
        if self.rho is not None:
            out["rho"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.rho]
        return out

    @classmethod
    def from_dict(cls, data):
        ws = np.array([e["weight"] for e in data["entries"]], dtype=float)
        us = np.array([e["unitary"] for e in data["entries"]], dtype=float)
        rho = None
        if data.get("rho") is not None:
            r = np.array(data["rho"], dtype=float)
            rho = r[..., 0] + 1j * r[..., 1]
        return cls(us[..., 0] + 1j * us[..., 1], ws, int(data["n"]), data["kind"], rho)


def save_design(design, path):
    with open(path, "w") as fh:
        json.dump(design.to_dict(), fh)


def load_design(path):
    with open(path) as fh:
        return WeightedUnitarySet.from_dict(json.load(fh))


def pauli_design(kind="channel", rho=None):
    """The four Paulis with weight 1/4: an exact qubit (n=1) depolariser."""
    return WeightedUnitarySet(np.array(PAULIS), np.full(4, 0.25), 1, kind, rho)


def _state_atoms(pis, rho):
    return np.einsum("kab,bc,kdc->kad", pis, rho, pis.conj())


def _channel_atoms(pis):
    k, d, _ = pis.shape
    return np.einsum("kac,kbd->kabcd", pis, pis.conj()).reshape(k, d * d, d * d)


def _channel_target(d):
    e = np.eye(d).ravel()
    return np.outer(e, e) / d


def verify_design(design, rho=None):
    """Frobenius residual of the twirl identity.

    State kind: ``||sum w pi rho pi^dag - tr(rho) 1/(n+1)||`` (``rho`` defaults
    to the one stored on the design).  Channel kind: the largest residual over
    the matrix units ``E_jk`` of ``||sum w pi E_jk pi^dag - delta_jk 1/(n+1)||``.
    """
    d = design.n + 1
    pis = irrep_batch(design.unitaries, design.n)
    if design.kind == "state":
        rho = design.rho if rho is None else np.asarray(rho, dtype=complex)
        if rho is None:
            raise ValueError("state-kind verification needs rho")
        got = np.einsum("k,kad->ad", design.weights, _state_atoms(pis, rho))
        return float(np.linalg.norm(got - np.trace(rho) * np.eye(d) / d))
    if rho is not None:
        raise ValueError("channel-kind verification takes no rho")
    sup = np.einsum("k,kij->ij", design.weights, _channel_atoms(pis)).reshape(d, d, d, d)
    target = _channel_target(d).reshape(d, d, d, d)
    # sup[a, b, c, e] is the (a, b) entry of the image of E_ce
    diff = (sup - target).transpose(2, 3, 0, 1).reshape(d * d, d * d)
    return float(np.max(np.linalg.norm(diff, axis=1)))


def _realify(a):
    """Flatten a stack of (complex) arrays into real vectors ``[re, im]``."""
    a = np.asarray(a, dtype=complex)
    flat = a.reshape(a.shape[0], -1)
    return np.concatenate([flat.real, flat.imag], axis=-1)


def caratheodory_reduce(atoms, weights, target=None, tol=1e-9, rank_tol=1e-10):
    """Shrink a convex combination to at most (affine dimension + 1) atoms.

    ``atoms`` is a sequence of equally shaped arrays (complex allowed).  Each
    step moves the weights along a null direction of the affine system
    ``[atoms; 1]`` until one weight reaches zero; ties go to the lowest index.
    Returns ``(indices, weights)`` into the original atom list.
    """
    vecs = _realify(np.stack([np.asarray(a) for a in atoms]))  # (k, D)
    w = np.asarray(weights, dtype=float).copy()
    if np.any(w < -1e-14) or abs(w.sum() - 1) > 1e-9:
        raise ValueError("weights must be a probability vector")
    w = np.clip(w, 0, None)
    barycenter = w @ vecs
    if target is not None:
        miss = np.linalg.norm(barycenter - _realify(np.asarray(target)[None])[0])
        if miss > tol:
            raise ValueError(f"weighted atoms miss the target by {miss:.2e}")
    aff = np.vstack([vecs.T, np.ones(len(w))])
    scale = max(1.0, np.abs(aff).max())
    full_rank = np.linalg.matrix_rank(aff, tol=rank_tol * scale * max(aff.shape))
    log.debug("caratheodory: %d atoms, affine dimension %d", len(w), full_rank - 1)

    support = np.flatnonzero(w > 0)
    while len(support) > full_rank:
        _, s, vt = np.linalg.svd(aff[:, support])
        z = vt[-1]
        if len(s) == len(support) and s[-1] > rank_tol * scale * max(aff.shape):
            warnings.warn("caratheodory_reduce: no null direction found, stopping early")
            break
        if np.linalg.norm(z) < 1e-12:
            warnings.warn("caratheodory_reduce: degenerate null direction, stopping early")
            break
        if not np.any(z > 1e-14):
            z = -z
        pos = z > 1e-14
        ratios = np.full(len(z), np.inf)
        ratios[pos] = w[support][pos] / z[pos]
        hit = int(np.argmin(ratios))  # argmin picks the lowest index on ties
        step = ratios[hit]
        w_new = w[support] - step * z
        w_new[hit] = 0.0
        if w_new.min() < -1e-10:
            raise DesignError("caratheodory step produced a negative weight")
        w[support] = np.clip(w_new, 0, None)
        w /= w.sum()
        support = np.flatnonzero(w > 0)

    drift = np.linalg.norm(w @ vecs - barycenter)
    if drift > tol:
        warnings.warn(f"caratheodory_reduce drifted by {drift:.2e}")
    return support, w[support]


def _polish(vecs, target, support, w):
    """Exact least squares on a fixed support; kept only if it stays feasible."""
    a = vecs[support].T
    sol, *_ = np.linalg.lstsq(a, target, rcond=None)
    if sol.min() >= 0:
        return sol
    return w


def _solve(atom_fn, target, n, seed, tol, pool, max_pool):
    """Sample, NNLS, reduce, polish.  Returns ``(unitaries, weights, residual)``."""
    rng = np.random.default_rng(seed)
    t_vec = np.concatenate([_realify(target[None])[0], [1.0]])
    us = np.empty((0, 2, 2), dtype=complex)
    vecs = np.empty((0, len(t_vec)))
    best = np.inf
    while True:
        new = haar_unitary2(rng, size=pool - len(us))
        us = np.concatenate([us, new])
        atoms = atom_fn(irrep_batch(new, n))
        vecs = np.vstack([vecs, np.hstack([_realify(atoms), np.ones((len(new), 1))])])
        w, _ = nnls(vecs.T, t_vec, maxiter=50 * vecs.shape[0])
        support = np.flatnonzero(w > 0)
        w_s = _polish(vecs, t_vec, support, w[support])
        best = min(best, np.linalg.norm(w_s @ vecs[support] - t_vec))
        log.debug("pool %d: support %d, residual %.3e", len(us), len(support), best)
        if best <= tol:
            break
        if pool >= max_pool:
            raise DesignError(f"pool of {len(us)} unitaries reached residual {best:.3e} > {tol:.1e}")
        pool = min(2 * pool, max_pool)

    w_s = w_s / w_s.sum()
    idx, w_r = caratheodory_reduce(vecs[support, :-1], w_s)
    support = support[idx]
    w_r = _polish(vecs, t_vec, support, w_r)
    w_r = w_r / w_r.sum()
    keep = w_r > 0
    return us[support[keep]], w_r[keep]


def find_state_design(rho, n, rng_seed=0, tol=1e-8, pool=None, max_pool=None):
    """Weighted unitaries twirling one density matrix ``rho`` to ``1/(n+1)``."""
    if not 1 <= n <= 10:
        raise ValueError(f"n={n} outside supported range 1..10")
    d = n + 1
    rho = check_density(rho, d)
    pool = pool or 2 * d * d + 8
    max_pool = max_pool or 64 * d * d
    us, ws = _solve(lambda pis: _state_atoms(pis, rho), np.eye(d) / d, n, rng_seed, tol, pool, max_pool)
    design = WeightedUnitarySet(us, ws, n, "state", rho)
    _certify(design, tol)
    return design


def find_channel_design(n, rng_seed=0, tol=1e-8, pool=None, max_pool=None):
    """Weighted unitaries reproducing the depolarising channel on ``n+1`` dims."""
    if not 1 <= n <= 6:
        raise ValueError(f"n={n} outside supported range 1..6")
    d = n + 1
    span = sum((2 * L + 1) ** 2 for L in range(n + 1))
    pool = pool or 2 * span + 8
    max_pool = max_pool or 32 * span
    us, ws = _solve(_channel_atoms, _channel_target(d), n, rng_seed, tol, pool, max_pool)
    design = WeightedUnitarySet(us, ws, n, "channel")
    _certify(design, tol)
    return design


def _certify(design, tol):
    res = verify_design(design)
    if res > tol:
        raise DesignError(f"design residual {res:.3e} exceeds {tol:.1e}")
    if len(design) > design.cardinality_bound:
        raise DesignError(f"{len(design)} unitaries exceed the bound {design.cardinality_bound}")
