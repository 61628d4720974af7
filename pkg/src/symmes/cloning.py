"""Sequential 1 -> N universal cloning: build the clone state, teleport it to the qubits.

The clone state for input ``psi`` is the symmetric projection of
``psi (x) 1^{(x)(N-1)}``.  :func:`optimal_cloner_fidelity` is an independent
check: it optimises the single-copy fidelity over all covariant channels from
a qubit into the symmetric subspace.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .designs import DesignError
from .protocols import ProtocolError, run_teleportation
from .symspace import dicke_embedding, fidelity

MAX_CLONE_N = 10


def spin_operators(n):
    """``(Jx, Jy, Jz)`` on the Dicke basis, ``|0>`` having ``sigma_z = +1``."""
    a = np.arange(n + 1)
    jz = np.diag(n / 2 - a).astype(complex)
    jp = np.zeros((n + 1, n + 1), dtype=complex)  # lowers alpha by one
    for k in range(1, n + 1):
        jp[k - 1, k] = np.sqrt(k * (n - k + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    return jx, jy, jz


def optimal_cloner_fidelity(n):
    """Best single-copy fidelity of a covariant qubit -> H_sym channel.

    The Choi operator of a covariant channel commutes with ``U* (x) pi(U)``,
    which splits into two spin sectors; it is therefore ``a P_hi + b P_lo``
    with ``a, b >= 0``.  Trace preservation is one linear equation, so the
    optimum is a two-variable LP.
    """
    sig = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    spins = spin_operators(n)
    d = n + 1
    tot = [np.kron(-s.conj() / 2, np.eye(d)) + np.kron(np.eye(2), j) for s, j in zip(sig, spins)]
    casimir = sum(t @ t for t in tot)
    w, v = np.linalg.eigh(casimir)
    j_hi = (n + 1) / 2
    hi = np.abs(w - j_hi * (j_hi + 1)) < 1e-8
    projs = [v[:, hi] @ v[:, hi].conj().T, v[:, ~hi] @ v[:, ~hi].conj().T]

    E = dicke_embedding(n)
    zero = np.diag([1.0, 0.0])
    marginal = E.T @ np.kron(zero, np.eye(1 << (n - 1))) @ E  # first qubit in |0>
    witness = np.kron(zero.T, marginal)
    gains = [float(np.trace(p @ witness).real) for p in projs]
    # tr_out P = (rank P / 2) 1_2 by covariance
    norms = [np.trace(p).real / 2 for p in projs]
    res = linprog(c=[-g for g in gains], A_eq=[norms], b_eq=[1.0], bounds=[(0, None)] * 2, method="highs")
    if not res.success:
        raise RuntimeError(f"cloner LP failed: {res.message}")
    return -float(res.fun)


def clone_state(psi, n):
    """Normalised ``P_sym (psi (x) 1) P_sym`` in the Dicke basis."""
    if not 1 <= n <= MAX_CLONE_N:
        raise ValueError(f"n={n} outside supported range 1..{MAX_CLONE_N}")
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    E = dicke_embedding(n)
    first = np.outer(psi, psi.conj())
    # only the first qubit is constrained; E^T (first (x) 1) E stays (n+1) x (n+1)
    e3 = E.reshape(2, 1 << (n - 1), n + 1)
    rho = np.einsum("xsa,xy,ysb->ab", e3, first, e3)
    return rho / np.trace(rho).real


def qubit_marginals(dm, n):
    """Single-qubit reduced states of every participant, via the full expansion."""
    E = dicke_embedding(n)
    full = (E @ dm @ E.T).reshape([2] * (2 * n))
    out = []
    for k in range(n):
        t = np.moveaxis(full, [k, n + k], [0, n])
        t = t.reshape(2, 1 << (n - 1), 2, 1 << (n - 1))
        out.append(np.einsum("asbs->ab", t))
    return out


@dataclass
class CloneReport:
    n: int
    ideal_fidelity: float
    per_qubit_fidelity: list
    worst_branch_deviation: float
    min_pairwise_branch_fidelity: float
    records: list = field(repr=False, default_factory=list)


def clone_demo(n, input_qubit, design, rng_seed=0, tol=1e-9):
    """Prepare the clone state at the authority and teleport it to the ``n`` qubits.

    Every branch must hand each qubit the ideal clone fidelity; the report
    carries the per-qubit values from the sampled branch.
    """
    if design.kind != "channel" or design.n != n:
        raise DesignError("clone_demo needs a channel design for the same n")
    psi = np.asarray(input_qubit, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    target = clone_state(psi, n)
    ideal = [fidelity(psi, m) for m in qubit_marginals(target, n)]
    records = run_teleportation(target, design, rng_seed=rng_seed)
    worst = 0.0
    sampled = None
    for r in records:
        got = [fidelity(psi, m) for m in qubit_marginals(r.state, n)]
        worst = max(worst, max(abs(g - i) for g, i in zip(got, ideal)))
        if r.sampled:
            sampled = got
    if worst > tol:
        raise ProtocolError(f"a branch deviates from the ideal clone fidelity by {worst:.3e}")
    ref = records[0].state
    pairwise = min(fidelity(ref, r.state) for r in records)
    return CloneReport(n, float(np.mean(ideal)), sampled, worst, pairwise, records)
