"""Matrix product form of the maximally entangled state and its sequential circuit.

Site 0 is the authority (physical dimension n+1), sites 1..n the participant
qubits.  Tensors are stored as ``A[j][i]`` with shape ``(phys, left, right)``.
The bond between sites j and j+1 carries the Hamming weight still to be
placed on the remaining participants.
"""

import json
from dataclasses import dataclass
from math import comb

import numpy as np

from .mes import JointState, build_phi
from .symspace import dicke_embedding


@dataclass
class MPSChain:
    n: int
    tensors: list

    def gauge_residuals(self):
        """``||sum_i A_i^dag A_i - 1||`` for every site."""
        out = []
        for a in self.tensors:
            s = np.einsum("iab,iac->bc", a.conj(), a)
            out.append(float(np.linalg.norm(s - np.eye(a.shape[2]))))
        return out

    def check_bonds(self):
        if self.tensors[0].shape[1] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bond dimensions must be 1")
        for j in range(len(self.tensors) - 1):
            if self.tensors[j].shape[2] != self.tensors[j + 1].shape[1]:
                raise ValueError(f"bond mismatch between sites {j} and {j + 1}")


def mps_tensors(n):
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    a0 = np.eye(n + 1)[:, None, :].astype(complex)  # A^[0]_alpha = e_alpha^T
    tensors = [a0]
    for j in range(1, n + 1):
        m = n - j
        a = np.zeros((2, m + 2, m + 1), dtype=complex)
        for alpha in range(m + 1):
            for i in (0, 1):
                a[i, alpha + i, alpha] = np.sqrt((m + 1) * comb(m, alpha)) / np.sqrt(
                    (m + 2) * comb(m + 1, alpha + i)
                )
        tensors.append(a)
    return MPSChain(n, tensors)


def mps_norm_sq(chain):
    """Squared norm from left transfer matrices, no dense expansion."""
    env = np.ones((1, 1), dtype=complex)
    for a in chain.tensors:
        env = np.einsum("iab,ac,icd->bd", a.conj(), env, a)
    return float(env[0, 0].real)


def mps_contract(chain, tol=1e-12):
    """Contract left to right into the symmetric-compressed form.

    The participant sites are summed against each Hamming weight, giving the
    Dicke coefficients directly.  If the amplitudes depended on more than the
    weight, that projection would lose norm; the squared norms are compared
    to ``tol`` to certify symmetric support.
    """
    chain.check_bonds()
    n = chain.n
    a0 = chain.tensors[0]
    # acc[w] has shape (n+1 authority labels, current bond)
    acc = {0: a0[:, 0, :]}
    for a in chain.tensors[1:]:
        nxt = {}
        for w, v in acc.items():
            for i in range(a.shape[0]):
                nxt[w + i] = nxt.get(w + i, 0) + v @ a[i]
        acc = nxt
    amps = np.zeros((a0.shape[0], n + 1), dtype=complex)
    for w, v in acc.items():
        amps[:, w] = v[:, 0] / np.sqrt(comb(n, w))
    total = mps_norm_sq(chain)
    if abs(np.linalg.norm(amps) ** 2 - total) > tol * max(1.0, total):
        raise ValueError("MPS amplitudes are not a function of Hamming weight alone")
    return JointState(n, amplitudes=amps)


def mps_full_amplitudes(chain):
    """Dense ``(n+1) x 2^n`` amplitude table (qubit 1 most significant)."""
    if chain.n > 12:
        raise ValueError("dense expansion limited to n <= 12")
    v = chain.tensors[0][:, 0, None, :]  # (alpha0, strings, bond)
    for a in chain.tensors[1:]:
        v = np.einsum("xsb,ibc->xsic", v, a)
        v = v.reshape(v.shape[0], -1, a.shape[2])
    return v[:, :, 0]


@dataclass
class SequentialCircuit:
    n: int
    ancilla_dim: int
    gates: list  # gates[j] acts on (site j) (x) ancilla, site index major

    def to_dict(self):
        return {
            "n": self.n,
            "ancilla_dim": self.ancilla_dim,
            "gates": [
                {"site": j, "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in g]}
                for j, g in enumerate(self.gates)
            ],
        }


def save_circuit(circuit, path):
    with open(path, "w") as fh:
        json.dump(circuit.to_dict(), fh)


def complete_isometry(cols, dim):
    """Extend orthonormal columns to a unitary using standard basis vectors.

    At each step the basis vector with the largest component outside the
    current span is added (lowest index on ties), so the result is
    deterministic.
    """
    q = np.array(cols, dtype=complex).reshape(dim, -1)
    basis = np.eye(dim, dtype=complex)
    while q.shape[1] < dim:
        resid = basis - q @ (q.conj().T @ basis)
        norms = np.linalg.norm(resid, axis=0)
        k = int(np.argmax(norms))
        v = resid[:, k] / norms[k]
        v = v - q @ (q.conj().T @ v)  # second pass for stability
        q = np.hstack([q, (v / np.linalg.norm(v))[:, None]])
    return q


def sequential_circuit(chain, tol=1e-10):
    """Unitaries ``V_j`` with ``V_j |0>_j |r>_a = sum_{i,s} A^[j]_i[s, r] |i>_j |s>_a``.

    Gate indices are ``i * ancilla_dim + s``.  Columns for inputs outside the
    ``|0>_j |r < right bond>`` slice come from :func:`complete_isometry`.
    """
    chain.check_bonds()
    D = chain.n + 1
    gates = []
    for j, a in enumerate(chain.tensors):
        phys, left, right = a.shape
        cols = np.zeros((phys * D, right), dtype=complex)
        for i in range(phys):
            cols[i * D : i * D + left, :] = a[i]
        if np.linalg.norm(cols.conj().T @ cols - np.eye(right)) > tol:
            raise ValueError(f"site {j} violates the gauge condition; cannot build an isometry")
        # defined columns sit on inputs |0>|r>, r < right, i.e. gate columns 0..right-1
        gates.append(complete_isometry(cols, phys * D))
    return SequentialCircuit(chain.n, D, gates)


@dataclass
class SequentialResult:
    fidelity: float
    ancilla_defect: float
    full_vector: np.ndarray
    state: JointState = None


def simulate_sequential(n, order="forward", circuit=None):
    """Apply the staircase ``V_0 ... V_n`` (``V_n`` first) to ``|0...0>|0>_a``.

    ``order="reversed"`` applies ``V_0`` first, which should fail.  The
    register is ``authority, qubits 1..n, ancilla``.
    """
    if not 1 <= n <= 10:
        raise ValueError(f"n={n} outside supported range 1..10")
    if circuit is None:
        circuit = sequential_circuit(mps_tensors(n))
    D = circuit.ancilla_dim
    shape = [n + 1] + [2] * n + [D]
    psi = np.zeros(shape, dtype=complex)
    psi[(0,) * (n + 2)] = 1.0
    sites = range(n, -1, -1) if order == "forward" else range(n + 1)
    for j in sites:
        phys = shape[j]
        g = circuit.gates[j].reshape(phys, D, phys, D)
        psi = np.tensordot(g, psi, axes=([2, 3], [j, n + 1]))  # new axes (j, a) in front
        psi = np.moveaxis(psi, [0, 1], [j, n + 1])
    ancilla_defect = float(np.linalg.norm(psi[..., 1:]))
    vec = psi[..., 0].reshape(-1)
    target = build_phi(n).full_vector()
    fid = float(abs(np.vdot(target, vec)) ** 2)
    try:
        state = JointState.from_full(vec, n)
    except ValueError:
        state = None
    return SequentialResult(fid, ancilla_defect, vec, state)


def dicke_weights_consistent(full, n, tol=1e-12):
    """True if the dense amplitude table depends on Hamming weight only."""
    E = dicke_embedding(n)
    amps = full @ E
    return bool(np.linalg.norm(full - amps @ E.T) <= tol)
