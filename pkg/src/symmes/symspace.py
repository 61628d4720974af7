"""Linear algebra on the symmetric subspace of N qubits.

Conventions used throughout the package:

* Dicke label ``alpha`` counts the ones in a bitstring; ``|alpha>`` is the
  normalised uniform superposition of weight-``alpha`` strings.
* Qubit 0 is the most significant bit of a computational index.
* ``irrep(u, n)`` is ``u^{(x)n}`` restricted to the symmetric subspace and
  written in the Dicke basis, an ``(n+1) x (n+1)`` unitary.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels

MAX_EMBED_N = 20
MAX_DENSE_N = 12
UNITARY_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)


@dataclass(frozen=True)
class SymSpace:
    """Symmetric subspace of ``n`` qubits."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")

    @property
    def dim(self):
        return self.n + 1

    def embedding(self):
        return dicke_embedding(self.n)

    def projector(self):
        return sym_projector(self.n)


def _check_n(n, limit):
    if not 1 <= n <= limit:
        raise ValueError(f"n={n} outside supported range 1..{limit}")


def popcounts(n):
    """Hamming weight of every n-bit index, in index order."""
    w = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        w += (np.arange(1 << n) >> k) & 1
    return w


def dicke_embedding(n):
    """Isometry ``E`` (``2^n x (n+1)``) whose columns are the Dicke states."""
    _check_n(n, MAX_EMBED_N)
    w = popcounts(n)
    E = np.zeros((1 << n, n + 1))
    norms = np.array([1.0 / np.sqrt(comb(n, a)) for a in range(n + 1)])
    E[np.arange(1 << n), w] = norms[w]
    return E


def sym_projector(n):
    """Projector onto the symmetric subspace in the full ``2^n`` space."""
    _check_n(n, MAX_DENSE_N)
    E = dicke_embedding(n)
    return E @ E.T


def check_unitary(u, tol=UNITARY_TOL):
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    if np.linalg.norm(u.conj().T @ u - I2) > tol:
        raise ValueError("matrix is not unitary")
    return u


def irrep(u, n):
    """Dicke-basis matrix of ``u^{(x)n}`` on the symmetric subspace."""
    u = check_unitary(u)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return kernels.irrep_kernel(u, n)


def irrep_batch(us, n, tol=1e-10):
    """``irrep`` over a stack of unitaries, shape ``(k, 2, 2) -> (k, n+1, n+1)``."""
    us = np.asarray(us, dtype=complex).reshape(-1, 2, 2)
    gram = np.einsum("kji,kjl->kil", us.conj(), us)
    if len(us) and np.max(np.abs(gram - I2)) > tol:
        raise ValueError("stack contains a non-unitary matrix")
    return kernels.irrep_batch_kernel(us, n)


def to_su2(u):
    """Remove the global phase so that ``det = 1``."""
    u = np.asarray(u, dtype=complex)
    return u / np.sqrt(np.linalg.det(u))


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def haar_unitary2(seed=None, size=None):
    """Haar-random element of U(2) (QR of a complex Ginibre matrix, phases fixed).

    ``seed`` may be an int or a ``numpy.random.Generator``.  With ``size`` a
    stack of shape ``(size, 2, 2)`` is returned.
    """
    rng = _rng(seed)
    k = 1 if size is None else int(size)
    g = (rng.standard_normal((k, 2, 2)) + 1j * rng.standard_normal((k, 2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=1, axis2=2)
    q = q * (diag / np.abs(diag))[:, None, :]
    return q[0] if size is None else q


def twirl(rho, n, unitaries, weights=None):
    """Weighted group average ``sum_i w_i pi(U_i) rho pi(U_i)^dag``."""
    pis = irrep_batch(unitaries, n)
    if weights is None:
        weights = np.full(len(pis), 1.0 / len(pis))
    rho = np.asarray(rho, dtype=complex)
    return np.einsum("k,kab,bc,kdc->ad", weights, pis, rho, pis.conj())


def check_density(rho, dim=None, tol=1e-10):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density operator must be a square matrix")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {rho.shape[0]}")
    if np.linalg.norm(rho - rho.conj().T) > tol:
        raise ValueError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"trace is {np.trace(rho).real:.3g}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density operator is not positive semidefinite")
    return rho


def twirl_mc(rho, n, samples, seed):
    """Monte-Carlo Haar twirl; returns ``(estimate, ||estimate - tr(rho) 1/(n+1)||_F)``."""
    rho = check_density(rho, n + 1)
    est = twirl(rho, n, haar_unitary2(seed, size=samples))
    err = np.linalg.norm(est - np.trace(rho) * np.eye(n + 1) / (n + 1))
    return est, float(err)


def reduced_single_qubit(dm, n):
    """One-qubit marginal of a symmetric-subspace density matrix (Dicke basis).

    Every qubit has the same marginal, so no site argument is needed.
    """
    dm = np.asarray(dm, dtype=complex)
    a = np.arange(n + 1)
    diag = np.diagonal(dm)
    off = np.sqrt((n - a[:-1]) * (a[:-1] + 1)) / n
    r = np.empty((2, 2), dtype=complex)
    r[0, 0] = np.sum(diag * (n - a)) / n
    r[1, 1] = np.sum(diag * a) / n
    r[0, 1] = np.sum(np.diagonal(dm, 1) * off)
    r[1, 0] = np.sum(np.diagonal(dm, -1) * off)
    return r


def random_pure_state(dim, seed=None):
    rng = _rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(dim, rank, seed=None):
    rng = _rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def fidelity(rho, sigma):
    """Uhlmann fidelity ``(tr|sqrt(rho) sqrt(sigma)|)^2``; vectors are treated as pure states."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.ndim == 1 and sigma.ndim == 1:
        return float(abs(np.vdot(rho, sigma)) ** 2)
    if rho.ndim == 1:
        return float(np.real(rho.conj() @ sigma @ rho))
    if sigma.ndim == 1:
        return float(np.real(sigma.conj() @ rho @ sigma))
    w, v = np.linalg.eigh(rho)
    keep = w > 1e-13 * max(w.max(), 1e-300)
    # restrict to supp(rho) so spurious near-zero modes add no sqrt(eps) noise
    s = v[:, keep] * np.sqrt(w[keep])
    ev = np.linalg.eigvalsh(s.conj().T @ sigma @ s)
    return float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2)
