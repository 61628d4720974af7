"""The authority/participants maximally entangled state and related constructions.

A :class:`JointState` keeps the participants symmetric-compressed: a pure
state is an ``(n+1) x (n+1)`` amplitude matrix ``C[alpha, beta]`` with the
authority label first and the participants' Dicke label second.
"""

import json
import warnings
from dataclasses import dataclass, field
from functools import reduce
from math import comb

import numpy as np

from .symspace import (
    MAX_DENSE_N,
    Y,
    dicke_embedding,
    haar_unitary2,
    irrep,
    irrep_batch,
    to_su2,
)


@dataclass
class JointState:
    """Pure or mixed state of authority (dim n+1) and n symmetric qubits."""

    n: int
    amplitudes: np.ndarray = None
    density: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.n + 1
        if (self.amplitudes is None) == (self.density is None):
            raise ValueError("give exactly one of amplitudes or density")
        if self.amplitudes is not None:
            self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
            if self.amplitudes.shape != (d, d):
                raise ValueError(f"amplitudes must be {d}x{d}")
        else:
            self.density = np.asarray(self.density, dtype=complex)
            if self.density.shape != (d * d, d * d):
                raise ValueError(f"density must be {d * d}x{d * d}")

    @property
    def authority_dim(self):
        return self.n + 1

    @property
    def is_pure(self):
        return self.amplitudes is not None

    def norm(self):
        if self.is_pure:
            return float(np.linalg.norm(self.amplitudes))
        return float(np.trace(self.density).real)

    def normalized(self):
        if self.is_pure:
            return JointState(self.n, amplitudes=self.amplitudes / self.norm(), meta=dict(self.meta))
        return JointState(self.n, density=self.density / self.norm(), meta=dict(self.meta))

    def to_density(self):
        if not self.is_pure:
            return self.density
        v = self.amplitudes.ravel()
        return np.outer(v, v.conj())

    def full_vector(self):
        """Expand to the authority (x) 2^n space; authority index is the slow one."""
        if not self.is_pure:
            raise ValueError("full_vector needs a pure state")
        if self.n > MAX_DENSE_N:
            raise ValueError(f"full expansion limited to n <= {MAX_DENSE_N}")
        return (self.amplitudes @ dicke_embedding(self.n).T).ravel()

    @classmethod
    def from_full(cls, vec, n, tol=1e-10):
        """Compress a full-space vector; raises if the participants leave H_sym."""
        E = dicke_embedding(n)
        m = np.asarray(vec, dtype=complex).reshape(n + 1, 1 << n)
        amps = m @ E
        if np.linalg.norm(m - amps @ E.T) > tol * max(1.0, np.linalg.norm(m)):
            raise ValueError("participant state is not supported on the symmetric subspace")
        return cls(n, amplitudes=amps)

    def schmidt_coefficients(self):
        if not self.is_pure:
            raise ValueError("Schmidt decomposition needs a pure state")
        return np.linalg.svd(self.amplitudes, compute_uv=False)

    def overlap(self, other):
        """``|<self|other>|`` for pure states."""
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)))

    def to_dict(self):
        if not self.is_pure:
            raise ValueError("JSON state format covers pure states only")
        amps = [[[float(z.real), float(z.imag)] for z in row] for row in self.amplitudes]
        return {"n": self.n, "authority_dim": self.authority_dim, "amplitudes": amps}

    @classmethod
    def from_dict(cls, data):
        a = np.array(data["amplitudes"], dtype=float)
        n = int(data["n"])
        if int(data.get("authority_dim", n + 1)) != n + 1:
            raise ValueError("authority_dim must equal n + 1")
        return cls(n, amplitudes=a[..., 0] + 1j * a[..., 1])


def save_state(state, path):
    with open(path, "w") as fh:
        json.dump(state.to_dict(), fh)


def load_state(path):
    with open(path) as fh:
        return JointState.from_dict(json.load(fh))


def build_phi(n):
    """The maximally entangled state: ``C = 1/sqrt(n+1)`` in the Dicke pairing."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return JointState(n, amplitudes=np.eye(n + 1, dtype=complex) / np.sqrt(n + 1))


def phi_coefficient(n, alpha):
    """Amplitude of each bitstring of weight ``alpha`` paired with ``|alpha>_A``."""
    return 1.0 / np.sqrt((n + 1) * comb(n, alpha))


def build_psi_singlet(n):
    """Symmetrised star of singlets.

    Each participant shares ``|01> - |10>`` with one virtual qubit of the
    authority; the virtual register is then projected on its symmetric
    subspace.  The state is returned normalised, with the squared norm of the
    unnormalised projection stored in ``meta["unnormalized_norm_sq"]``.
    """
    if not 1 <= n <= 10:
        raise ValueError(f"n={n} outside supported range 1..10")
    singlet = np.array([0.0, 1.0, -1.0, 0.0])
    # qubit order v1 p1 v2 p2 ... -> v1..vn p1..pn
    vec = reduce(np.kron, [singlet] * n)
    t = vec.reshape([2] * (2 * n))
    t = t.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))
    m = t.reshape(1 << n, 1 << n)
    E = dicke_embedding(n)
    projected = E.T @ m  # virtual register now in Dicke labels
    norm_sq = float(np.sum(projected**2))
    amps = projected @ E
    if np.linalg.norm(projected - amps @ E.T) > 1e-10 * np.sqrt(norm_sq):
        raise RuntimeError("participant register left the symmetric subspace")
    state = JointState(n, amplitudes=amps / np.sqrt(norm_sq))
    state.meta["unnormalized_norm_sq"] = norm_sq
    return state


def apply_local(state, authority=None, participant=None):
    """Apply ``authority (x) participant^{(x)n}``; participant gate is a 2x2 unitary."""
    c = state.amplitudes
    if authority is not None:
        c = authority @ c
    if participant is not None:
        c = c @ irrep(participant, state.n).T
    return JointState(state.n, amplitudes=c, meta=dict(state.meta))


def symmetry_action(u, n):
    """``pi(Y U Y) (x) pi(U)`` on authority (x) participants, with ``U`` moved into SU(2).

    The determinant is removed because a U(2) phase would rotate the
    invariant state by ``det(U)^n`` and wash it out of any Haar average.
    """
    v = to_su2(u)
    return np.kron(irrep(Y @ v @ Y, n), irrep(v, n))


def invariance_defect(state, unitaries):
    """Largest ``|| G(U) C - C ||`` over the given unitaries (SU(2)-normalised)."""
    n = state.n
    vs = np.array([to_su2(u) for u in unitaries])
    pa = irrep_batch(np.einsum("ij,kjl,lm->kim", Y, vs, Y), n)
    pp = irrep_batch(vs, n)
    c = state.amplitudes
    moved = np.einsum("kab,bc,kdc->kad", pa, c, pp)
    return float(np.max(np.linalg.norm(moved - c[None], axis=(1, 2))))


@dataclass
class FixedSubspace:
    dimension: int
    basis: list
    eigenvalues: np.ndarray
    second_modulus: float
    clear_gap: bool


def fixed_subspace_dimension(n, sample_count=2000, rng_seed=0, threshold=1e-6, gap_floor=0.5):
    """Dimension and basis of the states invariant under ``pi(YUY) (x) pi(U)``.

    The group average is estimated from ``sample_count`` Haar samples; an
    eigenvalue counts as 1 when it exceeds ``1 - threshold``.  ``clear_gap``
    is False (and a warning raised) when the next eigenvalue modulus is above
    ``gap_floor``, meaning the sample is too small to separate the spectrum.
    """
    if not 1 <= n <= 8:
        raise ValueError(f"n={n} outside supported range 1..8")
    vs = np.array([to_su2(u) for u in haar_unitary2(rng_seed, size=sample_count)])
    pa = irrep_batch(np.einsum("ij,kjl,lm->kim", Y, vs, Y), n)
    pp = irrep_batch(vs, n)
    d = n + 1
    avg = np.einsum("kab,kcd->acbd", pa, pp).reshape(d * d, d * d) / sample_count
    w, v = np.linalg.eig(avg)
    order = np.argsort(-np.abs(w))
    w, v = w[order], v[:, order]
    keep = w.real > 1 - threshold
    dim = int(np.count_nonzero(keep))
    basis_mat = np.linalg.qr(v[:, keep])[0] if dim else np.zeros((d * d, 0))
    rest = np.abs(w[~keep])
    second = float(rest.max()) if rest.size else 0.0
    clear = second < gap_floor
    if not clear:
        warnings.warn(f"no clear spectral gap (next modulus {second:.3f}); increase sample_count")
    basis = [basis_mat[:, k].reshape(d, d) for k in range(dim)]
    return FixedSubspace(dim, basis, w, second, clear)
