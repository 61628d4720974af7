"""The participants' symmetry-checking channel and its spectral gap.

One round picks a neighbouring pair of qubits and applies

    T(rho) = P rho P + <psi-|rho|psi-> M

with ``P`` the two-qubit symmetric projector, ``psi-`` the singlet and
``M = 1/4`` (``variant="formula"``) or ``M = P/3`` (``variant="prose"``).
Averaging over the pairs gives the channel whose second eigenvalue sets the
convergence rate.  Everything here is matrix free: the channel acts on
``2^n x 2^n`` arrays through :func:`symmes.kernels.pair_map_accumulate`.
"""

import csv
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigs
from scipy.stats import linregress

from . import kernels
from .symspace import dicke_embedding

log = logging.getLogger(__name__)

MAX_N = 12
SINGLET = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2)
P_SYM2 = np.eye(4) - np.outer(SINGLET, SINGLET)


@dataclass(frozen=True)
class PairMapSpec:
    n: int
    topology: str = "ring"
    variant: str = "formula"

    def __post_init__(self):
        if not 2 <= self.n <= MAX_N:
            raise ValueError(f"n={self.n} outside supported range 2..{MAX_N}")
        if self.topology not in ("ring", "line"):
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.variant not in ("formula", "prose"):
            raise ValueError(f"unknown variant {self.variant!r}")
        check_pair_map(self.tail)

    @property
    def pairs(self):
        if self.topology == "ring":
            return [(i, (i + 1) % self.n) for i in range(self.n)]
        return [(i, i + 1) for i in range(self.n - 1)]

    @property
    def tail(self):
        return np.eye(4) / 4 if self.variant == "formula" else P_SYM2 / 3

    @property
    def dim(self):
        return 1 << self.n


def pair_map(rho4, tail):
    """The two-qubit map on a 4x4 matrix (reference form)."""
    return P_SYM2 @ rho4 @ P_SYM2 + (SINGLET @ rho4 @ SINGLET) * tail


def check_pair_map(tail, tol=1e-10):
    """Raise unless the pair map is completely positive and trace preserving."""
    choi = np.zeros((16, 16))
    for a in range(4):
        for b in range(4):
            e = np.zeros((4, 4))
            e[a, b] = 1
            choi += np.kron(e, pair_map(e, tail))
    if np.linalg.eigvalsh(choi).min() < -tol:
        raise ValueError("pair map is not completely positive")
    partial = np.einsum("aibi->ab", choi.reshape(4, 4, 4, 4))
    if np.linalg.norm(partial - np.eye(4)) > tol:
        raise ValueError("pair map is not trace preserving")


def channel_apply(rho, spec):
    """Average of the pair map over the spec's neighbouring pairs."""
    rho = np.asarray(rho)
    if rho.shape != (spec.dim, spec.dim):
        raise ValueError(f"expected a {spec.dim}x{spec.dim} operator, got {rho.shape}")
    out = np.zeros_like(rho)
    pairs = spec.pairs
    tail = spec.tail
    for i, j in pairs:
        kernels.pair_map_accumulate(rho, out, spec.n, i, j, P_SYM2, SINGLET, tail, 1.0 / len(pairs))
    return out


def apply_pair(rho, spec, pair):
    out = np.zeros_like(rho)
    kernels.pair_map_accumulate(rho, out, spec.n, pair[0], pair[1], P_SYM2, SINGLET, spec.tail, 1.0)
    return out


def sym_defect(rho, n):
    """``1 - tr(P_sym rho)``: weight outside the symmetric subspace."""
    E = dicke_embedding(n)
    return float(1.0 - np.trace(E.T @ rho @ E).real)


def support_defect(x, n):
    """Norm of the parts of ``x`` outside the symmetric-symmetric block."""
    E = dicke_embedding(n)
    inner = E @ (E.T @ x @ E) @ E.T
    return float(np.linalg.norm(x - inner))


# -- fixed points -------------------------------------------------------------


@dataclass
class FixedPointReport:
    multiplicity: int
    defect: float
    residual: float
    iterations: int


def fixed_point_support(spec, extra=4, tol=1e-10, maxiter=20000, seed=0):
    """Eigenvalue-1 eigenspace by subspace (block power) iteration.

    Returns the multiplicity, the largest support defect over an orthonormal
    basis of the eigenspace, and the eigen-residual ``||Phi(B) - B||``.
    """
    n, d = spec.n, spec.dim
    if n > 10:
        raise ValueError("fixed_point_support limited to n <= 10")
    m = (n + 1) ** 2 + extra
    rng = np.random.default_rng(seed)
    v = np.linalg.qr(rng.standard_normal((d * d, m)))[0]
    stable, last_count = 0, -1
    for it in range(1, maxiter + 1):
        w = np.stack([channel_apply(v[:, k].reshape(d, d), spec).ravel() for k in range(m)], axis=1)
        theta, s = np.linalg.eig(v.T @ w)
        ritz = v @ s.real if np.allclose(s.imag, 0) else v @ s
        one = np.abs(theta - 1) < 1e-9
        count = int(one.sum())
        basis = np.linalg.qr(np.real(ritz[:, one]))[0] if count else np.zeros((d * d, 0))
        resid = 0.0
        if count:
            img = np.stack([channel_apply(basis[:, k].reshape(d, d), spec).ravel() for k in range(count)], axis=1)
            resid = float(np.linalg.norm(img - basis))
        stable = stable + 1 if count == last_count else 0
        last_count = count
        if count and resid <= tol and stable >= 10:
            break
        v = np.linalg.qr(w)[0]
    else:
        raise RuntimeError(f"fixed-point iteration did not converge in {maxiter} steps")
    defect = max(support_defect(basis[:, k].reshape(d, d), n) for k in range(count))
    return FixedPointReport(count, defect, resid, it)


# -- spectral gap -------------------------------------------------------------


@dataclass
class GapResult:
    n: int
    lambda2_modulus: float
    gap: float
    iterations: int
    eigenvalues: np.ndarray = field(repr=False, default=None)


def deflated_operator(spec):
    """Channel restricted to the complement of the symmetric block.

    The symmetric block ``{E Y E^T}`` is invariant and pointwise fixed, so the
    channel is block upper-triangular against it; projecting it out leaves
    exactly the rest of the spectrum.  Returns ``(LinearOperator, counter)``.
    """
    n, d = spec.n, spec.dim
    E = dicke_embedding(n)
    counter = {"matvec": 0}

    def deflate(x):
        return x - E @ (E.T @ x @ E) @ E.T

    def matvec(vec):
        counter["matvec"] += 1
        x = deflate(np.asarray(vec).reshape(d, d))
        return deflate(channel_apply(x, spec)).ravel()

    return LinearOperator((d * d, d * d), matvec=matvec, dtype=float), counter


def spectral_gap(spec, k=4, tol=1e-13, seed=0, maxiter=None, ncv=20):
    """Second-largest eigenvalue modulus of the channel via deflated Arnoldi (ARPACK).

    When the deflated space is no larger than the Krylov basis (``n = 2``),
    ARPACK would exhaust it and restart from its own internal random stream,
    whose state persists between calls; the operator is then diagonalised
    densely instead, so results never depend on call history.
    """
    n, d = spec.n, spec.dim
    op, counter = deflated_operator(spec)
    if d * d - (n + 1) ** 2 <= ncv:
        dense = np.column_stack([op.matvec(e) for e in np.eye(d * d)])
        w = np.linalg.eigvals(dense)
    else:
        v0 = np.random.default_rng(seed).standard_normal(d * d)
        k = min(k, d * d - (n + 1) ** 2 - 1)
        w = eigs(op, k=k, which="LM", tol=tol, v0=v0, ncv=ncv, maxiter=maxiter, return_eigenvectors=False)
    w = w[np.argsort(-np.abs(w), kind="stable")][:k]
    lam = float(np.abs(w[0]))
    log.info("n=%d: lambda2=%.12f after %d matvecs", n, lam, counter["matvec"])
    return GapResult(n, lam, 1.0 - lam, counter["matvec"], w)


def embed_pair_operator(k4, n, i, j):
    """Dense ``2^n`` matrix of a two-qubit operator on qubits ``(i, j)``."""
    rest = [q for q in range(n) if q not in (i, j)]
    full = np.kron(k4, np.eye(1 << (n - 2)))
    perm = [i, j] + rest
    t = full.reshape([2] * (2 * n))
    inv = np.argsort(perm)
    t = t.transpose(list(inv) + [n + q for q in inv])
    return t.reshape(1 << n, 1 << n)


def dense_superoperator(spec):
    """Dense ``4^n x 4^n`` superoperator built from Kraus operators (oracle, small n)."""
    n = spec.n
    if n > 4:
        raise ValueError("dense superoperator limited to n <= 4")
    s = SINGLET
    if spec.variant == "formula":
        kraus4 = [P_SYM2] + [np.outer(np.eye(4)[a], s) / 2 for a in range(4)]
    else:
        w, v = np.linalg.eigh(P_SYM2)
        sym_basis = v[:, w > 0.5]
        kraus4 = [P_SYM2] + [np.outer(sym_basis[:, a], s) / np.sqrt(3) for a in range(3)]
    d = 1 << n
    sup = np.zeros((d * d, d * d))
    for i, j in spec.pairs:
        for k4 in kraus4:
            kf = embed_pair_operator(k4, n, i, j)
            sup += np.kron(kf, kf.conj()) / len(spec.pairs)
    return sup


# -- scans and fits -------------------------------------------------------------


@dataclass
class GapScanResult:
    records: list
    exponent: float = None
    prefactor: float = None
    r2: float = None
    topology: str = "ring"
    variant: str = "formula"

    def regression(self):
        return {"exponent": self.exponent, "prefactor": self.prefactor, "r2": self.r2}


def fit_power_law(ns, gaps):
    """Least squares on ``log gap = log c + p log n``; returns ``(p, c, r2)``."""
    ns = np.asarray(ns, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    if len(ns) < 3:
        raise ValueError("power-law fit needs at least 3 points")
    fit = linregress(np.log(ns), np.log(gaps))
    return float(fit.slope), float(np.exp(fit.intercept)), float(fit.rvalue**2)


def gap_scan(n_values, topology="ring", variant="formula", seed=0):
    records = []
    for n in sorted(n_values):
        records.append(spectral_gap(PairMapSpec(n, topology, variant), seed=seed))
    result = GapScanResult(records, topology=topology, variant=variant)
    if len(records) >= 3:
        result.exponent, result.prefactor, result.r2 = fit_power_law(
            [r.n for r in records], [r.gap for r in records]
        )
    return result


def write_gap_csv(result, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "lambda2", "gap", "iterations"])
        for r in result.records:
            w.writerow([r.n, repr(r.lambda2_modulus), repr(r.gap), r.iterations])


def write_regression_json(result, path):
    with open(path, "w") as fh:
        json.dump(result.regression(), fh, indent=2, sort_keys=True)


def gnuplot_script(csv_path, result):
    """Plot script: gap data against the fitted power law, log-log axes."""
    return "\n".join(
        [
            "set datafile separator ','",
            "set logscale xy",
            "set xlabel 'participants N'",
            "set ylabel 'gap'",
            f"f(x) = {result.prefactor!r} * x**({result.exponent!r})",
            f"plot '{csv_path}' every ::1 using 1:3 with points title 'gap', f(x) title 'fit'",
            "",
        ]
    )


# -- stochastic rounds ----------------------------------------------------------


def iterate_channel(rho0, spec, rounds):
    """Symmetric-support defect of ``Phi^R(rho0)`` for ``R = 0..rounds``."""
    rho = np.array(rho0, dtype=complex)
    out = [sym_defect(rho, spec.n)]
    for _ in range(rounds):
        rho = channel_apply(rho, spec)
        out.append(sym_defect(rho, spec.n))
    return np.array(out)


def simulate_rounds(rho0, spec, rounds, rng_seed):
    """One stochastic run: each round applies the pair map to one random neighbouring pair."""
    rng = np.random.default_rng(rng_seed)
    pairs = spec.pairs
    rho = np.array(rho0, dtype=complex)
    out = [sym_defect(rho, spec.n)]
    for _ in range(rounds):
        rho = apply_pair(rho, spec, pairs[rng.integers(len(pairs))])
        out.append(sym_defect(rho, spec.n))
    return np.array(out)


def ensemble_rounds(rho0, spec, rounds, seeds):
    """Mean and standard error of the defect trajectory over independent runs."""
    runs = np.array([simulate_rounds(rho0, spec, rounds, s) for s in seeds])
    return runs.mean(axis=0), runs.std(axis=0, ddof=1) / np.sqrt(len(seeds))
