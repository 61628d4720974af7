"""Hot numeric kernels, each with a numba and a numpy implementation.

Dispatchers at the bottom route to whichever backend :mod:`symmes._backend`
selected.  The explicit ``*_numba`` / ``*_numpy`` names stay importable so the
benchmark and the equivalence tests can call both in one process.
"""

import numpy as np

from ._backend import BACKEND, njit


def binomial_table(n):
    """Pascal triangle ``C[k, j] = binom(k, j)`` for ``0 <= j <= k <= n`` as floats."""
    table = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        table[k, 0] = 1.0
        for j in range(1, k + 1):
            table[k, j] = table[k - 1, j - 1] + table[k - 1, j]
    return table


# -- symmetric-power representation ------------------------------------------
#
# pi(U)[beta, alpha] = M[beta, alpha] * sqrt(C(N, alpha) / C(N, beta)) where
# column alpha of M holds the coefficients of (a + c y)^(N - alpha) (b + d y)^alpha
# in powers of y, with U = [[a, b], [c, d]].


def irrep_numpy(u, n):
    a, b = u[0, 0], u[0, 1]
    c, d = u[1, 0], u[1, 1]
    binom = binomial_table(n)
    out = np.empty((n + 1, n + 1), dtype=np.complex128)
    j = np.arange(n + 1)
    for alpha in range(n + 1):
        k = n - alpha
        p = binom[k, : k + 1] * a ** (k - j[: k + 1]) * c ** j[: k + 1]
        q = binom[alpha, : alpha + 1] * b ** (alpha - j[: alpha + 1]) * d ** j[: alpha + 1]
        out[:, alpha] = np.convolve(p, q)
    row_norm = np.sqrt(binom[n])
    return out * (row_norm[None, :] / row_norm[:, None])


@njit(cache=True)
def _irrep_into(u, n, binom, out):
    a = u[0, 0]
    b = u[0, 1]
    c = u[1, 0]
    d = u[1, 1]
    # pw[k] = x^k, 0**0 == 1
    pa = np.ones(n + 1, dtype=np.complex128)
    pb = np.ones(n + 1, dtype=np.complex128)
    pc = np.ones(n + 1, dtype=np.complex128)
    pd = np.ones(n + 1, dtype=np.complex128)
    for k in range(1, n + 1):
        pa[k] = pa[k - 1] * a
        pb[k] = pb[k - 1] * b
        pc[k] = pc[k - 1] * c
        pd[k] = pd[k - 1] * d
    p = np.empty(n + 1, dtype=np.complex128)
    q = np.empty(n + 1, dtype=np.complex128)
    for alpha in range(n + 1):
        k = n - alpha
        for j in range(k + 1):
            p[j] = binom[k, j] * pa[k - j] * pc[j]
        for j in range(alpha + 1):
            q[j] = binom[alpha, j] * pb[alpha - j] * pd[j]
        for beta in range(n + 1):
            acc = 0.0j
            lo = max(0, beta - alpha)
            hi = min(k, beta)
            for j in range(lo, hi + 1):
                acc += p[j] * q[beta - j]
            out[beta, alpha] = acc * np.sqrt(binom[n, alpha] / binom[n, beta])


@njit(cache=True)
def _irrep_batch_numba(us, n, binom):
    out = np.empty((us.shape[0], n + 1, n + 1), dtype=np.complex128)
    for t in range(us.shape[0]):
        _irrep_into(us[t], n, binom, out[t])
    return out


def irrep_numba(u, n):
    return irrep_batch_numba(np.asarray(u, dtype=np.complex128)[None], n)[0]


def irrep_batch_numba(us, n):
    us = np.ascontiguousarray(us, dtype=np.complex128)
    return _irrep_batch_numba(us, n, binomial_table(n))


def irrep_batch_numpy(us, n):
    us = np.asarray(us, dtype=np.complex128)
    return np.stack([irrep_numpy(u, n) for u in us]) if len(us) else np.empty((0, n + 1, n + 1), complex)


# -- two-qubit map on an N-qubit operator ------------------------------------
#
# The pair map is X -> P X P + <psi|X|psi> M on qubits (qi, qj), acting on
# the 4x4 blocks of X that share all other qubit labels.  Qubit 0 is the most
# significant bit of the computational index.


def _pair_block_indices(n, qi, qj):
    d = 1 << n
    bi = 1 << (n - 1 - qi)
    bj = 1 << (n - 1 - qj)
    base = np.arange(d)
    base = base[(base & bi == 0) & (base & bj == 0)]
    return np.stack([base, base | bj, base | bi, base | bi | bj], axis=1)


def pair_map_accumulate_numpy(x, out, n, qi, qj, proj, psi, tail, weight):
    idx = _pair_block_indices(n, qi, qj)  # (d/4, 4)
    block = x[idx[:, :, None, None], idx[None, None, :, :]]  # (r, a, c, b)
    ov = np.einsum("a,rasb,b->rs", psi.conj(), block, psi)
    res = np.einsum("ae,resb,bf->rasf", proj, block, proj)
    res += ov[:, None, :, None] * tail[None, :, None, :]
    out[idx[:, :, None, None], idx[None, None, :, :]] += weight * res


@njit(cache=True)
def _pair_map_accumulate_numba(x, out, idx, proj, psi, tail, weight):
    nb = idx.shape[0]
    blk = np.empty((4, 4), dtype=x.dtype)
    tmp = np.empty((4, 4), dtype=x.dtype)
    zero = x[0, 0] * 0.0
    for r in range(nb):
        for c in range(nb):
            for a in range(4):
                for b in range(4):
                    blk[a, b] = x[idx[r, a], idx[c, b]]
            ov = zero
            for a in range(4):
                for b in range(4):
                    ov += np.conj(psi[a]) * blk[a, b] * psi[b]
            for a in range(4):
                for b in range(4):
                    acc = zero
                    for e in range(4):
                        acc += proj[a, e] * blk[e, b]
                    tmp[a, b] = acc
            for a in range(4):
                for b in range(4):
                    acc = zero
                    for e in range(4):
                        acc += tmp[a, e] * proj[e, b]
                    out[idx[r, a], idx[c, b]] += weight * (acc + ov * tail[a, b])


def pair_map_accumulate_numba(x, out, n, qi, qj, proj, psi, tail, weight):
    idx = _pair_block_indices(n, qi, qj)
    _pair_map_accumulate_numba(x, out, idx, proj, psi, tail, float(weight))


if BACKEND == "numba":
    irrep_kernel = irrep_numba
    irrep_batch_kernel = irrep_batch_numba
    pair_map_accumulate = pair_map_accumulate_numba
else:
    irrep_kernel = irrep_numpy
    irrep_batch_kernel = irrep_batch_numpy
    pair_map_accumulate = pair_map_accumulate_numpy
