"""Shared fixtures-free helpers: random objects and independent oracles."""

import numpy as np
from scipy.stats import unitary_group


def haar(n, rng):
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng)


def random_complex(shape, rng):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def gram_schmidt(m):
    """Modified Gram-Schmidt on columns; returns orthonormal columns."""
    cols = []
    for v in np.asarray(m, dtype=complex).T:
        w = v.copy()
        for q in cols:
            w = w - (q.conj() @ w) * q
        nrm = np.linalg.norm(w)
        if nrm > 1e-9:
            cols.append(w / nrm)
    return np.array(cols).T


def proj(m):
    """Projector onto the column span of ``m`` via Gram-Schmidt."""
    q = gram_schmidt(m)
    return q @ q.conj().T


def random_projection(n, k, rng):
    return proj(random_complex((n, k), rng))


def ket(bits):
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def dense_pauli(s):
    """Dense matrix of a Pauli string like '-iXZY' by plain kron products."""
    single = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.array([[1, 0], [0, -1]]),
    }
    phase = 1
    for pre, val in (("+i", 1j), ("-i", -1j), ("+", 1), ("-", -1)):
        if s.startswith(pre):
            phase, s = val, s[len(pre):]
            break
    out = np.array([[1.0 + 0j]])
    for ch in s:
        out = np.kron(out, single[ch])
    return phase * out


def on_qubit(op, k, n):
    """``op`` acting on qubit k (0-based, leftmost) of n."""
    s = ["I"] * n
    s[k] = op
    return "".join(s)


def complement_basis(p, tol=1e-8):
    w, v = np.linalg.eigh(p)
    return v[:, w < 0.5]


def extend_partial_isometry(v):
    """Unitary agreeing with partial isometry ``v`` on its initial space."""
    init, final = v.conj().T @ v, v @ v.conj().T
    return v + complement_basis(final) @ complement_basis(init).conj().T


def block_commuting_unitary(p, rng):
    """Random unitary commuting with projection ``p``."""
    w, v = np.linalg.eigh(p)
    k = int(np.sum(w > 0.5))
    n = p.shape[0]
    mid = np.zeros((n, n), dtype=complex)
    mid[: n - k, : n - k] = haar(n - k, rng) if n - k else 0
    mid[n - k:, n - k:] = haar(k, rng)
    return v @ mid @ v.conj().T


def isoclinic_ops(m, rng, count=None):
    """Operators ``G W_i C_i G^H`` sending a code onto graph subspaces of an
    anti-commuting family; returns ``(ops, code_projection)``."""
    from isokl.construct import graph_partial_isometry, kestelman_family, p_infinity

    members = kestelman_family(m).members
    if count is not None:
        members = members[:count]
    p_inf = p_infinity(m)
    g = haar(2 * m, rng)
    ops = [g @ block_commuting_unitary(p_inf, rng) @ g.conj().T]
    for a in members:
        w = extend_partial_isometry(graph_partial_isometry(a))
        ops.append(g @ w @ block_commuting_unitary(p_inf, rng) @ g.conj().T)
    return ops, g @ p_inf @ g.conj().T
