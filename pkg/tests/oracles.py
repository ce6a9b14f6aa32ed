"""Independent reference implementations used only by the tests.

Everything here is built from explicit Kronecker products and projectors,
never from the package's tensor-contraction simulator.
"""

from functools import reduce

import numpy as np

from ucgates.circuit import CNOT, GlobalPhase, OneQubit

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)


def kron_all(mats):
    return reduce(np.kron, mats, np.eye(1, dtype=complex))


def embed_one(g, p, n):
    return kron_all([np.eye(2 ** (p - 1)), g, np.eye(2 ** (n - p))])


def embed_cnot(c, t, n):
    off = [I2] * n
    on = [I2] * n
    off[c - 1] = P0
    on[c - 1] = P1
    on[t - 1] = SX
    return kron_all(off) + kron_all(on)


def circuit_unitary(circ):
    u = np.eye(2**circ.n, dtype=complex)
    for g in circ.gates:
        if isinstance(g, OneQubit):
            u = embed_one(g.matrix, g.target, circ.n) @ u
        elif isinstance(g, CNOT):
            u = embed_cnot(g.control, g.target, circ.n) @ u
        elif isinstance(g, GlobalPhase):
            u = np.exp(1j * g.angle) * u
    return u


def uc_embed(controls, target, blocks, n):
    """Sum over control patterns of projector products times the block."""
    k = len(controls)
    out = np.zeros((2**n, 2**n), dtype=complex)
    for p in range(2**k):
        ops = [I2] * n
        for i, c in enumerate(controls):
            ops[c - 1] = P1 if (p >> (k - 1 - i)) & 1 else P0
        ops[target - 1] = blocks[p]
        out += kron_all(ops)
    return out


def rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def ry(t):
    return np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]], dtype=complex)


def matmul_loops(a, b):
    out = np.zeros((a.shape[0], b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


def kron_index(a, b):
    p, q = a.shape
    r, s = b.shape
    out = np.zeros((p * r, q * s), dtype=complex)
    for i in range(p * r):
        for j in range(q * s):
            out[i, j] = a[i // r, j // s] * b[i % r, j % s]
    return out


def haar(dim, rng):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def phase_dist(a, b):
    """min over theta of ||a - e^{i theta} b||_F by brute-force scan plus refinement."""
    thetas = np.linspace(-np.pi, np.pi, 721)
    vals = [np.linalg.norm(a - np.exp(1j * t) * b) for t in thetas]
    t0 = thetas[int(np.argmin(vals))]
    fine = np.linspace(t0 - 0.01, t0 + 0.01, 2001)
    return min(np.linalg.norm(a - np.exp(1j * t) * b) for t in fine)
