"""Cosine-sine decomposition and the full n-qubit synthesis pipeline.

Recursive CSD turns an n-qubit unitary into an alternating sequence of
uniformly controlled gates on qubit n and uniformly controlled y rotations.
Each uniformly controlled gate is then implemented up to a diagonal, and
that diagonal is pushed into the next element of the sequence. The last
diagonal becomes a cascade of uniformly controlled z rotations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import CNOT, MAX_DENSE_QUBITS, Circuit, GlobalPhase, OneQubit, ResourceError, peephole
from .diag import DiagonalGate, diag_decompose, merge_diag_into_ucu
from .linalg import (
    NumericError,
    ShapeError,
    ValidationError,
    as_matrix,
    num_qubits,
    permute_qubits,
    require_unitary,
    svd,
)
from .mux import UCGate, ucu_decompose
from .ucrot import UCRotation, ucr_gates, z_phases

MAX_SYNTH_QUBITS = 10


def ruler(i: int) -> int:
    """One plus the number of trailing zero bits of ``i``."""
    if i < 1:
        raise ValueError(f"ruler function is defined for positive integers, got {i}")
    return (i & -i).bit_length()


@dataclass(frozen=True, eq=False)
class CSDFactors:
    L1: np.ndarray
    L2: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    theta: np.ndarray

    @property
    def c(self) -> np.ndarray:
        return np.cos(self.theta / 2)

    @property
    def s(self) -> np.ndarray:
        return np.sin(self.theta / 2)

    def middle(self) -> np.ndarray:
        c, s = np.diag(self.c), np.diag(self.s)
        return np.block([[c, -s], [s, c]])

    def reconstruct(self) -> np.ndarray:
        z = np.zeros_like(self.L1)
        left = np.block([[self.L1, z], [z, self.L2]])
        right = np.block([[self.R1, z], [z, self.R2]])
        return left @ self.middle() @ right


def cs_decompose(u) -> CSDFactors:
    """``U = diag(L1, L2) [[C, -S], [S, C]] diag(R1, R2)`` with ``C, S >= 0``."""
    u = as_matrix(u)
    dim = u.shape[0]
    if u.shape != (dim, dim) or dim < 2 or dim % 2:
        raise ShapeError(f"cs_decompose needs an even square matrix, got {u.shape}")
    h = dim // 2
    u11, u12, u21, u22 = u[:h, :h], u[:h, h:], u[h:, :h], u[h:, h:]
    l1, cos, v = svd(u11)
    r1 = v.conj().T
    # polar factor of U21 R1^dagger gives L2; its positive part is S
    x, sig, y = svd(u21 @ r1.conj().T)
    l2 = x @ y.conj().T
    p = (y * sig) @ y.conj().T
    sin = np.clip(np.real(np.diagonal(p)), 0.0, 1.0)
    cos = np.clip(cos, 0.0, 1.0)
    theta = 2 * np.arctan2(sin, cos)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    r2 = c[:, None] * (l2.conj().T @ u22) - s[:, None] * (l1.conj().T @ u12)
    if not np.all(np.isfinite(r2)):
        raise NumericError("cosine-sine decomposition produced non-finite factors")
    return CSDFactors(l1, l2, r1, r2, theta)


def _blockdiag(blocks: np.ndarray) -> np.ndarray:
    b, d, _ = blocks.shape
    out = np.zeros((b * d, b * d), dtype=complex)
    for j in range(b):
        out[j * d:(j + 1) * d, j * d:(j + 1) * d] = blocks[j]
    return out


def _split_blocks(blocks: np.ndarray):
    """CS-decompose every block; return (left blocks, angles, right blocks)."""
    b, d, _ = blocks.shape
    h = d // 2
    left = np.empty((2 * b, h, h), dtype=complex)
    right = np.empty((2 * b, h, h), dtype=complex)
    angles = np.empty((b, h))
    for j in range(b):
        f = cs_decompose(blocks[j])
        left[2 * j], left[2 * j + 1] = f.L1, f.L2
        right[2 * j], right[2 * j + 1] = f.R1, f.R2
        angles[j] = f.theta
    return left, angles.reshape(-1), right


def csd_step(u, k: int, m: int | None = None):
    """One recursion step on a block-diagonal unitary.

    ``u`` is an n-qubit unitary that is block diagonal with respect to
    qubits ``1..k`` (``2^k`` blocks). The operational qubit ``m`` (default
    ``k + 1``) is split off, giving ``u = left * ry * right`` where ``left``
    and ``right`` are block diagonal with respect to qubits ``1..k`` and ``m``,
    and ``ry`` is a y rotation on ``m`` controlled by all other qubits in
    ascending order. Returns dense ``left`` and ``right`` and the rotation.
    """
    u = require_unitary(u, what="csd_step input")
    n = num_qubits(u.shape[0])
    m = k + 1 if m is None else m
    if not k < m <= n:
        raise ValidationError(f"operational qubit {m} must lie in {k + 1}..{n}")
    # bring m next to the control qubits
    perm = list(range(1, k + 1)) + [m] + [q for q in range(k + 1, n + 1) if q != m]
    w = permute_qubits(u, perm)
    d = 2 ** (n - k)
    blocks = np.array([w[j * d:(j + 1) * d, j * d:(j + 1) * d] for j in range(2**k)])
    if np.linalg.norm(w - _blockdiag(blocks)) > 1e-9:
        raise ValidationError(f"input is not block diagonal over qubits 1..{k}")
    left, angles, right = _split_blocks(blocks)
    inv = [perm.index(q) + 1 for q in range(1, n + 1)]
    left = permute_qubits(_blockdiag(left), inv)
    right = permute_qubits(_blockdiag(right), inv)
    rot = UCRotation("y", tuple(q for q in range(1, n + 1) if q != m), m, angles)
    return left, rot, right


def _canonical_sequence(blocks: np.ndarray, depth: int, n: int) -> list:
    b, d, _ = blocks.shape
    if d == 2:
        return [UCGate(tuple(range(1, n)), n, blocks)]
    left, angles, right = _split_blocks(blocks)
    target = depth + 1
    controls = tuple(q for q in range(1, n + 1) if q != target)
    rot = UCRotation("y", controls, target, angles)
    return (
        _canonical_sequence(right, depth + 1, n)
        + [rot]
        + _canonical_sequence(left, depth + 1, n)
    )


def _relabel(item, mapping: dict[int, int]):
    controls = tuple(mapping[c] for c in item.controls)
    target = mapping[item.target]
    if isinstance(item, UCGate):
        return UCGate(controls, target, item.blocks)
    return UCRotation(item.axis, controls, target, item.angles)


def csd_sequence(u, order: Sequence[int] | None = None) -> list:
    """Full CSD recursion in application order.

    ``order`` lists the operational qubits, one per recursion depth (n - 1
    of them, default ``1..n-1``). The remaining qubit is the target of the
    uniformly controlled gates. The result alternates ``UCGate`` objects with
    y rotations; element ``i`` (1-based) of the default order acts on qubit
    ``n + 1 - ruler(i)``.
    """
    u = require_unitary(u, what="csd_sequence input")
    n = num_qubits(u.shape[0])
    order = list(range(1, n)) if order is None else [int(q) for q in order]
    if len(order) != n - 1 or len(set(order)) != n - 1 or not all(1 <= q <= n for q in order):
        raise ValidationError(f"order {order} must list {n - 1} distinct qubits of 1..{n}")
    full = order + [q for q in range(1, n + 1) if q not in order]
    w = permute_qubits(u, full)
    seq = _canonical_sequence(w[None], 0, n)
    if full == list(range(1, n + 1)):
        return seq
    mapping = {p + 1: q for p, q in enumerate(full)}
    return [_relabel(item, mapping) for item in seq]


def as_ucgate(item) -> UCGate:
    if isinstance(item, UCGate):
        return item
    return UCGate(item.controls, item.target, item.blocks())


def sweep_diagonals(seq: list, n: int, ucu=None, last_flip: int | None = None):
    """Implement each element up to a diagonal, carrying the diagonal forward.

    ``ucu(gate, n)`` returns ``(ftilde, delta)`` for one element (default:
    ``ucu_decompose``). When ``last_flip`` is a qubit ``c``, the last element
    is pre-multiplied by ``CNOT(c, target)``; the caller must re-apply that
    CNOT after the final diagonal. Returns ``(gates, final diagonal)``.
    """
    ucu = ucu or (lambda g, n: ucu_decompose(g, n=n))
    pending = DiagonalGate.identity(n)
    gates: list = []
    for i, item in enumerate(seq):
        g = as_ucgate(item)
        if i and np.any(pending.phases):
            g = merge_diag_into_ucu(pending, g, side="right")
        if last_flip is not None and i == len(seq) - 1:
            g = _flip_by(g, last_flip)
        kind = _trivial_kind(g)
        if kind == "diagonal":
            pending = _as_diagonal(g, n)
            continue
        if kind == "uncontrolled":
            gates.append(OneQubit(g.target, g.blocks[0]))
            pending = DiagonalGate.identity(n)
            continue
        ftilde, delta = ucu(g, n)
        gates.extend(ftilde.gates)
        pending = DiagonalGate(n, z_phases(delta, range(1, n + 1)))
    return gates, pending


def _trivial_kind(g: UCGate, tol: float = 1e-12) -> str | None:
    b = g.blocks
    if np.max(np.abs(b[:, 0, 1])) <= tol and np.max(np.abs(b[:, 1, 0])) <= tol:
        return "diagonal"
    if np.max(np.abs(b - b[0])) <= tol:
        return "uncontrolled"
    return None


def _as_diagonal(g: UCGate, n: int) -> DiagonalGate:
    """Phases of a uniformly controlled gate whose blocks are diagonal."""
    ph = np.angle(np.stack([g.blocks[:, 0, 0], g.blocks[:, 1, 1]], axis=-1))
    order = list(g.controls) + [g.target]
    t = ph.reshape((2,) * len(order))
    # broadcast over qubits the gate does not touch, then sort axes to 1..n
    missing = [q for q in range(1, n + 1) if q not in order]
    t = t.reshape(t.shape + (1,) * len(missing))
    t = np.broadcast_to(t, (2,) * n)
    axes = order + missing
    t = np.transpose(t, [axes.index(q) for q in range(1, n + 1)])
    return DiagonalGate(n, t.reshape(-1))


def _flip_by(g: UCGate, c: int) -> UCGate:
    """``CNOT(c, target) * g`` as a uniformly controlled gate."""
    if c not in g.controls:
        g = UCGate(g.controls + (c,), g.target, np.repeat(g.blocks, 2, axis=0))
    blocks = g.blocks.copy().reshape((2,) * g.k + (2, 2))
    idx = [slice(None)] * g.k
    idx[g.controls.index(c)] = 1
    blocks[tuple(idx)] = blocks[tuple(idx)][..., ::-1, :]
    return UCGate(g.controls, g.target, blocks.reshape(-1, 2, 2))


def diagonal_gates(d: DiagonalGate, ucr=None, peel=None) -> list:
    """Gates for a diagonal: z-rotation cascade (fewest controls first) plus phase.

    ``ucr(rotation)`` returns the gate list of one rotation (default
    ``ucr_gates``).
    """
    ucr = ucr or ucr_gates
    rots, phase = diag_decompose(d, peel)
    out: list = []
    for r in reversed(rots):
        if np.any(r.angles):
            out.extend(ucr(r))
    out.append(GlobalPhase(phase))
    return out


def decompose_unitary(u, optimize: bool = True) -> Circuit:
    """Synthesize an n-qubit unitary into one-qubit gates and CNOTs.

    With ``optimize`` the last CNOT of the final diagonal cancels against a
    CNOT folded into the last uniformly controlled gate, and the peephole
    pass merges the first rotation of each diagonal stage into the
    preceding one-qubit gate on that wire.
    """
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ShapeError(f"expected a square matrix, got {u.shape}")
    n = num_qubits(u.shape[0])
    if n < 1 or n > min(MAX_SYNTH_QUBITS, MAX_DENSE_QUBITS):
        raise ResourceError(f"decompose_unitary supports 1..{MAX_SYNTH_QUBITS} qubits, got {n}")
    u = require_unitary(u, what="input")
    seq = csd_sequence(u)
    # the CNOT trick only pays off when the last element is a genuine multiplexor
    flip = 1 if optimize and n >= 2 and _trivial_kind(as_ucgate(seq[-1])) is None else None
    gates, final = sweep_diagonals(seq, n, last_flip=flip)
    gates.extend(diagonal_gates(final))
    if flip is not None:
        gates.append(CNOT(flip, n))
    circ = Circuit(n, gates)
    return peephole(circ) if optimize else circ
