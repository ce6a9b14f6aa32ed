"""Uniformly controlled one-qubit gates and their decomposition.

A single demultiplexing step factors ``diag(a, b)`` (control ``m`` selects
``a`` or ``b`` on target ``t``) as

    diag(a, b) = e^{i res} * R * (I (x) u) * D * (I (x) v)

with ``D = exp(i pi/4 Z (x) Z)``, ``u, v`` in SU(2) and ``R`` a z rotation of
``m`` controlled by ``t``. ``D`` costs one CNOT, ``R`` is diagonal, and the
recursion over all controls leaves a CNOT/one-qubit skeleton (F-tilde)
followed by a diagonal expressed as uniformly controlled z rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import CNOT, Circuit, GlobalPhase, H, OneQubit, X, embed_controlled, rz
from .linalg import POLICY, ShapeError, ValidationError, arg, eig2_unitary, unitarity_defect
from .ucrot import Link, UCRotation, cnot_link, default_order, z_phases

D_DIAG = np.exp(1j * math.pi / 4 * np.array([1, -1, -1, 1]))
_SQRT_LAMBDA = np.diag([np.exp(1j * math.pi / 4), np.exp(-1j * math.pi / 4)])


@dataclass(frozen=True, eq=False)
class UCGate:
    controls: tuple
    target: int
    blocks: np.ndarray

    def __post_init__(self):
        controls = tuple(int(c) for c in self.controls)
        blocks = np.asarray(self.blocks, dtype=complex)
        if blocks.ndim != 3 or blocks.shape[1:] != (2, 2):
            raise ShapeError(f"blocks must have shape (2^k, 2, 2), got {blocks.shape}")
        if blocks.shape[0] != 2 ** len(controls):
            raise ShapeError(f"{len(controls)} controls need {2 ** len(controls)} blocks")
        if self.target in controls or len(set(controls)) != len(controls):
            raise ValidationError("controls must be distinct and exclude the target")
        for i, b in enumerate(blocks):
            if unitarity_defect(b) > POLICY.exact:
                raise ValidationError(f"block {i} is not unitary")
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "blocks", blocks)

    @property
    def k(self) -> int:
        return len(self.controls)

    @property
    def qubits(self) -> tuple:
        return self.controls + (self.target,)

    def embed(self, n: int | None = None) -> np.ndarray:
        n = max(self.qubits) if n is None else n
        return embed_controlled(self.controls, self.target, self.blocks, n)


@dataclass(frozen=True, eq=False)
class DemuxResult:
    v: np.ndarray
    u: np.ndarray
    r: tuple
    residual_phase: float

    @property
    def d(self) -> np.ndarray:
        return _SQRT_LAMBDA

    def r_matrix(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.array(self.r)))

    def factors(self) -> list[np.ndarray]:
        """The 4x4 factors ``[R, I(x)u, D, I(x)v]`` in operator order (control first)."""
        rm = self.r_matrix()
        big_r = np.zeros((4, 4), dtype=complex)
        big_r[:2, :2] = rm.conj()
        big_r[2:, 2:] = rm
        i2 = np.eye(2)
        return [big_r, np.kron(i2, self.u), np.diag(D_DIAG), np.kron(i2, self.v)]

    def reconstruct(self) -> np.ndarray:
        out = np.exp(1j * self.residual_phase) * np.eye(4)
        for f in self.factors():
            out = out @ f
        return out


def _demux_raw(a: np.ndarray, b: np.ndarray):
    """Return ``(u, v_full, rho1, rho2)`` with ``a = r^* u d v_full`` and ``b = r u d^* v_full``."""
    x = a @ b.conj().T
    phi = arg(np.linalg.det(x))
    x1 = x[0, 0] * np.exp(-0.5j * phi)
    rho1 = 0.5 * (math.pi / 2 - phi / 2 - arg(x1))
    rho2 = 0.5 * (math.pi / 2 - phi / 2 + arg(x1) + math.pi)
    r = np.array([np.exp(1j * rho1), np.exp(1j * rho2)])
    rxr = r[:, None] * x * r[None, :]
    e = eig2_unitary(rxr)
    u = e.vectors.copy()
    if abs(e.values[0] - 1j) > abs(e.values[1] - 1j):
        u = u[:, ::-1].copy()
        u[:, 1] *= -1
    v_full = _SQRT_LAMBDA @ u.conj().T @ (r.conj()[:, None] * b)
    return u, v_full, rho1, rho2


def demultiplex_step(a, b) -> DemuxResult:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    for name, m in (("a", a), ("b", b)):
        if m.shape != (2, 2):
            raise ShapeError(f"{name} must be 2x2, got {m.shape}")
        if unitarity_defect(m) > POLICY.exact:
            raise ValidationError(f"{name} is not unitary")
    u, v_full, rho1, rho2 = _demux_raw(a, b)
    res = arg(np.linalg.det(v_full)) / 2
    return DemuxResult(v=v_full * np.exp(-1j * res), u=u, r=(rho1, rho2), residual_phase=res)


def d_gate_circuit(m: int = 1, t: int = 2, n: int | None = None) -> Circuit:
    """One-CNOT circuit for ``D`` on qubits ``(m, t)`` with ``m`` the more significant."""
    n = max(m, t) if n is None else n
    return Circuit(
        n,
        [
            OneQubit(m, rz(-math.pi / 2)),
            OneQubit(t, rz(-math.pi / 2)),
            OneQubit(t, H),
            CNOT(m, t),
            OneQubit(t, H),
            GlobalPhase(-math.pi / 4),
        ],
    )


def _bits(count: int, width: int, pos: int) -> np.ndarray:
    return (np.arange(count) >> (width - 1 - pos)) & 1


def _decompose(controls: list, target: int, blocks: np.ndarray, order: list, link: Link):
    """Recursive core. ``blocks`` has shape ``(2,)*k + (2, 2)`` with axes in
    ``controls`` order. Returns ``(gates, rotations, phase)`` such that the
    gate equals ``e^{i phase} * Delta(rotations) * F(gates)``."""
    if not controls:
        return [OneQubit(target, blocks.reshape(2, 2))], [], 0.0
    m = order[0]
    ax = controls.index(m)
    rest = controls[:ax] + controls[ax + 1:]
    k1 = len(rest)
    a = np.take(blocks, 0, axis=ax).reshape(-1, 2, 2)
    b = np.take(blocks, 1, axis=ax).reshape(-1, 2, 2)
    count = a.shape[0]
    us = np.empty_like(a)
    vs = np.empty_like(a)
    rho = np.empty((count, 2))
    for j in range(count):
        us[j], vs[j], rho[j, 0], rho[j, 1] = _demux_raw(a[j], b[j])

    # R carries the Rz(-pi/2) dressing of D on the demultiplexed qubit
    r_angles = (2 * rho - math.pi / 2).reshape(-1)
    r_rot = UCRotation("z", tuple(rest) + (target,), m, r_angles)

    gates_v, rots_v, ph_v = _decompose(rest, target, vs.reshape((2,) * k1 + (2, 2)), order[1:], link)
    last = gates_v[-1]
    gates_v[-1] = OneQubit(target, H @ rz(-math.pi / 2) @ last.matrix)

    delta_v = np.exp(1j * z_phases(rots_v, rest + [target])).reshape(count, 2)
    link_gates, between = link(m, target)
    parity = np.zeros(count, dtype=np.int64)
    for q in between:
        if q not in rest:
            raise ValidationError(f"link for control {m} needs qubit {q} among the remaining controls")
        parity ^= _bits(count, k1, rest.index(q))
    gu = np.empty_like(us)
    for j in range(count):
        # the parity correction X^p acts first, undoing the leaked flip
        gu[j] = us[j] @ (delta_v[j][:, None] * (H @ X if parity[j] else H))
    gates_u, rots_u, ph_u = _decompose(rest, target, gu.reshape((2,) * k1 + (2, 2)), order[1:], link)
    return gates_v + link_gates + gates_u, [r_rot] + rots_u, ph_v + ph_u - math.pi / 4


def ucu_decompose(
    g: UCGate,
    demux_order: Sequence[int] | None = None,
    n: int | None = None,
    link: Link = cnot_link,
) -> tuple[Circuit, list[UCRotation]]:
    """Split ``g`` into ``(ftilde, delta)`` with ``embed(g) = Delta * unitary(ftilde)``.

    ``ftilde`` alternates ``2^k`` one-qubit gates with ``2^k - 1`` CNOTs (plus a
    ``GlobalPhase``); ``delta`` holds ``k`` uniformly controlled z rotations
    whose control counts run from ``k`` down to 1.
    """
    n = max(g.qubits) if n is None else n
    order = default_order(g.controls, g.target) if demux_order is None else [int(q) for q in demux_order]
    if sorted(order) != sorted(g.controls) or len(set(order)) != len(order):
        raise ValidationError(f"demux order {order} is not a permutation of the controls {list(g.controls)}")
    blocks = g.blocks.reshape((2,) * g.k + (2, 2))
    gates, rots, phase = _decompose(list(g.controls), g.target, blocks, order, link)
    if g.k:
        gates.append(GlobalPhase(phase))
    return Circuit(n, gates), rots
