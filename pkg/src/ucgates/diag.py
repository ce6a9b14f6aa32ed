"""Diagonal gates: cascade decomposition and merging into neighbours."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import ShapeError, ValidationError
from .mux import UCGate
from .ucrot import UCRotation, z_phases


@dataclass(frozen=True, eq=False)
class DiagonalGate:
    """``diag(exp(i * phases))`` on qubits ``1..n``."""

    n: int
    phases: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float).reshape(-1)
        if phases.shape[0] != 2**self.n:
            raise ShapeError(f"{self.n} qubits need {2 ** self.n} phases, got {phases.shape[0]}")
        object.__setattr__(self, "phases", phases)

    def embed(self) -> np.ndarray:
        return np.diag(np.exp(1j * self.phases))

    @classmethod
    def identity(cls, n: int) -> "DiagonalGate":
        return cls(n, np.zeros(2**n))

    @classmethod
    def from_rotations(cls, rots: Sequence[UCRotation], n: int, phase: float = 0.0) -> "DiagonalGate":
        return cls(n, z_phases(rots, range(1, n + 1)) + phase)

    def depends_on(self, q: int, tol: float = 0.0) -> bool:
        t = self.phases.reshape((2,) * self.n)
        diff = np.take(t, 1, axis=q - 1) - np.take(t, 0, axis=q - 1)
        return bool(np.max(np.abs(np.angle(np.exp(1j * diff)))) > tol)


def diag_decompose(
    d: DiagonalGate, order: Sequence[int] | None = None
) -> tuple[list[UCRotation], float]:
    """Write ``d`` as ``e^{i phase}`` times a cascade of z rotations.

    Qubits are peeled in ``order`` (default ``n, n-1, ..., 1``); the rotation
    on the i-th peeled qubit is controlled by every qubit not yet peeled, in
    ascending order. Rotations are returned in peeling order; they commute.
    """
    n = d.n
    order = list(range(n, 0, -1)) if order is None else [int(q) for q in order]
    if sorted(order) != list(range(1, n + 1)):
        raise ValidationError(f"peeling order {order} is not a permutation of 1..{n}")
    t = d.phases.reshape((2,) * n) if n else d.phases.reshape(())
    alive = list(range(1, n + 1))
    rots = []
    for q in order:
        ax = alive.index(q)
        even = np.take(t, 0, axis=ax)
        odd = np.take(t, 1, axis=ax)
        alive.pop(ax)
        rots.append(UCRotation("z", tuple(alive), q, np.asarray(odd - even).reshape(-1)))
        t = (even + odd) / 2
    return rots, float(np.asarray(t).reshape(()))


def merge_diag_into_ucu(d: DiagonalGate, g: UCGate, side: str = "left") -> UCGate:
    """Absorb a diagonal into a uniformly controlled gate.

    ``side="left"`` returns ``d * g`` (diagonal applied after ``g``) and
    ``side="right"`` returns ``g * d``. Qubits on which ``d`` depends are added
    to the controls when needed.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    n = d.n
    if max(g.qubits) > n:
        raise ShapeError(f"gate on qubits {g.qubits} does not fit a {n}-qubit diagonal")
    extra = [q for q in range(1, n + 1) if q not in g.qubits and d.depends_on(q)]
    controls = list(g.controls) + extra
    k = len(controls)
    # phases of d indexed by (controls..., target), with other qubits fixed to 0
    t = d.phases.reshape((2,) * n)
    keep = controls + [g.target]
    idx = tuple(slice(None) if q in keep else 0 for q in range(1, n + 1))
    sub = t[idx]
    remaining = [q for q in range(1, n + 1) if q in keep]
    sub = np.transpose(sub, [remaining.index(q) for q in keep]).reshape(2**k, 2)
    old = g.blocks.reshape((2,) * g.k + (2, 2))
    old = np.broadcast_to(old.reshape(old.shape[:-2] + (1,) * len(extra) + (2, 2)), (2,) * k + (2, 2))
    old = old.reshape(2**k, 2, 2)
    ph = np.exp(1j * sub)
    if side == "left":
        blocks = ph[:, :, None] * old
    else:
        blocks = old * ph[:, None, :]
    return UCGate(tuple(controls), g.target, blocks)
