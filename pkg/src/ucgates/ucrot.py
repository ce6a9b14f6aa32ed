"""Uniformly controlled rotations about the y or z axis.

A rotation with controls ``c_1..c_k`` applies ``R_axis(angles[p])`` to the
target, where ``p`` is the control bit pattern read most significant first.
Compilation splits the angle list on one control at a time into half sums
and half differences; conjugating by a CNOT on the target negates the
rotation angle for both supported axes, which glues the halves together.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuit import CNOT, Circuit, OneQubit, embed_controlled, rotation
from .linalg import ShapeError, ValidationError

SUPPORTED_AXES = ("y", "z")


class UnsupportedAxisError(ValueError):
    pass


# A link realizes "flip the target when (m XOR parity(between)) is 1".
# It returns the gates and the qubits whose parity leaks into the flip.
Link = Callable[[int, int], tuple[list, list[int]]]


def cnot_link(m: int, t: int) -> tuple[list, list[int]]:
    return [CNOT(m, t)], []


def default_order(controls: Sequence[int], target: int) -> list[int]:
    """Farthest control from the target first; ties go to the lower index."""
    return sorted(controls, key=lambda c: (-abs(c - target), c))


@dataclass(frozen=True, eq=False)
class UCRotation:
    axis: str
    controls: tuple
    target: int
    angles: np.ndarray

    def __post_init__(self):
        if self.axis not in SUPPORTED_AXES:
            raise UnsupportedAxisError(f"axis {self.axis!r} is not perpendicular to x")
        controls = tuple(int(c) for c in self.controls)
        angles = np.asarray(self.angles, dtype=float).reshape(-1)
        if angles.shape[0] != 2 ** len(controls):
            raise ShapeError(f"{len(controls)} controls need {2 ** len(controls)} angles")
        if self.target in controls or len(set(controls)) != len(controls):
            raise ValidationError("controls must be distinct and exclude the target")
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "angles", angles)

    @property
    def k(self) -> int:
        return len(self.controls)

    @property
    def qubits(self) -> tuple:
        return self.controls + (self.target,)

    def blocks(self) -> np.ndarray:
        return np.array([rotation(self.axis, a) for a in self.angles])

    def embed(self, n: int | None = None) -> np.ndarray:
        n = max(self.qubits) if n is None else n
        return embed_controlled(self.controls, self.target, self.blocks(), n)


def z_phases(rots: Sequence[UCRotation], qubits: Sequence[int]) -> np.ndarray:
    """Diagonal phases (radians) of a product of z rotations.

    The result is indexed by basis patterns of ``qubits`` (first = most
    significant); every rotation must act inside ``qubits``.
    """
    qubits = list(qubits)
    m = len(qubits)
    idx = np.arange(2**m)
    bit = {q: (idx >> (m - 1 - i)) & 1 for i, q in enumerate(qubits)}
    out = np.zeros(2**m)
    for r in rots:
        if r.axis != "z":
            raise UnsupportedAxisError("z_phases needs z rotations")
        pattern = np.zeros(2**m, dtype=np.int64)
        for c in r.controls:
            pattern = (pattern << 1) | bit[c]
        sign = 2 * bit[r.target] - 1
        out += sign * r.angles[pattern] / 2
    return out


def _compile(axis, controls, target, angles, order, link) -> tuple[list, int]:
    """Return ``(gates, terminal_length)``; the gate list ends with the link
    of its top control, whose length is reported so callers can cut it."""
    if not controls:
        return [OneQubit(target, rotation(axis, float(angles.reshape(-1)[0])))], 0
    m = order[0]
    ax = controls.index(m)
    rest = controls[:ax] + controls[ax + 1:]
    th0 = np.take(angles, 0, axis=ax)
    th1 = np.take(angles, 1, axis=ax)
    alpha = (th0 + th1) / 2
    beta = (th0 - th1) / 2
    link_gates, between = link(m, target)
    for q in between:
        if q not in rest:
            raise ValidationError(f"link for control {m} needs qubit {q} among the remaining controls")
        sign = 1 - 2 * ((np.arange(2 ** len(rest)) >> (len(rest) - 1 - rest.index(q))) & 1)
        beta = beta * sign.reshape(beta.shape)
    a, term_a = _compile(axis, rest, target, alpha, order[1:], link)
    b, term_b = _compile(axis, rest, target, beta, order[1:], link)
    gates = a[: len(a) - term_a] + link_gates + b[::-1][term_b:] + link_gates
    return gates, len(link_gates)


def ucr_gates(r: UCRotation, order: Sequence[int] | None = None, link: Link = cnot_link) -> list:
    order = default_order(r.controls, r.target) if order is None else list(order)
    if sorted(order) != sorted(r.controls):
        raise ValidationError(f"order {order} is not a permutation of the controls {list(r.controls)}")
    angles = r.angles.reshape((2,) * r.k) if r.k else r.angles
    gates, _ = _compile(r.axis, list(r.controls), r.target, angles, order, link)
    return gates


def ucr_compile(
    r: UCRotation, n: int | None = None, order: Sequence[int] | None = None, link: Link = cnot_link
) -> Circuit:
    """Compile into one-qubit rotations and CNOTs on the target.

    With the plain CNOT link the result has exactly ``2^k`` rotations and
    ``2^k`` CNOTs, and it ends with a CNOT from the first control in
    ``order`` (by default the control farthest from the target).
    """
    n = max(r.qubits) if n is None else n
    return Circuit(n, ucr_gates(r, order, link))


def ucr_mirror(circuit: Circuit) -> Circuit:
    """Reverse the gate order of a compiled rotation.

    Every control pattern sees an even number of target flips, so reversing
    leaves the operator unchanged while moving the terminal CNOT to the front.
    """
    return circuit.reversed()
