"""State preparation with uniformly controlled gates.

Each level removes one qubit from the support of the state: a uniformly
controlled ``Ry * Rz`` on qubit ``i`` folds every amplitude pair that
differs only in bit ``i`` into its ``0`` partner. The gate only has to be
correct up to a diagonal, since a diagonal applied to a state whose bit
``i`` is already zero merely rephases the surviving amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .circuit import Circuit, GlobalPhase, apply, peephole, ry, rz
from .linalg import POLICY, ShapeError, ValidationError, num_qubits
from .mux import UCGate, ucu_decompose
from .ucrot import cnot_link


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 2**self.n:
            raise ShapeError(f"{self.n} qubits need {2 ** self.n} amplitudes, got {amps.shape[0]}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > 1e-12:
            raise ValidationError(f"state is not normalized: norm = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def of(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        return cls(num_qubits(amps.shape[0]), amps)

    @classmethod
    def basis(cls, n: int, index: int = 0) -> "StateVector":
        amps = np.zeros(2**n, dtype=complex)
        amps[index] = 1
        return cls(n, amps)


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    z = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return StateVector(n, z / np.linalg.norm(z))


def nullify_angles(pairs):
    """Angles folding each ``(alpha, beta)`` into ``(e^{i psi} r, 0)``.

    Applying ``Rz(theta_z)`` then ``Ry(theta_y)`` does the folding. Returns
    arrays ``(theta_z, theta_y, psi, r)``.
    """
    pairs = np.asarray(pairs, dtype=complex).reshape(-1, 2)
    alpha, beta = pairs[:, 0], pairs[:, 1]
    ma, mb = np.abs(alpha), np.abs(beta)
    pa = np.where(ma > 0, np.angle(alpha), 0.0)
    pb = np.where(mb > 0, np.angle(beta), 0.0)
    tz = pa - pb
    ty = -2 * np.arctan2(mb, ma)
    psi = (pa + pb) / 2
    zero = (ma < POLICY.zero) & (mb < POLICY.zero)
    tz = np.where(zero, 0.0, tz)
    ty = np.where(zero, 0.0, ty)
    return tz, ty, psi, np.hypot(ma, mb)


def _level_gate(psi: np.ndarray, i: int, n: int) -> UCGate:
    """Gate folding qubit ``i`` of a state supported on qubits ``1..i``."""
    head = psi.reshape(2**i, 2 ** (n - i))[:, 0]
    tz, ty, _, _ = nullify_angles(head.reshape(-1, 2))
    blocks = np.array([ry(b) @ rz(a) for a, b in zip(tz, ty)])
    return UCGate(tuple(range(1, i)), i, blocks)


def _to_e1(a: StateVector, decompose: Callable[[UCGate, int], Circuit]) -> Circuit:
    n = a.n
    psi = a.amplitudes
    gates: list = []
    for i in range(n, 0, -1):
        g = _level_gate(psi, i, n)
        if np.array_equal(g.blocks, np.broadcast_to(np.eye(2), g.blocks.shape)):
            continue  # every pair is already folded
        level = decompose(g, n)
        psi = apply(level, psi)
        gates.extend(g for g in level.gates if not isinstance(g, GlobalPhase))
    return Circuit(n, gates)


def _general_level(g: UCGate, n: int) -> Circuit:
    ftilde, _ = ucu_decompose(g, n=n, link=cnot_link)
    return ftilde


def prepare_to_e1(a: StateVector) -> Circuit:
    """Circuit sending ``|a>`` to ``|0...0>`` up to a global phase."""
    return _to_e1(_coerce(a), _general_level)


def _join(a: Circuit, b: Circuit, optimize: bool) -> Circuit:
    circ = a + b.inverse()
    return peephole(circ) if optimize else circ


def prepare_state(a: StateVector, b: StateVector, optimize: bool = True) -> Circuit:
    """Circuit sending ``|a>`` to ``|b>`` up to a global phase."""
    a, b = _coerce(a), _coerce(b)
    if a.n != b.n:
        raise ShapeError(f"states have {a.n} and {b.n} qubits")
    return _join(prepare_to_e1(a), prepare_to_e1(b), optimize)


def fidelity(circuit: Circuit, a: StateVector, b: StateVector) -> float:
    out = apply(circuit, _coerce(a).amplitudes)
    return float(abs(np.vdot(_coerce(b).amplitudes, out)))


def _coerce(a) -> StateVector:
    return a if isinstance(a, StateVector) else StateVector.of(a)


def format_state(a: StateVector) -> str:
    lines = [str(a.n)] + [f"{float(z.real)!r} {float(z.imag)!r}" for z in a.amplitudes]
    return "\n".join(lines) + "\n"


def parse_state(text: str) -> StateVector:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise ValueError("empty state file")
    lineno, tok = rows[0]
    if len(tok) != 1:
        raise ValueError(f"line {lineno}: expected the qubit count")
    try:
        n = int(tok[0])
    except ValueError:
        raise ValueError(f"line {lineno}: expected an integer qubit count") from None
    if n < 1 or len(rows) - 1 != 2**n:
        raise ValueError(f"expected {2 ** n if n >= 1 else 'a positive count of'} amplitude lines, found {len(rows) - 1}")
    amps = np.empty(2**n, dtype=complex)
    for j, (lineno, tok) in enumerate(rows[1:]):
        if len(tok) != 2:
            raise ValueError(f"line {lineno}: expected 're im'")
        try:
            amps[j] = complex(float(tok[0]), float(tok[1]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return StateVector(n, amps)


def read_state(path: str | Path) -> StateVector:
    return parse_state(Path(path).read_text())


def write_state(path: str | Path, a: StateVector) -> None:
    Path(path).write_text(format_state(a))
