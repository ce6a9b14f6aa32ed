"""Circuit intermediate representation and dense simulation.

Qubits are numbered ``1..n``; qubit 1 is the most significant bit of a
computational-basis index. Gate lists are in application order, so the
operator of ``[g1, g2]`` is ``g2 @ g1``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .linalg import POLICY, ShapeError, ValidationError, arg, unitarity_defect

MAX_DENSE_QUBITS = 12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation(axis: str, theta: float) -> np.ndarray:
    if axis == "z":
        return rz(theta)
    if axis == "y":
        return ry(theta)
    raise ValueError(f"unsupported rotation axis {axis!r}")


class ResourceError(RuntimeError):
    """The requested dense computation is too large."""


class CircuitParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class OneQubit:
    target: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ShapeError(f"one-qubit gate needs a 2x2 matrix, got {m.shape}")
        if unitarity_defect(m) > POLICY.exact:
            raise ValidationError("one-qubit gate matrix is not unitary")
        object.__setattr__(self, "matrix", m)

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,)

    def __eq__(self, other):
        return (
            isinstance(other, OneQubit)
            and other.target == self.target
            and np.array_equal(other.matrix, self.matrix)
        )

    def __repr__(self):
        return f"OneQubit({self.target}, {self.matrix.tolist()})"


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValidationError("CNOT control and target must differ")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.control, self.target)


@dataclass(frozen=True)
class GlobalPhase:
    angle: float

    @property
    def qubits(self) -> tuple[int, ...]:
        return ()


Gate = Union[OneQubit, CNOT, GlobalPhase]


@dataclass(frozen=True)
class GateCounts:
    cnot: int = 0
    one_qubit: int = 0

    def __le__(self, other: "GateCounts") -> bool:
        return self.cnot <= other.cnot and self.one_qubit <= other.one_qubit

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(self.cnot + other.cnot, self.one_qubit + other.one_qubit)


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n < 1:
            raise ValidationError("a circuit needs at least one qubit")
        for g in self.gates:
            for q in g.qubits:
                if not 1 <= q <= self.n:
                    raise ValidationError(f"{g!r} touches qubit {q} outside 1..{self.n}")

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise ShapeError(f"cannot concatenate {self.n}- and {other.n}-qubit circuits")
        return Circuit(self.n, self.gates + other.gates)

    def __len__(self):
        return len(self.gates)

    def inverse(self) -> "Circuit":
        out = []
        for g in reversed(self.gates):
            if isinstance(g, OneQubit):
                out.append(OneQubit(g.target, g.matrix.conj().T))
            elif isinstance(g, GlobalPhase):
                out.append(GlobalPhase(-g.angle))
            else:
                out.append(g)
        return Circuit(self.n, out)

    def reversed(self) -> "Circuit":
        """Gate order reversed without adjoining (used for mirroring)."""
        return Circuit(self.n, self.gates[::-1])

    def relabel(self, mapping: dict[int, int], n: int | None = None) -> "Circuit":
        out = []
        for g in self.gates:
            if isinstance(g, OneQubit):
                out.append(OneQubit(mapping[g.target], g.matrix))
            elif isinstance(g, CNOT):
                out.append(CNOT(mapping[g.control], mapping[g.target]))
            else:
                out.append(g)
        return Circuit(self.n if n is None else n, out)

    def global_phase(self) -> float:
        return sum(g.angle for g in self.gates if isinstance(g, GlobalPhase))


# -- simulation --------------------------------------------------------------


def _apply_gates(psi: np.ndarray, gates: Iterable[Gate], n: int) -> np.ndarray:
    """Apply gates to a tensor of shape ``(2,)*n + rest``."""
    for g in gates:
        if isinstance(g, OneQubit):
            ax = g.target - 1
            psi = np.moveaxis(np.tensordot(g.matrix, psi, axes=([1], [ax])), 0, ax)
        elif isinstance(g, CNOT):
            c, t = g.control - 1, g.target - 1
            idx1 = [slice(None)] * psi.ndim
            idx1[c] = 1
            sub = psi[tuple(idx1)]
            # target axis index shifts down by one once the control axis is fixed
            tax = t if t < c else t - 1
            psi = psi.copy()
            psi[tuple(idx1)] = np.flip(sub, axis=tax)
        elif isinstance(g, GlobalPhase):
            psi = psi * np.exp(1j * g.angle)
        else:  # pragma: no cover
            raise TypeError(f"unknown gate {g!r}")
    return psi


def unitary_of(circuit: Circuit) -> np.ndarray:
    n = circuit.n
    if n > MAX_DENSE_QUBITS:
        raise ResourceError(f"dense unitary of {n} qubits exceeds the {MAX_DENSE_QUBITS}-qubit limit")
    dim = 2**n
    psi = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    return _apply_gates(psi, circuit.gates, n).reshape(dim, dim)


def apply(circuit: Circuit, state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape != (2**circuit.n,):
        raise ShapeError(f"state of shape {state.shape} does not match {circuit.n} qubits")
    psi = state.reshape((2,) * circuit.n)
    return _apply_gates(psi, circuit.gates, circuit.n).reshape(-1)


def counts(circuit: Circuit) -> GateCounts:
    cx = sum(isinstance(g, CNOT) for g in circuit.gates)
    oq = sum(isinstance(g, OneQubit) for g in circuit.gates)
    return GateCounts(cx, oq)


# -- peephole ----------------------------------------------------------------


def _is_diagonal(m: np.ndarray, tol: float = 1e-12) -> bool:
    return abs(m[0, 1]) <= tol and abs(m[1, 0]) <= tol


def _phase_of_identity(m: np.ndarray, tol: float = 1e-12) -> float | None:
    """Return ``phi`` if ``m`` is within ``tol`` of ``e^{i phi} I``."""
    if not _is_diagonal(m, tol):
        return None
    phi = arg(m[0, 0] + m[1, 1])
    if abs(m[0, 0] - np.exp(1j * phi)) <= tol and abs(m[1, 1] - np.exp(1j * phi)) <= tol:
        return phi
    return None


def _cnots_commute(a: CNOT, b: CNOT) -> bool:
    # CNOTs commute unless one's target is the other's control
    return a.target != b.control and a.control != b.target


class _Peephole:
    max_walk = 64

    def __init__(self, circuit: Circuit):
        self.n = circuit.n
        self.slots: list[Gate | None] = []
        self.on_qubit: dict[int, list[int]] = {q: [] for q in range(1, self.n + 1)}
        self.phase = 0.0
        self.saw_phase = False
        self.changed = False

    def _history(self, qubits):
        """Indices of live gates on ``qubits``, newest first."""
        lists = [reversed(self.on_qubit[q]) for q in qubits]
        seen = None
        for i in heapq.merge(*lists, key=lambda x: -x):
            if i == seen:
                continue
            seen = i
            if self.slots[i] is not None:
                yield i

    def _append(self, g: Gate):
        self.slots.append(g)
        for q in g.qubits:
            self.on_qubit[q].append(len(self.slots) - 1)

    def _kill(self, i: int):
        self.slots[i] = None
        self.changed = True

    def push_one_qubit(self, g: OneQubit):
        phi = _phase_of_identity(g.matrix)
        if phi is not None:
            self.phase += phi
            self.saw_phase = True
            self.changed = True
            return
        diag = _is_diagonal(g.matrix)
        for steps, i in enumerate(self._history([g.target])):
            if steps >= self.max_walk:
                break
            prev = self.slots[i]
            if isinstance(prev, OneQubit):
                merged = g.matrix @ prev.matrix
                self.changed = True
                phi = _phase_of_identity(merged)
                if phi is not None:
                    self.slots[i] = None
                    self.phase += phi
                    self.saw_phase = True
                else:
                    self.slots[i] = OneQubit(g.target, merged)
                return
            if diag and isinstance(prev, CNOT) and prev.control == g.target:
                continue
            break
        self._append(g)

    def push_cnot(self, g: CNOT):
        for steps, i in enumerate(self._history([g.control, g.target])):
            if steps >= self.max_walk:
                break
            prev = self.slots[i]
            if prev == g:
                self._kill(i)
                return
            if isinstance(prev, CNOT) and _cnots_commute(prev, g):
                continue
            if isinstance(prev, OneQubit) and prev.target == g.control and _is_diagonal(prev.matrix):
                continue
            break
        self._append(g)

    def run(self, gates) -> list[Gate]:
        for g in gates:
            if isinstance(g, GlobalPhase):
                self.phase += g.angle
                self.saw_phase = True
            elif isinstance(g, OneQubit):
                self.push_one_qubit(g)
            else:
                self.push_cnot(g)
        out = [g for g in self.slots if g is not None]
        if self.saw_phase:
            out.append(GlobalPhase(math.remainder(self.phase, 2 * math.pi)))
        return out


def peephole(circuit: Circuit) -> Circuit:
    """Merge and cancel adjacent gates until nothing changes.

    One-qubit gates on the same wire are multiplied together, diagonal
    one-qubit gates slide backwards past CNOT controls, equal CNOTs
    cancel through commuting neighbours, and gates equal to a phase times
    the identity are dropped with the phase kept as a ``GlobalPhase``.
    """
    gates = list(circuit.gates)
    while True:
        p = _Peephole(circuit)
        new = p.run(gates)
        if not p.changed:
            return Circuit(circuit.n, new)
        gates = new


# -- text formats --------------------------------------------------------------


def serialize(circuit: Circuit, header_comments: Iterable[str] = ()) -> str:
    lines = [f"# {c}" for c in header_comments]
    lines.append(f"QUBITS {circuit.n}")
    for g in circuit.gates:
        if isinstance(g, OneQubit):
            vals = " ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in g.matrix.reshape(-1))
            lines.append(f"U1 {g.target} {vals}")
        elif isinstance(g, CNOT):
            lines.append(f"CX {g.control} {g.target}")
        else:
            lines.append(f"PHASE {float(g.angle)!r}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> Circuit:
    n = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        op = tok[0].upper()
        try:
            if op == "QUBITS":
                if n is not None:
                    raise CircuitParseError(lineno, "duplicate QUBITS header")
                if len(tok) != 2:
                    raise CircuitParseError(lineno, "expected 'QUBITS <n>'")
                n = int(tok[1])
                continue
            if n is None:
                raise CircuitParseError(lineno, "gate before QUBITS header")
            if op == "U1":
                if len(tok) != 10:
                    raise CircuitParseError(lineno, "U1 needs a target and 8 numbers")
                v = [float(t) for t in tok[2:]]
                m = np.array(v[0::2]) + 1j * np.array(v[1::2])
                gates.append(OneQubit(int(tok[1]), m.reshape(2, 2)))
            elif op == "CX":
                if len(tok) != 3:
                    raise CircuitParseError(lineno, "expected 'CX <control> <target>'")
                gates.append(CNOT(int(tok[1]), int(tok[2])))
            elif op == "PHASE":
                if len(tok) != 2:
                    raise CircuitParseError(lineno, "expected 'PHASE <angle>'")
                gates.append(GlobalPhase(float(tok[1])))
            else:
                raise CircuitParseError(lineno, f"unknown gate {tok[0]!r}")
        except CircuitParseError:
            raise
        except (ValueError, ShapeError) as exc:
            raise CircuitParseError(lineno, str(exc)) from None
    if n is None:
        raise CircuitParseError(0, "missing QUBITS header")
    try:
        return Circuit(n, gates)
    except ValidationError as exc:
        raise CircuitParseError(0, str(exc)) from None


def read_circuit(path: str | Path) -> Circuit:
    return parse(Path(path).read_text())


def write_circuit(path: str | Path, circuit: Circuit, header_comments: Iterable[str] = ()) -> None:
    Path(path).write_text(serialize(circuit, header_comments))


def u3_params(m: np.ndarray) -> tuple[float, float, float, float]:
    """Return ``(theta, phi, lam, alpha)`` with ``m = e^{i alpha} U3(theta, phi, lam)``."""
    theta = 2 * math.atan2(abs(m[1, 0]), abs(m[0, 0]))
    if abs(m[0, 0]) > 1e-12:
        alpha = arg(m[0, 0])
        if abs(m[1, 0]) > 1e-12:
            phi = arg(m[1, 0]) - alpha
            lam = arg(-m[0, 1]) - alpha
        else:
            phi = 0.0
            lam = arg(m[1, 1]) - alpha
    else:
        # theta = pi: only phi + lam is fixed
        lam = 0.0
        alpha = arg(-m[0, 1])
        phi = arg(m[1, 0]) - alpha
    return theta, phi, lam, alpha


def to_qasm(circuit: Circuit) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n}];"]
    phase = 0.0
    for g in circuit.gates:
        if isinstance(g, OneQubit):
            theta, phi, lam, alpha = u3_params(g.matrix)
            phase += alpha
            lines.append(f"u3({theta!r},{phi!r},{lam!r}) q[{g.target - 1}];")
        elif isinstance(g, CNOT):
            lines.append(f"cx q[{g.control - 1}],q[{g.target - 1}];")
        else:
            phase += g.angle
    lines.append(f"// global phase: {math.remainder(phase, 2 * math.pi)!r}")
    return "\n".join(lines) + "\n"


def embed_controlled(controls, target: int, blocks, n: int) -> np.ndarray:
    """Dense matrix of a gate applying ``blocks[p]`` to ``target`` when the
    control bits (read in ``controls`` order, first = most significant) form
    pattern ``p``."""
    controls = list(controls)
    blocks = np.asarray(blocks, dtype=complex).reshape(-1, 2, 2)
    if blocks.shape[0] != 2 ** len(controls):
        raise ShapeError(f"{len(controls)} controls need {2 ** len(controls)} blocks, got {blocks.shape[0]}")
    qubits = controls + [target]
    if len(set(qubits)) != len(qubits) or not all(1 <= q <= n for q in qubits):
        raise ValidationError(f"invalid qubits {qubits} for n={n}")
    dim = 2**n
    idx = np.arange(dim)
    pattern = np.zeros(dim, dtype=np.int64)
    for c in controls:
        pattern = (pattern << 1) | ((idx >> (n - c)) & 1)
    tshift = n - target
    tbit = (idx >> tshift) & 1
    u = np.zeros((dim, dim), dtype=complex)
    for out_bit in (0, 1):
        rows = (idx & ~(1 << tshift)) | (out_bit << tshift)
        u[rows, idx] = blocks[pattern, out_bit, tbit]
    return u
