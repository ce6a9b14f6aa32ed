"""Linear nearest-neighbour backend.

Every CNOT emitted here acts on adjacent qubits of the chain ``1 - 2 - ... - n``.
A long-range CNOT from ``m`` to ``t`` is replaced by a fan-in cascade that
flips ``t`` by the parity of qubits ``m..t-1`` (or ``t+1..m``); the extra
parity is either harmless or corrected by relabelling angles and blocks.
When it pays off, the target is first swapped towards the middle of the
chain and swapped back afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .circuit import CNOT, Circuit, counts, peephole
from .csd import _trivial_kind, as_ucgate, csd_sequence, diagonal_gates, sweep_diagonals
from .linalg import ShapeError, ValidationError, as_matrix, num_qubits, require_unitary
from .mux import UCGate, ucu_decompose
from .stateprep import _coerce, _join, _to_e1
from .ucrot import UCRotation, default_order, ucr_gates


class AdjacencyError(AssertionError):
    pass


@dataclass(frozen=True)
class ChainSpec:
    """Chain of ``n`` qubits with a designated target ``s`` steps from the nearer end."""

    n: int
    s: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("chain needs at least one qubit")
        if not 1 <= self.s <= (self.n + 1) // 2:
            raise ValidationError(f"s must lie in 1..{(self.n + 1) // 2}, got {self.s}")

    @property
    def target(self) -> int:
        return self.s

    @staticmethod
    def adjacent(i: int, j: int) -> bool:
        return abs(i - j) == 1


# -- count formulas ------------------------------------------------------------


def _as_int(x: Fraction) -> int:
    if x.denominator != 1:
        raise ArithmeticError(f"count formula gave a non-integer {x}")
    return int(x)


def bound_ucu(n: int, s: int) -> int:
    """CNOT bound for a uniformly controlled gate on an n-chain, target at distance s."""
    tail = Fraction(1, 3) if n % 2 == 0 else Fraction(5, 3)
    return _as_int(Fraction(5, 6) * 2**n + 2 * n - 6 * s - tail)


def bound_ucr(n: int, s: int) -> int:
    tail = Fraction(4, 3) if n % 2 == 0 else Fraction(5, 3)
    return _as_int(Fraction(5, 6) * 2**n + 3 * n - 6 * s - tail)


def bound_unitary(n: int) -> int:
    if n % 2 == 0:
        tail = Fraction(5, 6) * 2**n - Fraction(5, 3)
    else:
        tail = Fraction(1, 2) * 2**n - Fraction(1, 3)
    return _as_int(Fraction(5, 6) * 4**n - n * 2**n - 2 * n + tail)


def bound_stateprep(n: int) -> int:
    tail = Fraction(14, 3) if n % 2 == 0 else Fraction(10, 3)
    return _as_int(Fraction(10, 3) * 2**n + 2 * n * n - 12 * n + tail)


# -- primitives ------------------------------------------------------------------


def cascade_gates(m: int, t: int) -> list:
    """Adjacent CNOTs flipping ``t`` by the parity of the qubits from ``m`` up to ``t``."""
    if m == t:
        raise ValidationError("cascade needs distinct qubits")
    step = 1 if t > m else -1
    fan = [CNOT(q, q + step) for q in range(m, t - step, step)]
    return fan + [CNOT(t - step, t)] + fan[::-1]


def cascade_nn(m: int, t: int, n: int | None = None) -> Circuit:
    return Circuit(max(m, t) if n is None else n, cascade_gates(m, t))


def nn_link(m: int, t: int) -> tuple[list, list[int]]:
    lo, hi = sorted((m, t))
    return cascade_gates(m, t), list(range(lo + 1, hi))


def swap_gates(a: int, b: int) -> list:
    if abs(a - b) != 1:
        raise ValidationError("swaps are only emitted between neighbours")
    return [CNOT(a, b), CNOT(b, a), CNOT(a, b)]


def check_adjacency(circuit: Circuit) -> None:
    for i, g in enumerate(circuit.gates):
        if isinstance(g, CNOT) and abs(g.control - g.target) != 1:
            raise AdjacencyError(f"gate {i} is CNOT({g.control},{g.target}), not nearest-neighbour")


def is_nearest_neighbor(circuit: Circuit) -> bool:
    try:
        check_adjacency(circuit)
    except AdjacencyError:
        return False
    return True


# -- cost model used for swap placement --------------------------------------------


@lru_cache(maxsize=None)
def _ucu_cost(controls: tuple, t: int) -> int:
    if not controls:
        return 0
    m = default_order(controls, t)[0]
    rest = tuple(c for c in controls if c != m)
    return 2 * _ucu_cost(rest, t) + 2 * abs(m - t) - 1


@lru_cache(maxsize=None)
def _ucr_cost(controls: tuple, t: int) -> tuple[int, int]:
    if not controls:
        return 0, 0
    m = default_order(controls, t)[0]
    rest = tuple(c for c in controls if c != m)
    full, term = _ucr_cost(rest, t)
    link = 2 * abs(m - t) - 1
    return 2 * (full - term) + 2 * link, link


def _interval(qubits) -> tuple[int, int]:
    lo, hi = min(qubits), max(qubits)
    if set(range(lo, hi + 1)) != set(qubits):
        raise ValidationError(f"qubits {sorted(qubits)} do not form a contiguous sub-chain")
    return lo, hi


def _placement(qubits, t: int, cost) -> int:
    lo, hi = _interval(qubits)
    best = None
    for p in range(lo, hi + 1):
        others = tuple(q for q in range(lo, hi + 1) if q != p)
        c = cost(others, p) + 6 * abs(p - t)
        key = (c, abs(p - t), p)
        if best is None or key < best:
            best = key
    return best[2]


def _move(t: int, p: int) -> tuple[list, dict[int, int]]:
    """Swaps carrying qubit ``t`` to position ``p``, and the logical to physical map."""
    step = 1 if p > t else -1
    gates = []
    for a in range(t, p, step):
        gates.extend(swap_gates(a, a + step))
    phys = {}
    lo, hi = sorted((t, p))
    for q in range(lo, hi + 1):
        phys[q] = q - step
    phys[t] = p
    return gates, phys


def _relabel_rot(r: UCRotation, mapping) -> UCRotation:
    m = lambda q: mapping.get(q, q)  # noqa: E731
    return UCRotation(r.axis, tuple(m(c) for c in r.controls), m(r.target), r.angles)


# -- compilers -------------------------------------------------------------------


def nn_ucu(g: UCGate, n: int | None = None, place: bool = True) -> tuple[Circuit, list[UCRotation]]:
    """Nearest-neighbour ``(ftilde, delta)`` with ``embed(g) = Delta * unitary(ftilde)``.

    ``g`` must act on a contiguous sub-chain. The returned diagonal is the
    one belonging to this circuit and generally differs from the diagonal
    of the unrestricted decomposition.
    """
    n = max(g.qubits) if n is None else n
    t = g.target
    p = _placement(g.qubits, t, _ucu_cost) if place else t
    pre, phys = _move(t, p)
    back = {v: k for k, v in phys.items()}
    m = lambda q: phys.get(q, q)  # noqa: E731
    moved = UCGate(tuple(m(c) for c in g.controls), p, g.blocks)
    ftilde, delta = ucu_decompose(moved, default_order(moved.controls, p), n=n, link=nn_link)
    circ = Circuit(n, pre + list(ftilde.gates) + pre[::-1])
    return circ, [_relabel_rot(r, back) for r in delta]


def nn_ucr_gates(r: UCRotation, place: bool = True) -> list:
    t = r.target
    p = _placement(r.qubits, t, lambda c, q: _ucr_cost(c, q)[0]) if place else t
    pre, phys = _move(t, p)
    moved = _relabel_rot(r, phys)
    return pre + ucr_gates(moved, default_order(moved.controls, p), nn_link) + pre[::-1]


def nn_ucr(r: UCRotation, n: int | None = None, place: bool = True) -> Circuit:
    n = max(r.qubits) if n is None else n
    return Circuit(n, nn_ucr_gates(r, place))


def ends_order(n: int) -> list[int]:
    """``1, n, 2, n-1, ...``: chain ends first, centre last."""
    lo, hi, out = 1, n, []
    while lo <= hi:
        out.append(lo)
        lo += 1
        if lo <= hi:
            out.append(hi)
            hi -= 1
    return out


def nn_decompose_unitary(u, optimize: bool = True) -> Circuit:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ShapeError(f"expected a square matrix, got {u.shape}")
    n = num_qubits(u.shape[0])
    u = require_unitary(u, what="input")
    seq = csd_sequence(u, ends_order(n)[: n - 1])
    flips = [None]
    if optimize and n >= 2 and _trivial_kind(as_ucgate(seq[-1])) is None:
        # fold a neighbouring CNOT into the last element, as in the general backend
        t = as_ucgate(seq[-1]).target
        flips += [c for c in (t - 1, t + 1) if 1 <= c <= n]
    best = None
    for c in flips:
        gates, final = sweep_diagonals(seq, n, ucu=lambda g, n: nn_ucu(g, n), last_flip=c)
        gates.extend(diagonal_gates(final, ucr=nn_ucr_gates))
        if c is not None:
            gates.append(CNOT(c, t))
        circ = Circuit(n, gates)
        if optimize:
            circ = peephole(circ)
        if best is None or counts(circ).cnot < counts(best).cnot:
            best = circ
    check_adjacency(best)
    return best


def _nn_level(g: UCGate, n: int) -> Circuit:
    return nn_ucu(g, n)[0]


def nn_prepare_to_e1(a) -> Circuit:
    return _to_e1(_coerce(a), _nn_level)


def nn_prepare_state(a, b, optimize: bool = True) -> Circuit:
    a, b = _coerce(a), _coerce(b)
    if a.n != b.n:
        raise ShapeError(f"states have {a.n} and {b.n} qubits")
    circ = _join(nn_prepare_to_e1(a), nn_prepare_to_e1(b), optimize)
    check_adjacency(circ)
    return circ
