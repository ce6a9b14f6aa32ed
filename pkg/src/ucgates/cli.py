"""Command-line front end: ``ucgates {decompose,stateprep,verify,count}``.

Every command prints a ``key=value`` report and exits with 0 when the
report passes, 1 when it does not, and 2 on unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import Circuit, GateCounts, ResourceError, counts, parse, serialize, unitary_of
from .csd import decompose_unitary
from .linalg import ValidationError, dist_up_to_global_phase, format_matrix, num_qubits, parse_matrix, random_unitary
from .nnmap import bound_stateprep, bound_unitary, nn_decompose_unitary, nn_prepare_state
from .stateprep import fidelity, format_state, parse_state, prepare_state, random_state

DEFAULT_TOL = 1e-7
CHAIN_HEADER = "topology: chain"


def table_bounds(n: int) -> tuple[int, int]:
    """Gate-count bounds of the general decomposition (CNOT, one-qubit)."""
    if n == 1:
        return 0, 1
    return 4**n // 2 - 2**n // 2 - 2, 4**n // 2 + 2**n // 2 - n - 1


def stateprep_bounds(n: int) -> tuple[int, int]:
    return 2 * 2**n - 2 * n - 2, 2 * 2**n - n - 2


@dataclass
class RunReport:
    digest: str
    backend: str
    n: int
    counts: GateCounts
    residual: float
    bound_cnot: int
    bound_1q: int
    tol: float

    @property
    def passed(self) -> bool:
        ok_counts = self.counts <= GateCounts(self.bound_cnot, self.bound_1q)
        return bool(self.residual <= self.tol and ok_counts)

    def lines(self) -> list[str]:
        out = [f"# {CHAIN_HEADER}"] if self.backend == "nn" else []
        out += [
            f"digest={self.digest}",
            f"backend={self.backend}",
            f"n={self.n}",
            f"cnot={self.counts.cnot}",
            f"one_qubit={self.counts.one_qubit}",
            f"bound_cnot={self.bound_cnot}",
            f"bound_1q={self.bound_1q}",
            f"residual={self.residual:.3e}",
            f"pass={'true' if self.passed else 'false'}",
        ]
        return out


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def _tolerance(args) -> float:
    if args.tol is not None:
        return args.tol
    env = os.environ.get("UCG_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            raise ValidationError(f"UCG_TOL={env!r} is not a number") from None
    return DEFAULT_TOL


def _emit(report: RunReport, circuit: Circuit | None, out: str | None) -> int:
    if circuit is not None and out:
        header = [CHAIN_HEADER] if report.backend == "nn" else []
        Path(out).write_text(serialize(circuit, header))
    print("\n".join(report.lines()))
    return 0 if report.passed else 1


def cmd_decompose(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.matrix:
        data = Path(args.matrix).read_bytes()
        u = parse_matrix(data.decode())
    else:
        u = random_unitary(2**args.qubits, rng)
        data = format_matrix(u).encode()
    if u.shape[0] != u.shape[1]:
        raise ValidationError(f"matrix must be square, got {u.shape}")
    n = num_qubits(u.shape[0])
    optimize = not args.no_peephole
    if args.nn:
        circ = nn_decompose_unitary(u, optimize=optimize)
        bc = bound_unitary(n)
        b1 = table_bounds(n)[1]
    else:
        circ = decompose_unitary(u, optimize=optimize)
        bc, b1 = table_bounds(n)
    residual = dist_up_to_global_phase(unitary_of(circ), u)
    backend = "nn" if args.nn else "general"
    report = RunReport(_digest(data), backend, n, counts(circ), residual, bc, b1, _tolerance(args))
    return _emit(report, circ, args.out)


def cmd_stateprep(args) -> int:
    rng = np.random.default_rng(args.seed)
    states, blobs = [], []
    for path in (args.state_a, args.state_b):
        if path:
            data = Path(path).read_bytes()
            s = parse_state(data.decode())
        else:
            s = random_state(args.qubits, rng)
            data = format_state(s).encode()
        states.append(s)
        blobs.append(data)
    a, b = states
    if a.n != b.n:
        raise ValidationError(f"states have {a.n} and {b.n} qubits")
    optimize = not args.no_peephole
    if args.nn:
        circ = nn_prepare_state(a, b, optimize=optimize)
        bc, b1 = bound_stateprep(a.n), stateprep_bounds(a.n)[1]
    else:
        circ = prepare_state(a, b, optimize=optimize)
        bc, b1 = stateprep_bounds(a.n)
    residual = max(0.0, 1.0 - fidelity(circ, a, b))
    backend = "nn" if args.nn else "general"
    report = RunReport(_digest(b"".join(blobs)), backend, a.n, counts(circ), residual, bc, b1, _tolerance(args))
    code = _emit(report, circ, args.out)
    print(f"fidelity={1.0 - residual!r}")
    return code


def _read_circuit(path: str) -> tuple[Circuit, bytes, str]:
    data = Path(path).read_bytes()
    text = data.decode()
    backend = "nn" if f"# {CHAIN_HEADER}" in text.splitlines() else "general"
    return parse(text), data, backend


def _bounds_for(backend: str, n: int) -> tuple[int, int]:
    bc, b1 = table_bounds(n)
    if backend == "nn":
        bc = bound_unitary(n)
    return bc, b1


def cmd_verify(args) -> int:
    circ, cdata, backend = _read_circuit(args.circuit)
    mdata = Path(args.matrix).read_bytes()
    u = parse_matrix(mdata.decode())
    if u.shape != (2**circ.n, 2**circ.n):
        raise ValidationError(f"circuit has {circ.n} qubits but the matrix is {u.shape[0]}x{u.shape[1]}")
    residual = dist_up_to_global_phase(unitary_of(circ), u)
    bc, b1 = _bounds_for(backend, circ.n)
    report = RunReport(_digest(cdata + mdata), backend, circ.n, counts(circ), residual, bc, b1, _tolerance(args))
    return _emit(report, None, None)


def cmd_count(args) -> int:
    circ, data, backend = _read_circuit(args.circuit)
    bc, b1 = _bounds_for(backend, circ.n)
    report = RunReport(_digest(data), backend, circ.n, counts(circ), 0.0, bc, b1, math.inf)
    return _emit(report, None, None)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ucgates", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, synth: bool):
        sp.add_argument("--tol", type=float, default=None, help="residual threshold (default 1e-7 or $UCG_TOL)")
        if synth:
            sp.add_argument("--nn", action="store_true", help="nearest-neighbour chain backend")
            sp.add_argument("--no-peephole", action="store_true", help="skip the peephole pass")
            sp.add_argument("--out", help="write the circuit here")
            sp.add_argument("--seed", type=int, default=0, help="seed for built-in random fixtures")
            sp.add_argument("--qubits", type=int, default=3, help="qubit count of random fixtures")

    d = sub.add_parser("decompose", help="synthesize a unitary from a matrix file")
    d.add_argument("matrix", nargs="?", help="matrix file (random fixture if omitted)")
    common(d, True)
    d.set_defaults(func=cmd_decompose)

    s = sub.add_parser("stateprep", help="circuit sending state a to state b")
    s.add_argument("state_a", nargs="?", help="state file (random fixture if omitted)")
    s.add_argument("state_b", nargs="?", help="state file (random fixture if omitted)")
    common(s, True)
    s.set_defaults(func=cmd_stateprep)

    v = sub.add_parser("verify", help="compare a circuit file with a matrix file")
    v.add_argument("circuit")
    v.add_argument("matrix")
    common(v, False)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("count", help="gate counts of a circuit file against the bounds")
    c.add_argument("circuit")
    common(c, False)
    c.set_defaults(func=cmd_count)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
