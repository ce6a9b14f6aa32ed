"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. The helpers here add the
shape and unitarity checks the synthesis code relies on, a closed-form
2x2 unitary eigensolver and the plain-text matrix format used by the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


class ValidationError(ValueError):
    """An input violates a documented invariant (e.g. it is not unitary)."""


class NumericError(ArithmeticError):
    """A numerical routine failed to produce a usable result."""


@dataclass
class NumericPolicy:
    exact: float = 1e-10  # exactness checks
    iterative: float = 1e-9  # results of iterative numerics
    degenerate: float = 1e-12  # eigenvalue coincidence in eig2_unitary
    zero: float = 1e-14  # magnitudes treated as exactly zero


POLICY = NumericPolicy()


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    return m


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a) -> np.ndarray:
    return np.conj(as_matrix(a)).T


def unitarity_defect(a) -> float:
    """Frobenius norm of ``A^dagger A - I``."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return float("inf")
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])))


def is_unitary(a, tol: float | None = None) -> bool:
    return unitarity_defect(a) <= (POLICY.exact if tol is None else tol)


def require_unitary(a, tol: float | None = None, what: str = "matrix") -> np.ndarray:
    a = as_matrix(a)
    defect = unitarity_defect(a)
    limit = POLICY.exact if tol is None else tol
    if defect > limit:
        raise ValidationError(
            f"{what} is not unitary: ||A^dagger A - I||_F = {defect:.3e} > {limit:.1e}"
        )
    return a


def arg(z) -> float:
    """Complex argument with ``arg(0) = 0``."""
    if abs(z) == 0:
        return 0.0
    return float(np.angle(z))


@dataclass(frozen=True)
class Eig2:
    """Eigendecomposition of a 2x2 unitary, ``X = V diag(values) V^dagger``.

    ``vectors`` has unit determinant; the phase removed from its second
    column to achieve that is reported in ``phase``.
    """

    values: np.ndarray
    vectors: np.ndarray
    phase: float


def _null_vector(m: np.ndarray) -> np.ndarray:
    # use the row of larger norm to avoid cancellation
    r0, r1 = m[0], m[1]
    p, q = (r0 if np.linalg.norm(r0) >= np.linalg.norm(r1) else r1)
    v = np.array([-q, p], dtype=complex)
    return v / np.linalg.norm(v)


def eig2_unitary(x) -> Eig2:
    x = require_unitary(x, what="eig2_unitary input")
    if x.shape != (2, 2):
        raise ShapeError(f"eig2_unitary needs a 2x2 matrix, got {x.shape}")
    tr = x[0, 0] + x[1, 1]
    det = x[0, 0] * x[1, 1] - x[0, 1] * x[1, 0]
    disc = np.sqrt(tr * tr / 4 - det + 0j)
    lam = np.array([tr / 2 + disc, tr / 2 - disc])
    if abs(lam[0] - lam[1]) <= POLICY.degenerate or (
        abs(x[0, 1]) <= POLICY.zero and abs(x[1, 0]) <= POLICY.zero
    ):
        # diagonal input: the standard basis already diagonalizes it
        d = np.array([x[0, 0], x[1, 1]])
        return Eig2(values=d, vectors=np.eye(2, dtype=complex), phase=0.0)
    v0 = _null_vector(x - lam[0] * np.eye(2))
    v1 = _null_vector(x - lam[1] * np.eye(2))
    vecs = np.column_stack([v0, v1])
    phase = arg(np.linalg.det(vecs))
    vecs[:, 1] *= np.exp(-1j * phase)
    return Eig2(values=lam, vectors=vecs, phase=phase)


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(U, sigma, V)`` with ``A = U diag(sigma) V^dagger``, sigma descending."""
    a = as_matrix(a)
    try:
        u, s, vh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericError(f"SVD did not converge for a {a.shape} matrix: {exc}") from exc
    return u, s, vh.conj().T


def dist_up_to_global_phase(a, b) -> float:
    """``min_theta ||A - e^{i theta} B||_F``."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    overlap = np.vdot(b, a)  # tr(B^dagger A)
    if abs(overlap) == 0:
        return float(np.linalg.norm(a - b))
    return float(np.linalg.norm(a - np.exp(1j * np.angle(overlap)) * b))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def permute_qubits(u: np.ndarray, order: list[int]) -> np.ndarray:
    """Conjugate ``u`` by a qubit permutation.

    Qubit ``order[p]`` (1-based) of ``u`` becomes qubit ``p + 1`` of the result.
    """
    n = len(order)
    axes = [q - 1 for q in order]
    t = u.reshape((2,) * (2 * n))
    t = t.transpose(axes + [n + a for a in axes])
    return t.reshape(2**n, 2**n)


def num_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ShapeError(f"dimension {dim} is not a power of two")
    return n


# -- text format -----------------------------------------------------------


def format_matrix(a) -> str:
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise ValueError("empty matrix file")
    lineno, tok = rows[0]
    try:
        r, c = (int(t) for t in tok)
    except ValueError:
        raise ValueError(f"line {lineno}: expected 'rows cols'") from None
    if len(rows) - 1 != r:
        raise ValueError(f"expected {r} matrix rows, found {len(rows) - 1}")
    out = np.empty((r, c), dtype=complex)
    for i, (lineno, tok) in enumerate(rows[1:]):
        if len(tok) != 2 * c:
            raise ValueError(f"line {lineno}: expected {2 * c} numbers, found {len(tok)}")
        try:
            vals = [float(t) for t in tok]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        out[i] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return out


def read_matrix(path: str | Path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def write_matrix(path: str | Path, a) -> None:
    Path(path).write_text(format_matrix(a))
