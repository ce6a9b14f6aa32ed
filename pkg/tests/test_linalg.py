import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import haar, kron_index, matmul_loops
from ucgates import linalg as la

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1, -1]).astype(complex)


def test_matmul_identity_and_involution():
    assert_allclose(la.matmul(np.eye(2), np.eye(2)), np.eye(2))
    assert_allclose(la.matmul(SX, SX), np.eye(2))


def test_matmul_matches_triple_loop(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert_allclose(la.matmul(a, b), matmul_loops(a, b), atol=1e-13)


def test_matmul_shape_error():
    with pytest.raises(la.ShapeError):
        la.matmul(np.eye(2), np.eye(3))


def test_kron_cases(rng):
    assert_allclose(la.kron(np.eye(2), SZ), np.diag([1, -1, 1, -1]))
    assert_allclose(la.kron(SZ, np.eye(2)), np.diag([1, 1, -1, -1]))
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    assert_allclose(la.kron(a, b), kron_index(a, b), atol=1e-14)


def test_eig2_diagonal_inputs():
    e = la.eig2_unitary(SZ)
    assert sorted(e.values.real) == [-1, 1]
    assert_allclose(np.abs(e.vectors), np.eye(2))
    e = la.eig2_unitary(np.diag([1j, -1j]))
    assert_allclose(sorted(e.values, key=lambda z: z.imag), [-1j, 1j])


def test_eig2_degenerate_returns_identity():
    e = la.eig2_unitary(np.exp(0.3j) * np.eye(2))
    assert_allclose(e.vectors, np.eye(2))


def test_eig2_reconstruction(rng):
    for _ in range(1000):
        x = haar(2, rng)
        e = la.eig2_unitary(x)
        rec = e.vectors @ np.diag(e.values) @ e.vectors.conj().T
        assert np.linalg.norm(rec - x) <= 1e-10
        assert la.is_unitary(e.vectors)
        assert abs(np.linalg.det(e.vectors) - 1) < 1e-12


def test_eig2_demux_instance_is_antipodal(rng):
    from ucgates.mux import demultiplex_step

    a, b = haar(2, rng), haar(2, rng)
    res = demultiplex_step(a, b)
    r = np.exp(1j * np.array(res.r))
    x = a @ b.conj().T
    vals = la.eig2_unitary(r[:, None] * x * r[None, :]).values
    assert_allclose(sorted(vals, key=lambda z: z.imag), [-1j, 1j], atol=1e-12)


def test_eig2_rejects_non_unitary():
    with pytest.raises(la.ValidationError):
        la.eig2_unitary(np.array([[1, 1], [0, 1]]))


def test_svd_cases(rng):
    _, s, _ = la.svd(np.eye(4))
    assert_allclose(s, np.ones(4))
    _, s, _ = la.svd(np.diag([3.0, 2.0, 1.0]))
    assert_allclose(s, [3, 2, 1])
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    u, s, v = la.svd(a)
    assert np.linalg.norm(u @ np.diag(s) @ v.conj().T - a) <= 1e-9
    assert la.unitarity_defect(u) <= 1e-9 and la.unitarity_defect(v) <= 1e-9
    assert np.all(s >= 0) and np.all(np.diff(s) <= 0)
    assert s.max() <= np.linalg.norm(a, 2) + 1e-9


def test_dist_up_to_global_phase():
    assert la.dist_up_to_global_phase(np.eye(2), np.exp(1j * np.pi / 7) * np.eye(2)) <= 1e-14
    assert la.dist_up_to_global_phase(SX, SX) == 0
    # tr(sx^dagger I) = 0, so every phase gives ||I - e^{i t} sx||_F = 2
    assert la.dist_up_to_global_phase(np.eye(2), SX) == pytest.approx(2.0)


def test_permute_qubits_swaps_kron_factors(rng):
    a, b, c = haar(2, rng), haar(2, rng), haar(2, rng)
    u = np.kron(np.kron(a, b), c)
    assert_allclose(la.permute_qubits(u, [3, 1, 2]), np.kron(np.kron(c, a), b), atol=1e-14)


def test_num_qubits():
    assert la.num_qubits(8) == 3
    with pytest.raises(la.ShapeError):
        la.num_qubits(6)


def test_matrix_text_round_trip(rng, tmp_path):
    u = haar(4, rng)
    path = tmp_path / "u.txt"
    la.write_matrix(path, u)
    assert np.array_equal(la.read_matrix(path), u)


def test_matrix_parse_errors_carry_line_numbers():
    with pytest.raises(ValueError, match="line 3"):
        la.parse_matrix("# header\n2 1\n1 0 oops\n0 0\n")
    with pytest.raises(ValueError, match="expected 2 matrix rows"):
        la.parse_matrix("2 1\n1 0\n")
