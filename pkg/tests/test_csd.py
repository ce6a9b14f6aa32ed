import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import cossin

from oracles import circuit_unitary, haar, phase_dist, ry
from ucgates.circuit import CNOT, GateCounts, OneQubit, ResourceError, counts, unitary_of
from ucgates.csd import as_ucgate, cs_decompose, csd_sequence, csd_step, decompose_unitary, ruler
from ucgates.linalg import ValidationError, dist_up_to_global_phase, permute_qubits
from ucgates.mux import UCGate
from ucgates.ucrot import UCRotation


def test_ruler_values():
    assert ruler(1) == 1
    assert ruler(8) == 4
    assert [ruler(i) for i in range(1, 9)] == [1, 2, 1, 3, 1, 2, 1, 4]
    with pytest.raises(ValueError):
        ruler(0)


def test_cs_decompose_random(rng):
    for dim in (2, 4, 8, 16):
        u = haar(dim, rng)
        f = cs_decompose(u)
        assert np.linalg.norm(f.reconstruct() - u) <= 1e-8
        assert np.all(f.c >= 0) and np.all(f.s >= 0)
        assert_allclose(f.c**2 + f.s**2, 1, atol=1e-12)
        for m in (f.L1, f.L2, f.R1, f.R2):
            assert_allclose(m @ m.conj().T, np.eye(dim // 2), atol=1e-9)


def test_cs_angles_match_scipy(rng):
    u = haar(8, rng)
    f = cs_decompose(u)
    _, cs, _ = cossin(u, p=4, q=4)
    # scipy's middle factor has the cosines on the leading diagonal
    ref = np.sort(np.clip(np.abs(np.diagonal(cs)[:4]), 0, 1))
    assert_allclose(np.sort(f.c), ref, atol=1e-10)


def test_csd_step_identity():
    left, rot, right = csd_step(np.eye(8), 0)
    assert_allclose(rot.angles, 0, atol=1e-12)
    assert_allclose(left @ right, np.eye(8), atol=1e-12)
    assert dist_up_to_global_phase(left, np.eye(8)) <= 1e-12


def test_csd_step_recovers_embedded_ry():
    theta = 0.83
    left, rot, right = csd_step(ry(theta), 0)
    assert rot.angles[0] == pytest.approx(theta)
    assert_allclose(left @ rot.embed(1) @ right, ry(theta), atol=1e-12)


def test_csd_step_random(rng):
    u = haar(8, rng)
    left, rot, right = csd_step(u, 0)
    assert np.linalg.norm(left @ rot.embed(3) @ right - u) <= 1e-8
    assert rot.target == 1 and rot.controls == (2, 3)


def test_csd_step_blockwise(rng):
    # block diagonal over qubit 1, split at qubit 3
    a, b = haar(4, rng), haar(4, rng)
    u = np.zeros((8, 8), dtype=complex)
    u[:4, :4], u[4:, 4:] = a, b
    left, rot, right = csd_step(u, 1, m=3)
    assert rot.target == 3 and rot.controls == (1, 2)
    assert np.linalg.norm(left @ rot.embed(3) @ right - u) <= 1e-8
    # left/right are block diagonal over qubits 1 and 3
    w = permute_qubits(left, [1, 3, 2])
    for i in range(4):
        for j in range(4):
            if i != j:
                assert np.linalg.norm(w[2 * i:2 * i + 2, 2 * j:2 * j + 2]) <= 1e-9
    with pytest.raises(ValidationError):
        csd_step(haar(8, rng), 1)


def test_sequence_structure(rng):
    n = 4
    seq = csd_sequence(haar(2**n, rng))
    assert len(seq) == 2**n - 1
    for i, item in enumerate(seq, start=1):
        assert item.target == n + 1 - ruler(i)
        assert isinstance(item, UCGate if i % 2 else UCRotation)
        assert len(item.controls) == n - 1


def test_sequence_elements_are_block_diagonal(rng):
    n = 3
    u = haar(8, rng)
    total = np.eye(8, dtype=complex)
    for item in csd_sequence(u):
        g = as_ucgate(item)
        e = g.embed(n)
        rest = [q for q in range(1, n + 1) if q != g.target]
        w = permute_qubits(e, rest + [g.target])
        mask = np.kron(np.eye(4), np.ones((2, 2)))
        assert np.linalg.norm(w * (1 - mask)) <= 1e-9
        total = e @ total
    assert np.linalg.norm(total - u) <= 1e-9


def test_sequence_with_custom_order(rng):
    u = haar(16, rng)
    seq = csd_sequence(u, [1, 4, 2])
    assert {x.target for x in seq if isinstance(x, UCGate)} == {3}
    total = np.eye(16, dtype=complex)
    for item in seq:
        total = as_ucgate(item).embed(4) @ total
    assert np.linalg.norm(total - u) <= 1e-9


def test_decompose_one_qubit(rng):
    u = haar(2, rng)
    circ = decompose_unitary(u)
    assert counts(circ) == GateCounts(0, 1)
    assert dist_up_to_global_phase(unitary_of(circ), u) <= 1e-12


@pytest.mark.parametrize("n, bound", [(2, (4, 7)), (3, (26, 32))])
def test_decompose_counts(n, bound, rng):
    u = haar(2**n, rng)
    circ = decompose_unitary(u)
    assert counts(circ) <= GateCounts(*bound)
    assert dist_up_to_global_phase(unitary_of(circ), u) <= 1e-7
    assert phase_dist(circuit_unitary(circ), u) <= 1e-6


def test_unoptimized_costs_one_more_cnot(rng):
    u = haar(8, rng)
    raw = decompose_unitary(u, optimize=False)
    assert counts(raw) == GateCounts(27, 35)
    assert dist_up_to_global_phase(unitary_of(raw), u) <= 1e-9


def test_decompose_deterministic(rng):
    u = haar(8, rng)
    a, b = decompose_unitary(u), decompose_unitary(u.copy())
    assert len(a.gates) == len(b.gates)
    for x, y in zip(a.gates, b.gates):
        assert type(x) is type(y)
        if isinstance(x, OneQubit):
            assert x.target == y.target and np.array_equal(x.matrix, y.matrix)
        elif isinstance(x, CNOT):
            assert x == y
        else:
            assert x.angle == y.angle


def test_decompose_errors():
    with pytest.raises(ValidationError):
        decompose_unitary(np.ones((4, 4)))
    with pytest.raises(ResourceError):
        decompose_unitary(np.eye(2**11))
