import numpy as np

from oracles import haar
from ucgates.circuit import parse, read_circuit, serialize
from ucgates.cli import main
from ucgates.linalg import write_matrix
from ucgates.stateprep import StateVector, random_state, write_state


def report(capsys):
    out = capsys.readouterr().out
    return dict(line.split("=", 1) for line in out.splitlines() if "=" in line and not line.startswith("#")), out


def test_decompose_identity(tmp_path, capsys):
    write_matrix(tmp_path / "id.txt", np.eye(4))
    assert main(["decompose", str(tmp_path / "id.txt"), "--out", str(tmp_path / "c.txt")]) == 0
    rep, _ = report(capsys)
    assert rep["cnot"] == "0" and rep["pass"] == "true"
    assert set(rep) == {"digest", "backend", "n", "cnot", "one_qubit", "bound_cnot", "bound_1q", "residual", "pass"}


def test_decompose_random_fixture_and_verify(tmp_path, capsys, rng):
    u = haar(8, rng)
    write_matrix(tmp_path / "u.txt", u)
    out = tmp_path / "c.txt"
    assert main(["decompose", str(tmp_path / "u.txt"), "--out", str(out)]) == 0
    rep, _ = report(capsys)
    assert int(rep["cnot"]) <= 26 and int(rep["one_qubit"]) <= 32
    assert main(["verify", str(out), str(tmp_path / "u.txt")]) == 0
    capsys.readouterr()
    # delete one gate: verification must fail on the residual
    circ = read_circuit(out)
    broken = type(circ)(circ.n, circ.gates[:3] + circ.gates[4:])
    (tmp_path / "bad.txt").write_text(serialize(broken))
    assert main(["verify", str(tmp_path / "bad.txt"), str(tmp_path / "u.txt")]) == 1
    rep, _ = report(capsys)
    assert float(rep["residual"]) > 1e-7 and rep["pass"] == "false"


def test_builtin_fixture_is_seeded(capsys):
    assert main(["decompose", "--seed", "5"]) == 0
    first, _ = report(capsys)
    main(["decompose", "--seed", "5"])
    second, _ = report(capsys)
    assert first["digest"] == second["digest"] and first["n"] == "3"


def test_non_unitary_exit_2(tmp_path, capsys):
    write_matrix(tmp_path / "m.txt", np.ones((4, 4)))
    assert main(["decompose", str(tmp_path / "m.txt")]) == 2
    assert "not unitary" in capsys.readouterr().err


def test_verify_size_mismatch(tmp_path, capsys):
    (tmp_path / "c.txt").write_text("QUBITS 1\n")
    write_matrix(tmp_path / "m.txt", np.eye(4))
    assert main(["verify", str(tmp_path / "c.txt"), str(tmp_path / "m.txt")]) == 2


def test_stateprep_basis(tmp_path, capsys):
    write_state(tmp_path / "a.txt", StateVector.basis(2))
    assert main(["stateprep", str(tmp_path / "a.txt"), str(tmp_path / "a.txt")]) == 0
    rep, _ = report(capsys)
    assert rep["cnot"] == "0" and rep["one_qubit"] == "0"


def test_stateprep_random(tmp_path, capsys, rng):
    write_state(tmp_path / "a.txt", random_state(3, rng))
    write_state(tmp_path / "b.txt", random_state(3, rng))
    assert main(["stateprep", str(tmp_path / "a.txt"), str(tmp_path / "b.txt")]) == 0
    rep, _ = report(capsys)
    assert int(rep["cnot"]) <= 8 and int(rep["one_qubit"]) <= 11


def test_stateprep_unnormalized(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("1\n1 0\n1 0\n")
    assert main(["stateprep", str(tmp_path / "a.txt"), str(tmp_path / "a.txt")]) == 2


def test_nn_header_and_count(tmp_path, capsys):
    out = tmp_path / "c.txt"
    main(["stateprep", "--nn", "--qubits", "3", "--out", str(out)])
    _, text = report(capsys)
    assert text.startswith("# topology: chain")
    assert out.read_text().startswith("# topology: chain")
    parse(out.read_text())
    assert main(["count", str(out)]) in (0, 1)
    rep, _ = report(capsys)
    assert rep["backend"] == "nn"


def test_tolerance_from_env(tmp_path, capsys, monkeypatch):
    write_matrix(tmp_path / "u.txt", np.eye(2))
    (tmp_path / "c.txt").write_text("QUBITS 1\nPHASE 0.0\nU1 1 0 0 1 0 1 0 0 0\n")
    assert main(["verify", str(tmp_path / "c.txt"), str(tmp_path / "u.txt")]) == 1
    capsys.readouterr()
    monkeypatch.setenv("UCG_TOL", "10")
    assert main(["verify", str(tmp_path / "c.txt"), str(tmp_path / "u.txt")]) == 0


def test_missing_file_exit_2(capsys):
    assert main(["count", "/nonexistent/circuit.txt"]) == 2


def test_parse_error_exit_2(tmp_path, capsys):
    (tmp_path / "c.txt").write_text("QUBITS 2\nCX 1 9\n")
    assert main(["count", str(tmp_path / "c.txt")]) == 2
