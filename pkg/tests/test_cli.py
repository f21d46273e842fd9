import csv
import io
import subprocess
import sys

import pytest

from qpvqe.cli import run_cli

from conftest import data_path

H2 = data_path("hamiltonians", "h2_0.70.ham")
CAL = data_path("calibration", "ibmq_manila.cal")


def invoke(argv, capsys):
    code = run_cli(argv)
    out = capsys.readouterr().out
    return code, out


class TestEd:
    def test_prints_ascending_energies(self, capsys):
        code, out = invoke(["ed", "--hamiltonian", H2, "--sector", "2,0",
                            "-k", "4"], capsys)
        assert code == 0
        values = [float(line) for line in out.strip().splitlines()]
        assert len(values) == 4
        assert values == sorted(values)
        assert values[0] == pytest.approx(-1.1361894507, abs=1e-9)

    def test_error_exit_on_missing_file(self, capsys):
        code, _ = invoke(["ed", "--hamiltonian", "no_such.ham"], capsys)
        assert code == 1


@pytest.fixture(scope="module")
def record_path(tmp_path_factory):
    path = str(tmp_path_factory.mktemp("cli") / "h2.rec")
    code = run_cli(["run", "--hamiltonian", H2, "--sector", "2,0",
                    "-k", "4", "--seed", "7", "--out", path])
    assert code == 0
    return path


class TestRunAndConsumers:
    def test_record_is_deterministic(self, record_path, tmp_path):
        other = str(tmp_path / "again.rec")
        code = run_cli(["run", "--hamiltonian", H2, "--sector", "2,0",
                        "-k", "4", "--seed", "7", "--out", other])
        assert code == 0
        assert open(record_path, "rb").read() == open(other, "rb").read()

    def test_record_format(self, record_path):
        lines = open(record_path).read().splitlines()
        assert lines[0] == "format: 1"
        keys = [line.split(":", 1)[0] for line in lines]
        for expected in ("kind", "hamiltonian", "k", "seed", "theta",
                         "energy 0", "energy 3", "e_w", "bound"):
            assert expected in keys

    def test_gaps_consume_record(self, record_path, capsys):
        code, out = invoke(["gaps", "--result", record_path, "--projector"],
                           capsys)
        assert code == 0
        rows = [line for line in out.splitlines()[1:] if line]
        plain = {}
        projector = {}
        for row in rows:
            body = row.split(" #")[0]
            i, j, gap = body.split(",")
            target = projector if row.endswith("# projector") else plain
            target[(int(i), int(j))] = float(gap)
        assert len(plain) == 6
        for key, value in projector.items():
            assert value == pytest.approx(plain[key], abs=1e-10)

    def test_amplitudes_consume_record(self, record_path, capsys):
        code, out = invoke(["amplitudes", "--result", record_path], capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 6
        # Hamiltonian is the default observable; off-diagonals between the
        # extracted states shrink with the residual optimization error
        for row in rows:
            assert abs(complex(float(row["re"]), float(row["im"]))) < 1e-3


class TestSweep:
    def test_two_point_sweep_csv(self, tmp_path, capsys):
        manifest = tmp_path / "mini.sweep"
        manifest.write_text(
            "sector: 2,0\nk: 4\nmax_iterations: 4000\n"
            f"point: 0.70 {H2}\n"
            f"point: 0.90 {data_path('hamiltonians', 'h2_0.90.ham')}\n")
        out_csv = tmp_path / "out.csv"
        code = run_cli(["sweep", "--manifest", str(manifest),
                        "--out", str(out_csv)])
        assert code == 0
        rows = list(csv.DictReader(open(out_csv)))
        assert [r["label"] for r in rows] == ["0.70"] * 4 + ["0.90"] * 4
        header = open(out_csv).readline().strip()
        assert header == ("label,j,energy_ha,ed_energy_ha,abs_err_ha,"
                          "fidelity,e_w,bound")
        for row in rows:
            assert float(row["abs_err_ha"]) <= 1.6e-3
            assert float(row["fidelity"]) >= 0.99

    def test_jobs_preserve_manifest_order(self, tmp_path):
        manifest = tmp_path / "mini.sweep"
        manifest.write_text(
            "sector: 2,0\nk: 4\nmax_iterations: 2000\n"
            f"point: b {data_path('hamiltonians', 'h2_0.90.ham')}\n"
            f"point: a {H2}\n")
        serial = tmp_path / "serial.csv"
        threaded = tmp_path / "threaded.csv"
        assert run_cli(["sweep", "--manifest", str(manifest),
                        "--out", str(serial)]) == 0
        assert run_cli(["sweep", "--manifest", str(manifest),
                        "--jobs", "2", "--out", str(threaded)]) == 0
        assert open(serial).read() == open(threaded).read()


class TestNoisyRun:
    def test_noisy_run_record_and_trace(self, tmp_path, capsys):
        record = tmp_path / "noisy.rec"
        trace = tmp_path / "trace.csv"
        code = run_cli(["noisy-run", "--hamiltonian", H2,
                        "--calibration", CAL, "--sector", "2,0",
                        "--shots", "200", "--iterations", "20",
                        "--seed", "3", "--out", str(record),
                        "--trace-out", str(trace)])
        assert code == 0
        lines = open(record).read().splitlines()
        assert lines[0] == "format: 1"
        assert any(line.startswith("best_value:") for line in lines)
        rows = list(csv.DictReader(open(trace)))
        assert len(rows) == 20

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QPVQE_SEED", "9")
        a = tmp_path / "a.rec"
        b = tmp_path / "b.rec"
        for path in (a, b):
            assert run_cli(["noisy-run", "--hamiltonian", H2,
                            "--calibration", CAL, "--sector", "2,0",
                            "--shots", "100", "--iterations", "5",
                            "--out", str(path)]) == 0
        assert a.read_text() == b.read_text()


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "qpvqe.cli", "ed", "--hamiltonian", H2,
             "--sector", "2,0", "-k", "1"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert float(proc.stdout.strip()) == pytest.approx(-1.13619, abs=1e-4)
