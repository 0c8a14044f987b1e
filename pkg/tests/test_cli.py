import io

import numpy as np
import pytest

from maggates import cli
from maggates.tables import read_csv, write_csv

FAST = ["levels", "clockpoint", "fields", "design", "modes", "gate", "errors", "evolve"]


def _run(args):
    buf = io.StringIO()
    code = cli.main(args, stream=buf)
    return code, buf.getvalue()


@pytest.fixture(scope="module")
def outputs(tmp_path_factory):
    a = tmp_path_factory.mktemp("a")
    b = tmp_path_factory.mktemp("b")
    texts = {}
    for cmd in FAST:
        code, text = _run([cmd, "--out", str(a)])
        assert code == 0, text
        texts[cmd] = text
        code, _ = _run([cmd, "--out", str(b), "--seedless"])
        assert code == 0
    return a, b, texts


def test_identical_config_gives_identical_csv(outputs):
    a, b, _ = outputs
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    assert "evolve_state.txt" in files and "levels.csv" in files
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_csv_round_trip(outputs):
    a, _, _ = outputs
    for p in a.glob("*.csv"):
        header, rows = read_csv(p)
        assert rows and all(len(r) == len(header) for r in rows)
    header, rows = read_csv(a / "levels.csv")
    assert header == ["B_mT", "F", "mF", "energy_Hz"]
    assert len(rows) == 41 * 8


def test_gate_report_mentions_published_current(outputs):
    _, _, texts = outputs
    assert "published figure 1.7 A" in texts["gate"]
    assert "mu_eff" in texts["gate"] and "mu_z(2,2)" in texts["gate"]
    assert "t_pi = pi / (2 Omega_x)" in texts["errors"]


def test_evolve_reports_high_fidelity(outputs):
    a, _, _ = outputs
    header, rows = read_csv(a / "evolve.csv")
    vals = {r[0]: r[1] for r in rows}
    assert vals["infidelity"] < 1e-6
    assert vals["norm_drift"] < 1e-9
    h, traj = read_csv(a / "evolve_trajectory.csv")
    assert h[:2] == ["t", "norm"] and len(traj) == 101


def test_zz_gate_from_config(tmp_path):
    cfg = tmp_path / "zz.toml"
    cfg.write_text('[gate]\nkind = "zz"\ntau = "20 us"\n')
    code, text = _run(["gate", "--config", str(cfg), "--format", "csv"])
    assert code == 0
    assert "published figure 1.3 A" in text
    assert "current,1.36" in text


def test_conflicting_gate_spec_exit_1(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[gate]\nkind = "phiphi"\ntau = "20 us"\ndelta = "50 kHz"\n')
    code, _ = _run(["gate", "--config", str(cfg)])
    assert code == cli.EXIT_CONFIG
    assert "tau and delta" in capsys.readouterr().err


def test_nonconvergence_exit_2(tmp_path, capsys):
    cfg = tmp_path / "zig.toml"
    cfg.write_text('[chain]\nN = 8\naxial = "1 MHz"\nradial_x = "1.2 MHz"\nradial_z = "1.3 MHz"\n')
    code, _ = _run(["modes", "--config", str(cfg)])
    assert code == cli.EXIT_NUMERIC
    assert "ChainInstabilityError" in capsys.readouterr().err


def test_seedless_guard_blocks_rng():
    with cli.no_rng():
        with pytest.raises(RuntimeError):
            np.random.default_rng(0)
    np.random.default_rng(0)  # restored


def test_table_writer_rejects_ragged_rows(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "x.csv", ["a", "b"], [[1]])
