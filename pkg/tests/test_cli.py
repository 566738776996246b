"""
Tests for the command-line surface.
"""

import csv
import io
import json
from pathlib import Path

import pytest

from bbfiber.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_verify_passes(capsys):
    """Test that omega12 removes the linear terms and exits 0."""
    assert main(["verify", "--seq", "omega12", "--terms", "linear"]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 4
    assert all(row["status"] == "eliminated" for row in rows)


def test_verify_fails_on_survivors(capsys):
    """Test exit 1 when a term survives."""
    assert main(["verify", "--seq", "[2,Pi,1,Pi]", "--terms", "linear,A"]) == EXIT_FAILED
    rows = _rows(capsys.readouterr().out)
    assert {row["status"] for row in rows} == {"eliminated", "survives"}


def test_verify_degenerate_flag(capsys):
    """Test that number terms pass only when degenerate survival is accepted."""
    assert main(["verify", "--seq", "eightstep", "--terms", "C"]) == EXIT_FAILED
    assert main(["verify", "--seq", "eightstep", "--terms", "C", "--allow-degenerate"]) == EXIT_OK


def test_verify_with_matrix_json(capsys):
    """Test the matrix column in JSON output."""
    code = main(["verify", "--seq", "omega1234", "--terms", "B", "--matrix", "--format", "json"])
    assert code == EXIT_FAILED
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 2
    for row in rows:
        assert row["weight_re"] == pytest.approx(4.0)
        assert row["matrix_norm"] > 0


def test_verify_parse_error(capsys):
    """Test that a malformed literal exits 2 with a message."""
    assert main(["verify", "--seq", "[2,Foo,1,Pi]", "--terms", "linear"]) == EXIT_USAGE
    assert "ERROR" in capsys.readouterr().err


def test_verify_lamb_shift(capsys):
    """Test the H' check on the bundled sweep model."""
    code = main(["verify", "--lamb-shift", str(CONFIGS / "paired_pi.json")])
    assert code == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert row["passed"] == "1"
    assert float(row["hermiticity_residual"]) < 1e-12
    assert float(row["purity_change"]) < 1e-8


def test_verify_needs_inputs(tmp_path, capsys):
    """Test that verify without terms or a usable config exits 2."""
    assert main(["verify", "--seq", "omega12"]) == EXIT_USAGE
    path = tmp_path / "bounds_only.json"
    path.write_text(json.dumps({"seed": 1}))
    assert main(["verify", "--lamb-shift", str(path)]) == EXIT_USAGE
    assert "no model block" in capsys.readouterr().err


def test_delta_value(capsys):
    """Test the super-Ohmic bound at the reference cutoff."""
    assert main(["delta", "--n", "2", "--omega-c", "2e13"]) == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert float(row["delta_m"]) == pytest.approx(0.5925, rel=1e-3)
    assert int(row["n"]) == 2


def test_delta_singular(capsys):
    """Test that omega_c = 0 is a usage error."""
    assert main(["delta", "--n", "2", "--omega-c", "0"]) == EXIT_USAGE
    assert main(["delta", "--omega-c", "2e13"]) == EXIT_USAGE


def test_delta_curve(tmp_path):
    """Test the curve output written to a file."""
    target = tmp_path / "curve.csv"
    code = main(["delta", "--curve", "--n", "3", "--points", "7", "--output", str(target)])
    assert code == EXIT_OK
    rows = _rows(target.read_text())
    assert len(rows) == 8
    assert list(rows[0]) == ["omega_c_rad_s", "delta_m"]


def test_delta_from_config(tmp_path, capsys):
    """Test reading the density and query from a config file."""
    path = tmp_path / "bound.json"
    path.write_text(
        json.dumps(
            {
                "spectral_density": {"n": 1, "alpha": 1.0, "omega_c_rad_s": 2e13},
                "bound_query": {"delta": 1e-4},
            }
        )
    )
    assert main(["delta", "--config", str(path)]) == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert 5.5e5 <= float(row["delta_m"]) <= 6.5e5


def test_estimate_json(capsys):
    """Test the default JSON estimate."""
    assert main(["estimate"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["shifter_count"] == 50.0
    assert payload["delta_m"] == 20.0
    assert payload["residual_error"] == pytest.approx(1e-4)


def test_estimate_csv(capsys):
    """Test the single-row CSV estimate."""
    assert main(["estimate", "--order", "bilinear", "--format", "csv"]) == EXIT_OK
    (row,) = _rows(capsys.readouterr().out)
    assert 90.0 <= float(row["delta_m"]) <= 112.0


def test_reproduce_list(capsys):
    """Test the row inventory without computation."""
    assert main(["reproduce", "--list"]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert "pass" not in rows[0]
    assert "delta.n2" in [row["key"] for row in rows]


def test_reproduce_strict_failure(capsys):
    """Test that the rounded 0.6 m value fails a strict tolerance."""
    assert main(["reproduce", "--rows", "delta.n2"]) == EXIT_OK
    capsys.readouterr()
    assert main(["reproduce", "--strict-tol", "1e-3", "--rows", "delta.n2"]) == EXIT_FAILED
    (row,) = _rows(capsys.readouterr().out)
    assert row["pass"] == "0"
    assert row["computed"].startswith("5.92")


def test_reproduce_unknown_row():
    """Test that an unknown row key is a usage error."""
    assert main(["reproduce", "--rows", "delta.n9"]) == EXIT_USAGE


def test_reproduce_deterministic(tmp_path):
    """Test that two full runs write byte-identical tables."""
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    assert main(["reproduce", "--output", str(first)]) == EXIT_OK
    assert main(["reproduce", "--output", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert all(row["pass"] == "1" for row in _rows(first.read_text()))


def test_simulate_paired_config(capsys):
    """Test the bundled sweep: paired rows and the BB benefit on homogeneous points."""
    assert main(["simulate", "--config", str(CONFIGS / "paired_pi.json")]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 24
    for with_bb, without_bb in zip(rows[::2], rows[1::2]):
        assert (with_bb["bb"], without_bb["bb"]) == ("1", "0")
        if float(with_bb["epsilon"]) == 0.0:
            assert float(with_bb["fidelity"]) >= float(without_bb["fidelity"])


def test_simulate_bilinear_config(capsys):
    """Test the eight-step sweep against linear plus bilinear couplings."""
    assert main(["simulate", "--config", str(CONFIGS / "eightstep_bilinear.json")]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 4
    for with_bb, without_bb in zip(rows[::2], rows[1::2]):
        assert (with_bb["bb"], without_bb["bb"]) == ("1", "0")
        if float(with_bb["epsilon"]) == 0.0:
            assert float(with_bb["fidelity"]) > float(without_bb["fidelity"])
            assert float(with_bb["purity"]) >= float(without_bb["purity"])


def test_simulate_no_coupling(capsys):
    """Test that a decoupled fiber keeps fidelity 1 with and without pulses."""
    assert main(["simulate", "--config", str(CONFIGS / "no_coupling.json")]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 2
    for row in rows:
        assert float(row["fidelity"]) == pytest.approx(1.0, abs=1e-10)


def test_simulate_bad_config(tmp_path, capsys):
    """Test that an unknown config key exits 2 and names the key."""
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"model": {}, "colour": "red"}))
    assert main(["simulate", "--config", str(path)]) == EXIT_USAGE
    assert "colour" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_search(capsys):
    """Test the search command for success and failure."""
    assert main(["search", "--targets", "linear", "--alphabet", "Pi", "--max-steps", "4"]) == 0
    (row,) = _rows(capsys.readouterr().out)
    assert row["sequence"] == "[2,Pi,1,Pi]"
    assert row["length"] == "2"

    code = main(["search", "--targets", "C", "--alphabet", "Pi,Pi1", "--max-steps", "3"])
    assert code == EXIT_FAILED


def test_argparse_usage_error():
    """Test that a missing subcommand exits with status 2."""
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2
