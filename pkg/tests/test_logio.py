import numpy as np
import pytest

from susdswarm import QuadraticField, SimConfig, complete_graph, run
from susdswarm.logio import (
    TRAJECTORY_COLUMNS,
    fmt,
    read_diagnostics,
    read_run_info,
    read_trajectory,
    write_diagnostics,
    write_run_info,
    write_trajectory,
)
from susdswarm.theory import compute_diagnostics


@pytest.fixture(scope="module")
def small_log():
    P = [(0.0, 3.0), (0.5, 3.1), (-0.5, 2.9)]
    return run(P, complete_graph(3), QuadraticField(), SimConfig(t_max=15, initial_q=(-1.0, 0.0)))


def test_fmt():
    assert fmt(float("nan")) == "nan"
    assert float(fmt(0.1)) == 0.1
    assert fmt(1) == "1"


def test_trajectory_round_trip_is_exact(tmp_path, small_log):
    path = tmp_path / "trajectory.csv"
    write_trajectory(path, small_log)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(TRAJECTORY_COLUMNS)
    back = read_trajectory(path, small_log.dt, complete_graph(3), "horizon")
    np.testing.assert_array_equal(back.positions, small_log.positions)
    np.testing.assert_array_equal(back.q, small_log.q)
    np.testing.assert_array_equal(back.z, small_log.z)
    assert back.neighbor_sets == small_log.neighbor_sets


def test_diagnostics_round_trip(tmp_path, small_log):
    diag = compute_diagnostics(small_log, QuadraticField(), SimConfig().gains)
    path = tmp_path / "diagnostics.csv"
    write_diagnostics(path, diag, small_log.dt)
    cols = read_diagnostics(path)
    np.testing.assert_array_equal(cols["theta"], diag.theta)
    assert np.all(np.isnan(cols["predictor_residual"][-1]))


def test_bad_header_rejected(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="unexpected header"):
        read_trajectory(p, 0.01, complete_graph(2))


def test_truncated_file_rejected(tmp_path, small_log):
    p = tmp_path / "t.csv"
    write_trajectory(p, small_log)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ValueError, match="expected"):
        read_trajectory(p, small_log.dt, complete_graph(3))


def test_run_info_round_trip(tmp_path):
    info = {"termination": "source", "steps": 12, "dt": 0.01}
    write_run_info(tmp_path / "run.yaml", info)
    assert read_run_info(tmp_path / "run.yaml") == info
