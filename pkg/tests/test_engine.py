import numpy as np
import pytest

from susdswarm import (
    ConfigurationError,
    Gains,
    NumericalFailure,
    QuadraticField,
    SimConfig,
    ZeroField,
    complete_graph,
    line_graph,
    run,
    step,
)
from susdswarm.engine import AgentState, box_positions
from susdswarm.graph import VisibilityGraph
from susdswarm.perception import BodyFrame


def test_single_step_by_hand():
    # agents at (0, +-1): scatter is diag(0, 2), so q = (0, 1), n = (-1, 0), z = 1 for both
    log = run([(0.0, 1.0), (0.0, -1.0)], complete_graph(2), QuadraticField(), SimConfig(t_max=1))
    np.testing.assert_allclose(log.q[0], [[0.0, 1.0], [0.0, 1.0]], atol=1e-15)
    np.testing.assert_allclose(log.positions[1], [[-0.01, 1.0], [-0.01, -1.0]], atol=1e-15)
    np.testing.assert_allclose(log.z[1], [1.0001, 1.0001], rtol=1e-14)
    np.testing.assert_allclose(np.abs(log.q[1]), [[0.0, 1.0], [0.0, 1.0]], atol=1e-14)


def test_step_matches_run():
    P = [(0.0, 1.0), (0.3, -1.0), (1.0, 0.2)]
    cfg = SimConfig(t_max=1)
    log = run(P, complete_graph(3), QuadraticField(), cfg)
    states = [AgentState(np.array(p), BodyFrame.from_q(q), float(z)) for p, q, z in zip(P, log.q[0], log.z[0])]
    nxt = step(states, complete_graph(3), QuadraticField(), cfg)
    np.testing.assert_array_equal(np.array([s.r for s in nxt]), log.positions[1])
    np.testing.assert_array_equal(np.array([s.frame.q for s in nxt]), log.q[1])


def test_zero_field_keeps_swarm_still():
    P = box_positions(5, (1.0, 1.0), 0.5, seed=3)
    log = run(P, complete_graph(5), ZeroField(), SimConfig(t_max=20))
    np.testing.assert_array_equal(log.positions[-1], log.positions[0])


def test_source_termination_and_initial_check():
    cfg = SimConfig(t_max=5000, termination="source", z_bar=0.25, initial_q=(-1.0, 0.0))
    P = [(0.0, 5.0), (0.3, 5.05), (-0.3, 4.95), (0.6, 5.0)]
    log = run(P, complete_graph(4), QuadraticField(), cfg)
    assert log.termination == "source"
    assert np.all(log.z[-1] < 0.25)
    assert not np.all(log.z[-2] < 0.25)
    # already inside: no step is taken
    near = run([(0.1, 0.0), (-0.1, 0.0)], complete_graph(2), QuadraticField(), cfg)
    assert near.n_steps == 0 and near.termination == "source"


def test_runs_are_deterministic():
    P = [(x, 4.0 + 0.02 * (-1) ** k) for k, x in enumerate(np.linspace(-0.5, 0.5, 6))]
    cfg = SimConfig(t_max=50, initial_q=(-1.0, 0.0))
    a = run(P, line_graph(6), QuadraticField(), cfg)
    b = run(P, line_graph(6), QuadraticField(), cfg)
    np.testing.assert_array_equal(a.positions, b.positions)
    np.testing.assert_array_equal(a.q, b.q)


def test_box_positions_depend_on_seed():
    a = box_positions(4, (0, 0), 1.0, seed=1)
    assert np.array_equal(a, box_positions(4, (0, 0), 1.0, seed=1))
    assert not np.array_equal(a, box_positions(4, (0, 0), 1.0, seed=2))
    assert np.all(np.abs(a) <= 1.0)


def test_configuration_errors():
    with pytest.raises(ConfigurationError, match="epsilon"):
        SimConfig(epsilon=1.5)
    with pytest.raises(ConfigurationError, match="termination"):
        SimConfig(termination="never")
    with pytest.raises(ConfigurationError, match="two agents"):
        run([(0.0, 0.0)], complete_graph(1), QuadraticField(), SimConfig())
    with pytest.raises(ConfigurationError, match="graph has"):
        run([(0.0, 0.0), (1.0, 0.0)], complete_graph(3), QuadraticField(), SimConfig())
    isolated = VisibilityGraph("static", 3, edges=((0, 1),))
    with pytest.raises(ConfigurationError, match="no neighbors"):
        run([(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)], isolated, QuadraticField(), SimConfig())


def test_divergence_raises_numerical_failure():
    cfg = SimConfig(gains=Gains(k1=1e6), t_max=200)
    with pytest.raises(NumericalFailure) as exc:
        run([(0.0, 50.0), (1.0, 50.2), (-1.0, 49.9)], complete_graph(3), QuadraticField(), cfg)
    assert exc.value.step >= 1


def test_log_shapes_and_frames():
    log = run(box_positions(4, (0.0, 3.0), 0.3, seed=0), complete_graph(4), QuadraticField(), SimConfig(t_max=10))
    assert log.positions.shape == (11, 4, 2)
    assert len(log.neighbor_sets) == 11
    np.testing.assert_allclose(np.hypot(log.q[..., 0], log.q[..., 1]), 1.0, atol=1e-14)
    np.testing.assert_allclose(np.sum(log.q * log.n, axis=-1), 0.0, atol=1e-15)
    assert log.t[-1] == pytest.approx(0.1)
