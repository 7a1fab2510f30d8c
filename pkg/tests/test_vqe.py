import math

import numpy as np
import pytest

from loopgas.circuit import TWO_PI, build_plgc, run_circuit
from loopgas.ed import ground_state_lanczos
from loopgas.lattice import build_lattice
from loopgas.operators import hamiltonian_tcm
from loopgas.statevector import expectation
from loopgas.vqe import (EnergyObjective, SpsaConfig, SpsaError, parameter_shift_gradient,
                         run_restart, spsa_minimize, vqe_run, with_iterations)


def analytic_energy(geom, x, thetas):
    """Closed form of the PLGC energy: <B_p> = sin t_p and <Z_i> = prod_{p containing i} cos t_p."""
    thetas = np.asarray(thetas)
    z = [np.prod([math.cos(thetas[p]) for p in geom.plaquettes_of_bond[q]])
         for q in range(geom.n_qubits)]
    return (1 - x) * (-geom.n_vertices - np.sin(thetas).sum()) - x * sum(z)


def quadratic(theta):
    return float(np.sum((theta - 1.0) ** 2))


def test_spsa_quadratic_sanity():
    res = spsa_minimize(quadratic, np.zeros(4), SpsaConfig(max_iterations=200))
    assert quadratic(res.theta) < 1e-2
    assert res.best_value == pytest.approx(quadratic(res.theta))
    assert len(res.trace) == 200
    assert res.n_evaluations == 2 * 10 + 1 + 3 * 200


def test_spsa_is_deterministic():
    cfg = SpsaConfig(max_iterations=50, seed=7)
    a = spsa_minimize(quadratic, np.zeros(3), cfg)
    b = spsa_minimize(quadratic, np.zeros(3), cfg)
    assert a.trace.tobytes() == b.trace.tobytes()
    assert a.theta.tobytes() == b.theta.tobytes()
    c = spsa_minimize(quadratic, np.zeros(3), SpsaConfig(max_iterations=50, seed=8))
    assert c.trace.tobytes() != a.trace.tobytes()


def test_spsa_returns_best_point():
    cfg = SpsaConfig(max_iterations=40, a0=2.0)  # deliberately oversized steps
    res = spsa_minimize(quadratic, np.zeros(2), cfg)
    assert res.best_value <= min(res.trace.min(), quadratic(np.zeros(2)))


def test_spsa_fixed_gain():
    res = spsa_minimize(quadratic, np.zeros(2), SpsaConfig(max_iterations=5, a0=0.3))
    assert res.a0 == 0.3
    assert res.n_evaluations == 1 + 3 * 5


def test_spsa_non_finite_aborts():
    def bad(theta):
        return float("nan") if theta[0] > 0.05 else quadratic(theta)

    with pytest.raises(SpsaError, match="iteration"):
        spsa_minimize(bad, np.zeros(2), SpsaConfig(max_iterations=20, a0=0.5))


@pytest.mark.parametrize("kwargs", [dict(max_iterations=0), dict(alpha=0), dict(c0=-1), dict(a0=0)])
def test_spsa_config_validation(kwargs):
    with pytest.raises(ValueError):
        SpsaConfig(**kwargs)


@pytest.mark.parametrize("shape", [(2, 2), (3, 3), (4, 3), (3, 4)])
def test_energy_objective_matches_closed_form(shape, backend):
    geom = build_lattice(*shape)
    rng = np.random.default_rng(13)
    for x in (0.0, 0.3, 1.0):
        obj = EnergyObjective(geom, x)
        for _ in range(5):
            thetas = rng.uniform(0, TWO_PI, geom.n_plaquettes)
            assert obj(thetas) == pytest.approx(analytic_energy(geom, x, thetas), abs=1e-10)


def test_energy_objective_matches_complex_path(lat3x3):
    rng = np.random.default_rng(1)
    obj = EnergyObjective(lat3x3, 0.42)
    thetas = rng.uniform(0, TWO_PI, 4)
    state = run_circuit(build_plgc(lat3x3, thetas))
    assert obj(thetas) == pytest.approx(expectation(state, hamiltonian_tcm(lat3x3, 0.42)), abs=1e-12)
    np.testing.assert_allclose(obj.state_amplitudes(thetas), state.amplitudes.real, atol=1e-14)
    with pytest.raises(ValueError):
        obj(np.zeros(3))


def test_vqe_x1_3x3(lat3x3):
    res = vqe_run(lat3x3, 1.0)
    assert res.best_energy == pytest.approx(-12.0, abs=1e-3)
    assert np.all(res.restart_fidelities > 0.99)
    assert res.best_energy == res.restart_energies.min()
    assert len(res.energy_trace) == 300
    assert res.n_restarts == 10


def test_vqe_x0_3x3(lat3x3):
    res = vqe_run(lat3x3, 0.0)
    assert res.best_energy - (-13.0) < 0.12
    assert res.best_energy >= -13.0 - 1e-9


def test_vqe_2x2_midpoint(lat2x2):
    res = vqe_run(lat2x2, 0.5)
    exact = ground_state_lanczos(lat2x2, 0.5).energy
    assert abs(res.best_energy - exact) / 4 < 1e-2


def test_vqe_rejects_bad_input(lat2x2):
    with pytest.raises(ValueError):
        vqe_run(lat2x2, 1.5)
    with pytest.raises(ValueError):
        vqe_run(lat2x2, 0.5, n_restarts=0)


@pytest.mark.parametrize("shape", [(2, 2), (3, 3)])
def test_parameter_shift_matches_finite_difference(shape):
    geom = build_lattice(*shape)
    rng = np.random.default_rng(21)
    h = 1e-5
    for _ in range(5):
        x = rng.uniform(0, 1)
        thetas = rng.uniform(0, TWO_PI, geom.n_plaquettes)
        obj = EnergyObjective(geom, x)
        grad = parameter_shift_gradient(geom, x, thetas, obj)
        for p in range(geom.n_plaquettes):
            e = np.zeros(geom.n_plaquettes)
            e[p] = h
            fd = (obj(thetas + e) - obj(thetas - e)) / (2 * h)
            assert abs(grad[p] - fd) < 1e-6


def test_parameter_shift_at_x1_zero_angles(lat3x3):
    grad = parameter_shift_gradient(lat3x3, 1.0, np.zeros(4))
    np.testing.assert_allclose(grad, 0.0, atol=1e-12)


def test_stationarity_at_optimum(lat3x3):
    res = vqe_run(lat3x3, 0.0, n_restarts=3)
    grad = parameter_shift_gradient(lat3x3, 0.0, res.best_thetas)
    assert np.max(np.abs(grad)) < 5e-2


def test_trace_running_minimum_and_variational_bound(lat3x3):
    x = 0.3
    exact = ground_state_lanczos(lat3x3, x).energy
    seen = []
    inner = EnergyObjective(lat3x3, x)

    def recording(thetas):
        value = inner(thetas)
        seen.append(value)
        return value

    res = spsa_minimize(recording, np.full(4, 0.5), SpsaConfig(max_iterations=100))
    assert min(seen) >= exact - 1e-9
    assert res.best_value == min(seen)
    running = np.minimum.accumulate(res.trace)
    assert np.all(np.diff(running) <= 0)


@pytest.mark.parametrize("x", [0.1, 0.5])
def test_restart_consensus_away_from_transition(lat3x3, x):
    res = vqe_run(lat3x3, x)
    assert np.sum(res.restart_fidelities > 0.95) >= 8


def test_restart_seed_isolation(lat2x2):
    cfg = SpsaConfig(max_iterations=3, seed=99)
    outs = [run_restart(lat2x2, 0.2, cfg, r) for r in range(4)]
    starts = [o.theta0[0] for o in outs]
    assert len(set(starts)) == 4
    for r, o in enumerate(outs):
        expected = np.random.default_rng(99 ^ r).uniform(0, TWO_PI, 1)
        np.testing.assert_array_equal(o.theta0, expected)
    # a restart does not depend on which restarts ran before it
    again = run_restart(lat2x2, 0.2, cfg, 2)
    assert again.trace.tobytes() == outs[2].trace.tobytes()


def test_with_iterations():
    cfg = with_iterations(SpsaConfig(seed=3), 17)
    assert cfg.max_iterations == 17 and cfg.seed == 3
    assert cfg.offset == pytest.approx(1.7)
