"""SPSA optimization of the loop-gas circuit against the exact energy."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ._backend import kernels
from .circuit import TWO_PI, as_params, build_plgc, run_circuit
from .lattice import LatticeGeometry
from .operators import hamiltonian_tcm
from .statevector import Statevector, fidelity

log = logging.getLogger(__name__)


class SpsaError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpsaConfig:
    """SPSA gains ``a_k = a0 / (k + 1 + A)**alpha`` and ``c_k = c0 / (k + 1)**gamma``.

    ``a0=None`` calibrates the step so the first update moves the parameters
    by ``target_step`` radians in the max norm, averaged over
    ``calibration_probes`` gradient estimates.  ``stability_offset=None``
    means ``A = 0.1 * max_iterations``.
    """

    max_iterations: int = 300
    a0: float | None = None
    c0: float = 0.1
    alpha: float = 0.602
    gamma: float = 0.101
    stability_offset: float | None = None
    seed: int = 42
    target_step: float = 0.1
    calibration_probes: int = 10

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.alpha <= 0 or self.gamma <= 0:
            raise ValueError("alpha and gamma must be positive")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.a0 is not None and self.a0 <= 0:
            raise ValueError("a0 must be positive")

    @property
    def offset(self) -> float:
        if self.stability_offset is None:
            return 0.1 * self.max_iterations
        return self.stability_offset

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class SpsaResult:
    theta: np.ndarray
    best_value: float
    trace: np.ndarray
    n_evaluations: int
    a0: float


def _evaluate(objective, theta, k) -> float:
    value = float(objective(theta))
    if not math.isfinite(value):
        raise SpsaError(f"objective returned {value} at iteration {k} for theta={theta.tolist()}")
    return value


def calibrate_a0(objective, theta0: np.ndarray, cfg: SpsaConfig, rng: np.random.Generator) -> float:
    total = 0.0
    for _ in range(cfg.calibration_probes):
        delta = rng.choice((-1.0, 1.0), size=theta0.shape)
        diff = objective(theta0 + cfg.c0 * delta) - objective(theta0 - cfg.c0 * delta)
        total += abs(diff) / (2.0 * cfg.c0)
    mean_grad = total / max(cfg.calibration_probes, 1)
    if mean_grad < 1e-12:
        mean_grad = 1.0
    return cfg.target_step * (1.0 + cfg.offset) ** cfg.alpha / mean_grad


def spsa_minimize(objective: Callable[[np.ndarray], float], theta0, cfg: SpsaConfig,
                  rng: np.random.Generator | None = None) -> SpsaResult:
    """Minimize ``objective`` by simultaneous perturbation.

    The returned parameters are the lowest-valued point evaluated anywhere
    in the run (calibration probes included), not the last iterate.
    ``trace[k]`` is the objective at the iterate produced by step ``k``.
    """
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    theta = np.array(theta0, dtype=np.float64)
    best = [np.inf, theta.copy()]
    n_evals = 0
    k = 0

    def evaluate(point: np.ndarray) -> float:
        nonlocal n_evals
        value = _evaluate(objective, point, k)
        n_evals += 1
        if value < best[0]:
            best[0], best[1] = value, point.copy()
        return value

    a0 = cfg.a0
    if a0 is None:
        a0 = calibrate_a0(evaluate, theta, cfg, rng)

    evaluate(theta)
    trace = np.empty(cfg.max_iterations)
    for k in range(cfg.max_iterations):
        ak = a0 / (k + 1 + cfg.offset) ** cfg.alpha
        ck = cfg.c0 / (k + 1) ** cfg.gamma
        delta = rng.choice((-1.0, 1.0), size=theta.shape)
        f_plus = evaluate(theta + ck * delta)
        f_minus = evaluate(theta - ck * delta)
        theta = theta - ak * (f_plus - f_minus) / (2.0 * ck) * delta
        trace[k] = evaluate(theta)
    return SpsaResult(np.mod(best[1], TWO_PI), float(best[0]), trace, n_evals, a0)


class EnergyObjective:
    """``theta -> <Psi(theta)| H_TCM(x) |Psi(theta)>`` on the statevector simulator.

    Amplitudes are simulated in ``float64``: every gate in the circuit is real.
    """

    def __init__(self, geom: LatticeGeometry, x: float):
        self.geom = geom
        self.x = float(x)
        self.hamiltonian = hamiltonian_tcm(geom, x)
        self.circuit = build_plgc(geom, np.zeros(geom.n_plaquettes))
        self._diag = self.hamiltonian.diagonal
        self._flips = self.hamiltonian.flip_terms
        self._program = [(g.name, g.qubits, g.slot) for g in self.circuit.gates()]
        self._psi = np.empty(1 << geom.n_qubits)
        self.n_calls = 0

    def state_amplitudes(self, thetas) -> np.ndarray:
        psi = self._psi
        psi.fill(0.0)
        psi[0] = 1.0
        for name, qubits, slot in self._program:
            if name == "cx":
                kernels.apply_cnot(psi, qubits[0], qubits[1])
            else:
                half = 0.5 * thetas[slot]
                kernels.apply_ry(psi, qubits[0], math.cos(half), math.sin(half))
        return psi

    def __call__(self, thetas) -> float:
        thetas = np.asarray(thetas, dtype=np.float64)
        if thetas.shape != (self.geom.n_plaquettes,):
            raise ValueError(f"expected {self.geom.n_plaquettes} parameters")
        self.n_calls += 1
        psi = self.state_amplitudes(thetas)
        energy = kernels.diag_expectation(psi, self._diag)
        for coeff, mask in self._flips:
            energy += coeff * kernels.flip_overlap(psi, mask).real
        return float(energy)

    def state(self, thetas) -> Statevector:
        return run_circuit(self.circuit, thetas)


@dataclass
class RestartOutcome:
    restart: int
    theta0: np.ndarray
    theta: np.ndarray
    energy: float
    trace: np.ndarray
    n_evaluations: int


@dataclass
class VqeResult:
    best_thetas: np.ndarray
    best_energy: float
    energy_trace: np.ndarray
    restart_energies: np.ndarray
    restart_fidelities: np.ndarray
    best_restart: int
    restarts: list[RestartOutcome] = field(repr=False, default_factory=list)

    @property
    def n_restarts(self) -> int:
        return len(self.restart_energies)


def _check_x(x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"field strength x must lie in [0, 1], got {x}")
    return x


def run_restart(geom: LatticeGeometry, x: float, cfg: SpsaConfig, restart: int,
                objective: EnergyObjective | None = None) -> RestartOutcome:
    """One SPSA run from random parameters; its RNG is seeded with ``seed ^ restart``."""
    x = _check_x(x)
    objective = EnergyObjective(geom, x) if objective is None else objective
    rng = np.random.default_rng(cfg.seed ^ restart)
    theta0 = rng.uniform(0.0, TWO_PI, geom.n_plaquettes)
    res = spsa_minimize(objective, theta0, cfg, rng=rng)
    log.debug("%dx%d x=%.3f restart %d: E=%.10f", geom.lx, geom.ly, x, restart, res.best_value)
    return RestartOutcome(restart, theta0, res.theta, res.best_value, res.trace, res.n_evaluations)


def collect_restarts(geom: LatticeGeometry, x: float,
                     outcomes: list[RestartOutcome]) -> VqeResult:
    """Pick the best restart and measure every restart's overlap with it."""
    outcomes = sorted(outcomes, key=lambda o: o.restart)
    energies = np.array([o.energy for o in outcomes])
    best = int(np.argmin(energies))
    objective = EnergyObjective(geom, x)
    best_state = objective.state(outcomes[best].theta)
    fids = np.array([fidelity(best_state, objective.state(o.theta)) for o in outcomes])
    return VqeResult(
        best_thetas=outcomes[best].theta.copy(),
        best_energy=float(energies[best]),
        energy_trace=outcomes[best].trace,
        restart_energies=energies,
        restart_fidelities=fids,
        best_restart=outcomes[best].restart,
        restarts=outcomes,
    )


def vqe_run(geom: LatticeGeometry, x: float, cfg: SpsaConfig | None = None,
            n_restarts: int = 10) -> VqeResult:
    """Best of ``n_restarts`` independent SPSA runs on the PLGC energy."""
    cfg = SpsaConfig() if cfg is None else cfg
    x = _check_x(x)
    if n_restarts < 1:
        raise ValueError("n_restarts must be at least 1")
    objective = EnergyObjective(geom, x)
    outcomes = [run_restart(geom, x, cfg, r, objective) for r in range(n_restarts)]
    return collect_restarts(geom, x, outcomes)


def parameter_shift_gradient(geom: LatticeGeometry, x: float, thetas,
                             objective: EnergyObjective | None = None) -> np.ndarray:
    """Exact gradient from ``[E(t + pi/2 e_p) - E(t - pi/2 e_p)] / 2``."""
    x = _check_x(x)
    thetas = as_params(thetas, geom.n_plaquettes)
    objective = EnergyObjective(geom, x) if objective is None else objective
    grad = np.empty(geom.n_plaquettes)
    for p in range(geom.n_plaquettes):
        shift = np.zeros(geom.n_plaquettes)
        shift[p] = 0.5 * math.pi
        grad[p] = 0.5 * (objective(thetas + shift) - objective(thetas - shift))
    return grad


def with_iterations(cfg: SpsaConfig, max_iterations: int) -> SpsaConfig:
    return replace(cfg, max_iterations=max_iterations)
