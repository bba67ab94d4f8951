"""
Binary Optimization Tests

Brute force, annealing, random search and the memristive solver
"""

import itertools
import math

import numpy as np
import pytest

from memristive_optimizer.errors import ConfigError, PositivityError
from memristive_optimizer.lyapunov import QuboInstance, to_qubo
from memristive_optimizer.models import MemristorParams, SourceVector
from memristive_optimizer.optimize import (AnnealSchedule, OptimizationMethod, OptimizationOutcome, brute_force,
                                           check_positivity, max_admissible_xi, memristive_minimize,
                                           pipeline_memristive_then_annealing, qubo_to_dynamics, random_search,
                                           simulated_annealing)
from memristive_optimizer.topology import circuit_projector, generate_er_circuit


def random_qubo(n: int, seed: int) -> QuboInstance:
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.normal(size=(n, n)), k=1)
    return QuboInstance(linear=rng.normal(size=n), quadratic=upper + upper.T)


def all_states(n: int) -> np.ndarray:
    return np.array(list(itertools.product([0, 1], repeat=n)), dtype=np.int8)


class TestBruteForce:
    """Test exhaustive minimization"""

    def test_single_variable(self):
        """Test E(w) = -w picks w = 1"""
        outcome = brute_force(QuboInstance(linear=[-1.0], quadratic=[[0.0]]))
        assert outcome.best_state.tolist() == [1]
        assert outcome.best_energy == -1.0
        assert outcome.evaluations == 2

    def test_tie_prefers_lowest_index(self):
        """Test a degenerate minimum returns the all-zero state"""
        qubo = QuboInstance(linear=[0.0, 0.0], quadratic=[[0.0, 0.5], [0.5, 0.0]])
        outcome = brute_force(qubo)
        assert outcome.best_state.tolist() == [0, 0]
        assert outcome.best_energy == 0.0

    def test_matches_independent_enumeration(self):
        """Test against an enumeration in the opposite bit order"""
        qubo = random_qubo(12, seed=3)
        energies = [qubo.energy(state) for state in all_states(12)]
        outcome = brute_force(qubo)
        assert outcome.best_energy == pytest.approx(min(energies), abs=1e-12)
        assert outcome.best_state.tolist() == all_states(12)[int(np.argmin(energies))].tolist()
        assert outcome.method is OptimizationMethod.BRUTE_FORCE

    def test_size_limit(self):
        """Test the enumeration refuses large instances"""
        with pytest.raises(ConfigError):
            brute_force(random_qubo(5, seed=0), limit=4)

    def test_bitstring(self):
        """Test the state renders as 0/1 characters"""
        outcome = brute_force(QuboInstance(linear=[1.0, -1.0, -1.0], quadratic=np.zeros((3, 3))))
        assert outcome.bitstring == "011"


class TestSimulatedAnnealing:
    """Test the single-flip Metropolis search"""

    def setup_method(self):
        self.qubo = random_qubo(12, seed=11)
        self.optimum = brute_force(self.qubo).best_energy
        self.schedule = AnnealSchedule(t0=10.0, rate=0.999, steps=6000)

    def test_reproducible(self):
        """Test equal seeds give identical outcomes"""
        first = simulated_annealing(self.qubo, self.schedule, seed=42)
        second = simulated_annealing(self.qubo, self.schedule, seed=42)
        assert np.array_equal(first.best_state, second.best_state)
        assert first.best_energy == second.best_energy

    def test_greedy_on_separable_instance(self):
        """Test T ~ 0 descends to the optimum of independent bits"""
        linear = np.random.default_rng(1).normal(size=8)
        qubo = QuboInstance(linear=linear, quadratic=np.zeros((8, 8)))
        outcome = simulated_annealing(qubo, AnnealSchedule(t0=1e-300, rate=0.5, steps=2000), seed=5)
        assert outcome.best_state.tolist() == (linear < 0).astype(int).tolist()

    def test_reaches_optimum_on_most_seeds(self):
        """Test small instances are usually solved exactly"""
        hits = sum(simulated_annealing(self.qubo, self.schedule, seed=seed).best_energy <= self.optimum + 1e-9
                   for seed in range(20))
        assert hits >= 16

    def test_energy_recomputed(self):
        """Test the reported energy belongs to the reported state"""
        outcome = simulated_annealing(self.qubo, self.schedule, seed=7)
        assert outcome.best_energy == self.qubo.energy(outcome.best_state)
        assert outcome.best_energy >= self.optimum - 1e-12
        assert outcome.wall_steps == self.schedule.steps

    def test_initial_state_shape(self):
        """Test a wrong-size starting state is refused"""
        with pytest.raises(ConfigError):
            simulated_annealing(self.qubo, self.schedule, seed=0, initial_state=np.zeros(3))

    def test_schedule_validation(self):
        """Test cooling rates must lie in (0, 1)"""
        with pytest.raises(ValueError):
            AnnealSchedule(t0=1.0, rate=1.0, steps=10)
        assert AnnealSchedule(t0=2.0, rate=0.5, steps=3).temperature(2) == 0.5


class TestRandomSearch:
    """Test the sampling baseline"""

    def setup_method(self):
        self.qubo = random_qubo(12, seed=4)
        self.optimum = brute_force(self.qubo)

    def test_exhaustive_sampler(self):
        """Test a sampler covering every state finds the optimum"""
        def every_state(count, n, rng):
            return all_states(n)[:count]

        outcome = random_search(self.qubo, 4096, seed=0, sampler=every_state)
        assert outcome.best_energy == pytest.approx(self.optimum.best_energy, abs=1e-12)

    def test_never_beats_optimum(self):
        """Test sampled energies are bounded by the exact minimum"""
        outcome = random_search(self.qubo, 100, seed=9)
        assert outcome.best_energy >= self.optimum.best_energy - 1e-12
        assert outcome.evaluations == 100
        assert outcome.best_energy == self.qubo.energy(outcome.best_state)

    def test_requires_samples(self):
        """Test zero samples is an error"""
        with pytest.raises(ConfigError):
            random_search(self.qubo, 0, seed=0)


class TestPositivity:
    """Test admission of general interaction matrices"""

    def setup_method(self):
        self.indefinite = np.array([[0.0, 2.0], [2.0, 0.0]])

    def test_max_admissible_xi(self):
        """Test the bisection finds -1 / lambda_min"""
        assert max_admissible_xi(self.indefinite) == pytest.approx(0.5, abs=1e-9)
        assert math.isinf(max_admissible_xi(np.eye(3)))

    def test_rejects_large_xi(self):
        """Test the error carries the admissible bound"""
        with pytest.raises(PositivityError) as excinfo:
            check_positivity(self.indefinite, 1.0)
        assert excinfo.value.max_admissible_xi == pytest.approx(0.5, abs=1e-9)

    def test_accepts_small_xi(self):
        """Test xi below the bound passes"""
        check_positivity(self.indefinite, 0.4)

    def test_rejects_asymmetric(self):
        """Test non-symmetric matrices are refused"""
        with pytest.raises(ConfigError):
            check_positivity(np.array([[1.0, 0.5], [0.0, 1.0]]), 1.0)

    def test_projector_always_admitted(self):
        """Test loop projectors skip the eigenvalue check"""
        check_positivity(circuit_projector(generate_er_circuit(6, 0.8, seed=0)), 1e6)


class TestMemristiveMinimize:
    """Test the circuit relaxation as a solver"""

    def test_diagonal_instance(self):
        """Test uncoupled memristors settle on the QUBO optimum"""
        params = MemristorParams(alpha=0.1, beta=1.0, xi=1.0)
        rng = np.random.default_rng(2)
        s = rng.choice([-1.0, 1.0], size=8) * rng.uniform(0.5, 1.0, size=8)
        omega = np.eye(8)
        outcome = memristive_minimize(omega, SourceVector(s=s), params, dt=0.1, steps=200)
        optimum = brute_force(to_qubo(omega, s, params))
        assert outcome.best_state.tolist() == optimum.best_state.tolist()
        assert outcome.best_energy == pytest.approx(optimum.best_energy)
        assert outcome.method is OptimizationMethod.MEMRISTIVE

    def test_circuit_energy_is_asymptotic_lyapunov(self):
        """Test the outcome reports L_a of the rounded state"""
        omega = circuit_projector(generate_er_circuit(8, 0.7, seed=3))
        params = MemristorParams(alpha=0.1, beta=1.0, xi=10.0)
        sources = SourceVector.uniform_range(omega.size, -0.5, 0.5, np.random.default_rng(0))
        outcome = memristive_minimize(omega, sources, params, dt=0.1, steps=50)
        assert outcome.best_energy == pytest.approx(to_qubo(omega, sources, params).energy(outcome.best_state))
        assert outcome.evaluations == 50

    def test_positivity_enforced(self):
        """Test an inadmissible xi fails before integrating"""
        params = MemristorParams(alpha=0.1, beta=1.0, xi=1.0)
        with pytest.raises(PositivityError):
            memristive_minimize(np.array([[0.0, 2.0], [2.0, 0.0]]), np.ones(2), params, dt=0.1, steps=5)


class TestQuboEmbedding:
    """Test mapping arbitrary QUBOs onto circuit inputs"""

    def setup_method(self):
        self.qubo = random_qubo(8, seed=6).model_copy(update={"offset": 1.5})
        self.params = MemristorParams(alpha=0.5, beta=1.0, xi=2.0)
        self.mapping = qubo_to_dynamics(self.qubo, self.params)

    def test_energies_preserved(self):
        """Test the circuit QUBO equals the original on every state"""
        states = all_states(8)
        assert np.allclose(self.mapping.qubo().energies(states), self.qubo.energies(states), atol=1e-9)

    def test_omega_positive_definite(self):
        """Test the diagonal shift keeps Omega positive definite"""
        assert np.linalg.eigvalsh(self.mapping.omega)[0] > 0.0
        check_positivity(self.mapping.omega, self.params.xi)

    def test_requires_decay(self):
        """Test alpha = 0 cannot carry couplings"""
        with pytest.raises(ConfigError):
            qubo_to_dynamics(self.qubo, MemristorParams(alpha=0.0, beta=1.0, xi=1.0))

    def test_pipeline_without_refinement(self):
        """Test a missing schedule returns the memristive stage"""
        first = memristive_minimize(self.mapping.omega, self.mapping.sources, self.params, 0.1, 40,
                                    objective=self.mapping.qubo())
        outcome = pipeline_memristive_then_annealing(self.mapping, None, seed=1, dt=0.1, steps=40)
        assert outcome.best_state.tolist() == first.best_state.tolist()
        assert outcome.stage_energies == [first.best_energy, first.best_energy]
        assert outcome.method is OptimizationMethod.MEMRISTIVE_THEN_ANNEALING

    def test_pipeline_refines(self):
        """Test annealing from the rounded state never worsens it"""
        schedule = AnnealSchedule(t0=0.025, rate=0.999, steps=400)
        outcome = pipeline_memristive_then_annealing(self.mapping, schedule, seed=1, dt=0.1, steps=40)
        assert outcome.best_energy <= outcome.stage_energies[0] + 1e-9
        assert outcome.best_energy >= brute_force(self.qubo).best_energy - 1e-9
        assert outcome.wall_steps == 440
        assert outcome.seed == 1

    def test_outcome_requires_binary_state(self):
        """Test outcomes reject fractional states"""
        with pytest.raises(ValueError):
            OptimizationOutcome(best_state=[0.5], best_energy=0.0, evaluations=1, wall_steps=1, method="random")
