"""
Memristor Dynamics Tests
"""

import numpy as np
import pytest

from memristive_optimizer.dynamics import (binarize, binary_fraction, network_step, simulate,
                                           single_memristor_step)
from memristive_optimizer.errors import DimensionMismatchError
from memristive_optimizer.models import MemristorParams, NetworkState, SourceVector
from memristive_optimizer.topology import circuit_projector, generate_er_circuit


class TestSingleMemristor:
    """Test the isolated device update"""

    def test_no_drive_no_decay(self):
        """Test a memristor at rest stays put"""
        params = MemristorParams(alpha=0.0, beta=1.0, xi=10.0)
        assert single_memristor_step(0.5, 0.0, params, 0.1) == 0.5

    def test_decay_term(self):
        """Test the alpha w drift without sources"""
        params = MemristorParams(alpha=0.2, beta=1.0, xi=10.0)
        assert single_memristor_step(0.5, 0.0, params, 0.1) == pytest.approx(0.5 + 0.1 * 0.2 * 0.5)

    def test_clamped_to_unit_box(self):
        """Test the result is clipped into [0, 1]"""
        params = MemristorParams(alpha=1.0, beta=1.0, xi=1.0)
        assert single_memristor_step(0.99, 0.0, params, 1.0) == 1.0
        assert single_memristor_step(0.01, 100.0, params, 1.0) == 0.0

    def test_drive_scaled_by_resistance(self):
        """Test the source term is R_on s / (beta R(w))"""
        params = MemristorParams.from_resistances(0.0, 2.0, r_on=1.0, r_off=3.0)
        # R(0.5) = 2, so the drift is -(1/2) * 1 / 2
        assert single_memristor_step(0.5, 1.0, params, 0.1) == pytest.approx(0.5 - 0.1 * 0.25)

    def test_rejects_non_positive_dt(self):
        """Test dt must be positive"""
        params = MemristorParams(alpha=0.0, beta=1.0, xi=1.0)
        with pytest.raises(ValueError):
            single_memristor_step(0.5, 0.0, params, 0.0)


class TestNetworkStep:
    """Test the coupled network update"""

    def setup_method(self):
        self.omega = circuit_projector(generate_er_circuit(8, 0.7, seed=0))
        self.n = self.omega.size
        self.params = MemristorParams(alpha=0.1, beta=1.0, xi=10.0)

    def test_time_advances(self):
        """Test the step carries the clock forward"""
        state = NetworkState.uniform(self.n)
        sources = SourceVector(s=np.zeros(self.n))
        after = network_step(state, self.omega, sources, self.params, 0.25)
        assert after.time == pytest.approx(0.25)

    def test_zero_sources_pure_decay(self):
        """Test S = 0 reduces to w + dt alpha w"""
        state = NetworkState.uniform(self.n, 0.4)
        after = network_step(state, self.omega, np.zeros(self.n), self.params, 0.1)
        assert np.allclose(after.w, 0.4 * (1.0 + 0.1 * 0.1))

    def test_dimension_mismatch(self):
        """Test inconsistent shapes are refused"""
        with pytest.raises(DimensionMismatchError):
            network_step(NetworkState.uniform(self.n + 1), self.omega, np.zeros(self.n), self.params, 0.1)

    def test_single_memristor_agreement(self):
        """Test a one-memristor network follows the isolated device update"""
        params = MemristorParams(alpha=0.2, beta=1.5, xi=10.0)
        for w in (0.1, 0.5, 0.9):
            for s in (-0.3, 0.7):
                after = network_step(NetworkState(w=[w]), np.ones((1, 1)), [s], params, 0.05)
                assert after.w[0] == pytest.approx(single_memristor_step(w, s, params, 0.05), abs=1e-14)

    def test_identity_projector_decouples(self):
        """Test Omega = I updates every memristor on its own"""
        rng = np.random.default_rng(2)
        w = rng.uniform(0.1, 0.9, size=4)
        s = rng.uniform(-0.5, 0.5, size=4)
        after = network_step(NetworkState(w=w), np.eye(4), s, self.params, 0.1)
        expected = [single_memristor_step(w[i], s[i], self.params, 0.1) for i in range(4)]
        assert np.allclose(after.w, expected, atol=1e-14)

    def test_triangle_matches_dense_inverse(self):
        """Test one triangle loop against an explicit inverse of I + xi Omega W"""
        omega = np.full((3, 3), 1.0 / 3.0)
        w = np.array([0.2, 0.5, 0.7])
        s = np.array([0.3, -0.1, 0.2])
        inverse = np.linalg.inv(np.eye(3) + self.params.xi * omega @ np.diag(w))
        expected = np.clip(w + 0.1 * (self.params.alpha * w - inverse @ omega @ s / self.params.beta), 0.0, 1.0)
        after = network_step(NetworkState(w=w), omega, s, self.params, 0.1)
        assert np.allclose(after.w, expected, atol=1e-12)

    def test_step_size_robustness(self):
        """Test halving dt moves the state at a fixed time by O(dt)"""
        sources = SourceVector.uniform_range(self.n, -0.05, 0.05, np.random.default_rng(8))
        coarse = simulate(NetworkState.uniform(self.n), self.omega, sources, self.params, 0.02, 100)
        fine = simulate(NetworkState.uniform(self.n), self.omega, sources, self.params, 0.01, 200)
        assert coarse.final_state.time == pytest.approx(fine.final_state.time)
        assert np.all(fine.states > 0.0) and np.all(fine.states < 1.0)
        assert np.max(np.abs(coarse.terminal - fine.terminal)) <= 1e-3


class TestBinarize:
    """Test rounding helpers"""

    def test_threshold(self):
        """Test values at 0.5 round up"""
        assert binarize([0.0, 0.49, 0.5, 1.0]).tolist() == [0, 0, 1, 1]

    def test_binary_fraction(self):
        """Test the share of saturated memristors"""
        assert binary_fraction([0.0, 1.0, 0.5, 0.9995]) == pytest.approx(0.75)


class TestSimulate:
    """Test trace recording and Lyapunov behaviour"""

    def setup_method(self):
        self.omega = circuit_projector(generate_er_circuit(8, 0.7, seed=0))
        self.n = self.omega.size
        self.rng = np.random.default_rng(5)

    def test_record_every(self):
        """Test states are kept at step 0 and every k steps"""
        params = MemristorParams(alpha=0.1, beta=1.0, xi=1.0)
        sources = SourceVector.uniform_range(self.n, -0.05, 0.05, self.rng)
        trace = simulate(NetworkState.uniform(self.n), self.omega, sources, params, 0.1, 10, record_every=5)
        assert trace.states.shape == (3, self.n)
        assert np.allclose(trace.times, [0.0, 0.5, 1.0])
        assert trace.final_state.time == pytest.approx(1.0)

    def test_final_state_kept_when_not_recorded(self):
        """Test the last state is available even between records"""
        params = MemristorParams(alpha=0.1, beta=1.0, xi=1.0)
        trace = simulate(NetworkState.uniform(self.n), self.omega, np.zeros(self.n), params, 0.1, 7,
                         record_every=5)
        assert trace.states.shape[0] == 2
        assert np.allclose(trace.terminal, 0.5 * 1.01 ** 7)

    def test_equilibrium_is_constant(self):
        """Test alpha = 0 and S = 0 leaves everything unchanged"""
        params = MemristorParams(alpha=0.0, beta=1.0, xi=10.0)
        w0 = NetworkState.random(self.n, self.rng)
        trace = simulate(w0, self.omega, np.zeros(self.n), params, 0.1, 20)
        assert np.all(trace.states == w0.w)
        assert np.all(trace.lyapunov == trace.lyapunov[0])

    def test_lyapunov_descends_without_decay(self):
        """Test L decreases step by step when alpha = 0 inside the box"""
        params = MemristorParams(alpha=0.0, beta=1.0, xi=10.0)
        sources = SourceVector.uniform_range(self.n, -0.05, 0.05, self.rng)
        trace = simulate(NetworkState.uniform(self.n), self.omega, sources, params, 0.1, 20)
        assert np.all(trace.states > 0.0) and np.all(trace.states < 1.0)
        assert np.all(np.diff(trace.lyapunov) <= 1e-12)

    def test_lyapunov_descends_with_decay(self):
        """Test L decreases with alpha = 0.1 and weak sources until the first memristor saturates"""
        params = MemristorParams(alpha=0.1, beta=1.0, xi=10.0)
        sources = SourceVector.uniform_range(self.n, -0.05, 0.05, self.rng)
        trace = simulate(NetworkState.uniform(self.n), self.omega, sources, params, 0.1, 100)
        saturated = np.flatnonzero(trace.clamped_counts > 0)
        free = saturated[0] if saturated.size else trace.lyapunov.size
        assert free >= 10
        assert np.all(np.diff(trace.lyapunov[:free]) <= 1e-12)
        assert trace.lyapunov[free - 1] < trace.lyapunov[0]

    def test_states_stay_in_box(self):
        """Test large drives saturate rather than escape"""
        params = MemristorParams(alpha=1.0, beta=1.0, xi=10.0)
        sources = SourceVector.uniform_range(self.n, -5.0, 5.0, self.rng)
        trace = simulate(NetworkState.uniform(self.n), self.omega, sources, params, 0.5, 50)
        assert trace.states.min() >= 0.0 and trace.states.max() <= 1.0
        assert trace.clamped_counts[-1] > 0

    def test_lyapunov_matches_asymptotic_on_corners(self):
        """Test L and L_a agree once the terminal state is binary"""
        params = MemristorParams(alpha=1.0, beta=1.0, xi=10.0)
        sources = SourceVector.uniform_range(self.n, -5.0, 5.0, self.rng)
        trace = simulate(NetworkState.uniform(self.n), self.omega, sources, params, 0.5, 400)
        if binary_fraction(trace.terminal, 0.0) == 1.0:
            assert trace.lyapunov[-1] == pytest.approx(trace.lyapunov_asymptotic[-1], abs=1e-9)

    def test_rejects_bad_arguments(self):
        """Test steps and dt are validated"""
        params = MemristorParams(alpha=0.1, beta=1.0, xi=1.0)
        with pytest.raises(ValueError):
            simulate(NetworkState.uniform(self.n), self.omega, np.zeros(self.n), params, 0.1, 0)
        with pytest.raises(ValueError):
            simulate(NetworkState.uniform(self.n), self.omega, np.zeros(self.n), params, -0.1, 5)
