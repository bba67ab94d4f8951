"""
Portfolio Selection Tests

File format, Markowitz objective and its circuit mapping
"""

import itertools
import logging

import numpy as np
import pytest

from memristive_optimizer.errors import PortfolioFormatError
from memristive_optimizer.optimize import brute_force, check_positivity, memristive_minimize
from memristive_optimizer.portfolio import (PortfolioProblem, load_portfolio, markowitz_to_dynamics,
                                            markowitz_value, write_portfolio)

TWO_ASSETS = """2
0.01 0.3
0.02 0.4
1 1 1
1 2 0.5
2 2 1
"""


def random_problem(n: int, seed: int, tradeoff: float = 1.0) -> PortfolioProblem:
    rng = np.random.default_rng(seed)
    factors = rng.normal(size=(n, n))
    covariance = factors @ factors.T / n + 0.1 * np.eye(n)
    return PortfolioProblem(returns=rng.normal(0.0, 0.5, size=n), covariance=covariance, tradeoff=tradeoff)


class TestLoadPortfolio:
    """Test the benchmark file reader"""

    def setup_method(self):
        self.rows = TWO_ASSETS.splitlines()

    def write(self, tmp_path, lines):
        path = tmp_path / "port.txt"
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_two_assets(self, tmp_path):
        """Test covariance is correlation times the standard deviations"""
        problem = load_portfolio(self.write(tmp_path, self.rows), tradeoff=2.0)
        assert np.allclose(problem.covariance, [[0.09, 0.06], [0.06, 0.16]], atol=1e-12)
        assert problem.returns.tolist() == [0.01, 0.02]
        assert problem.tradeoff == 2.0

    def test_blank_lines_ignored(self, tmp_path):
        """Test empty lines do not shift the layout"""
        lines = self.rows[:2] + [""] + self.rows[2:]
        assert load_portfolio(self.write(tmp_path, lines)).size == 2

    def test_self_correlation(self, tmp_path):
        """Test a diagonal entry other than 1 names its line"""
        lines = list(self.rows)
        lines[3] = "1 1 0.9"
        with pytest.raises(PortfolioFormatError) as excinfo:
            load_portfolio(self.write(tmp_path, lines))
        assert excinfo.value.line_number == 4

    def test_correlation_range(self, tmp_path):
        """Test correlations beyond one are refused"""
        lines = list(self.rows)
        lines[4] = "1 2 1.5"
        with pytest.raises(PortfolioFormatError) as excinfo:
            load_portfolio(self.write(tmp_path, lines))
        assert excinfo.value.line_number == 5

    def test_missing_pair(self, tmp_path):
        """Test every pair must be listed"""
        with pytest.raises(PortfolioFormatError, match="missing correlation"):
            load_portfolio(self.write(tmp_path, self.rows[:4]))

    def test_duplicate_pair(self, tmp_path):
        """Test a pair may appear only once"""
        with pytest.raises(PortfolioFormatError, match="duplicate"):
            load_portfolio(self.write(tmp_path, self.rows + ["2 1 0.5"]))

    def test_malformed_line(self, tmp_path):
        """Test unparsable numbers report their line"""
        lines = list(self.rows)
        lines[2] = "0.02 abc"
        with pytest.raises(PortfolioFormatError) as excinfo:
            load_portfolio(self.write(tmp_path, lines))
        assert excinfo.value.line_number == 3

    def test_truncated_file(self, tmp_path):
        """Test a file shorter than its asset count"""
        with pytest.raises(PortfolioFormatError):
            load_portfolio(self.write(tmp_path, self.rows[:2]))

    def test_round_trip(self, tmp_path):
        """Test writing then reading preserves the covariance"""
        problem = random_problem(6, seed=1)
        path = tmp_path / "written.txt"
        write_portfolio(problem, path)
        loaded = load_portfolio(path)
        assert np.max(np.abs(loaded.covariance - problem.covariance)) <= 1e-12
        assert np.allclose(loaded.returns, problem.returns, atol=1e-15)


class TestPortfolioProblem:
    """Test problem validation"""

    def test_rejects_asymmetric(self):
        """Test the covariance must be symmetric"""
        with pytest.raises(ValueError):
            PortfolioProblem(returns=[0.0, 0.0], covariance=[[1.0, 0.2], [0.1, 1.0]], tradeoff=1.0)

    def test_rejects_size_mismatch(self):
        """Test returns and covariance must agree"""
        with pytest.raises(ValueError):
            PortfolioProblem(returns=[0.0], covariance=np.eye(2), tradeoff=1.0)

    def test_markowitz_value(self):
        """Test M on a hand-checked selection"""
        problem = PortfolioProblem(returns=[0.1, 0.2], covariance=[[0.04, 0.01], [0.01, 0.09]], tradeoff=2.0)
        # 0.1 - 0.04 + 0.2 - 0.09 - 2 * 0.01
        assert markowitz_value(problem, [1, 1]) == pytest.approx(0.15)
        assert markowitz_value(problem, [0, 0]) == 0.0


class TestMarkowitzMapping:
    """Test L_a = -M for the circuit embedding"""

    @pytest.mark.parametrize("n,alpha", [(10, None), (12, 0.7)])
    def test_exact_on_every_selection(self, n, alpha):
        """Test M + L_a vanishes on every binary state"""
        problem = random_problem(n, seed=n, tradeoff=1.5)
        qubo = markowitz_to_dynamics(problem, alpha=alpha).qubo()
        for w in itertools.product([0, 1], repeat=n):
            assert abs(markowitz_value(problem, w) + qubo.energy(w)) <= 1e-8

    def test_nonlinearity_from_tradeoff(self):
        """Test xi = p / (2 alpha)"""
        mapping = markowitz_to_dynamics(random_problem(4, seed=0, tradeoff=3.0), alpha=0.5)
        assert mapping.params.xi == pytest.approx(3.0)
        assert np.allclose(mapping.omega, -random_problem(4, seed=0).covariance)

    def test_default_alpha_admissible(self):
        """Test the automatic alpha keeps I + xi Omega positive definite"""
        mapping = markowitz_to_dynamics(random_problem(8, seed=2))
        check_positivity(mapping.omega, mapping.params.xi)
        assert np.linalg.eigvalsh(np.eye(8) + mapping.params.xi * mapping.omega)[0] == pytest.approx(0.5)

    def test_no_return_selects_nothing(self):
        """Test pure risk is minimized by the empty portfolio"""
        problem = PortfolioProblem(returns=np.zeros(5), covariance=np.diag([0.1, 0.2, 0.3, 0.4, 0.5]),
                                   tradeoff=10.0)
        outcome = brute_force(markowitz_to_dynamics(problem).qubo())
        assert outcome.best_state.tolist() == [0] * 5

    def test_memristive_run_reports_negative_markowitz(self):
        """Test the solver energy is -M of its selection"""
        problem = random_problem(6, seed=5)
        mapping = markowitz_to_dynamics(problem)
        outcome = memristive_minimize(mapping.omega, mapping.sources, mapping.params, 0.1, 30,
                                      objective=mapping.qubo())
        assert outcome.best_energy == pytest.approx(-markowitz_value(problem, outcome.best_state), abs=1e-9)

    def test_ill_conditioned_warning(self, caplog):
        """Test a nearly singular covariance is logged"""
        problem = PortfolioProblem(returns=[0.1, 0.1], covariance=np.diag([1.0, 1e-8]), tradeoff=1.0)
        with caplog.at_level(logging.WARNING, logger="memristive_optimizer"):
            markowitz_to_dynamics(problem)
        assert "condition number" in caplog.text
