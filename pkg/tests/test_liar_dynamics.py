import itertools
import math
import unittest
from pathlib import Path
import sys

import numpy as np
from scipy.linalg import expm

repo_root = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(repo_root / "scripts"))

from errors import GridError, LiarConfigError
from liar_dynamics import (
    Claim,
    LiarConfig,
    build_step_matrix,
    cycle_structure,
    extract_hamiltonian,
    find_contradiction_times,
    inference_step,
    initial_state,
    is_paradoxical,
    parse_claim,
    parse_config,
    parse_grid,
    parse_grid_value,
    probability_trace,
    reasoning_sequence,
    time_grid,
)
from rng import make_rng

SCENARIOS = repo_root / "scenarios"
TAU = math.pi / 2


def load(name):
    return parse_config((SCENARIOS / name).read_text())


def single_cycle_targets(m):
    """Every target permutation of 1..m that forms one closed chain."""
    for rest in itertools.permutations(range(2, m + 1)):
        order = (1,) + rest
        targets = [0] * m
        for k, sentence in enumerate(order):
            targets[sentence - 1] = order[(k + 1) % m]
        yield targets


class ParseTests(unittest.TestCase):
    """Tests for parse_config and parse_claim."""

    def test_five_sentence_fixture(self):
        """Test the bundled five-sentence chain."""
        config = load("liar_5.txt")
        self.assertEqual(config.m, 5)
        self.assertEqual(config.sentences[0], (3, False))
        self.assertEqual(config.sentences[3], (1, True))
        self.assertEqual(parse_config(config.to_text()), config)

    def test_inline_separators(self):
        """Test that ';' separates sentences on one line."""
        config = parse_config("1: sentence 2 is true; 2: sentence 1 is false")
        self.assertEqual(config.sentences, ((2, True), (1, False)))

    def test_comments_may_hold_separators(self):
        """Test that ';' and '/' inside comments are ignored."""
        text = (
            "# two sentences; one asserts falsehood / the other truth\n"
            "1: sentence 2 is true  # first; second\n"
            "2: sentence 1 is false / # trailing / note\n"
        )
        self.assertEqual(parse_config(text).sentences, ((2, True), (1, False)))

    def test_separate_chains_rejected(self):
        """Test that two closed chains are rejected."""
        with self.assertRaises(LiarConfigError) as ctx:
            parse_config("1: sentence 1 is true\n2: sentence 2 is false\n")
        self.assertIn("2 separate chains", ctx.exception.message)

    def test_dangling_reference(self):
        """Test that a pointer to a missing sentence is rejected."""
        with self.assertRaises(LiarConfigError):
            parse_config("1: sentence 3 is true\n2: sentence 1 is true\n")

    def test_malformed_line(self):
        """Test that sentence numbers must be digits."""
        with self.assertRaises(LiarConfigError):
            parse_config("1: sentence two is true\n")

    def test_duplicate_sentence(self):
        """Test that a sentence cannot be defined twice."""
        with self.assertRaises(LiarConfigError):
            parse_config("1: sentence 1 is true\n1: sentence 1 is false\n")

    def test_claims(self):
        """Test claim parsing."""
        self.assertEqual(parse_claim("3:false"), Claim(3, False))
        self.assertEqual(parse_claim("1:T"), Claim(1, True))
        with self.assertRaises(LiarConfigError):
            parse_claim("true")


class DiscreteReasoningTests(unittest.TestCase):
    """Tests for step-by-step inference."""

    def test_inference_follows_assertion(self):
        """Test inference_step on both truth values."""
        config = load("liar_5.txt")
        # 1 says "3 is false": 1 true gives 3 false, 1 false gives 3 true
        self.assertEqual(inference_step(Claim(1, True), config), Claim(3, False))
        self.assertEqual(inference_step(Claim(1, False), config), Claim(3, True))

    def test_five_steps_reach_the_negation(self):
        """Test that the five-sentence chain negates the hypothesis after five steps."""
        config = load("liar_5.txt")
        sequence = reasoning_sequence(config, Claim(1, True), 10)
        self.assertEqual(sequence[5], Claim(1, False))
        self.assertEqual(sequence[10], Claim(1, True))

    def test_paradox_matches_exhaustive_iteration(self):
        """Test is_paradoxical against brute-force iteration for m <= 5."""
        for m in range(1, 6):
            for targets in single_cycle_targets(m):
                for signs in itertools.product((True, False), repeat=m):
                    config = LiarConfig(m, tuple(zip(targets, signs)))
                    reached = reasoning_sequence(config, Claim(1, True), 2 * m)
                    self.assertEqual(is_paradoxical(config), Claim(1, False) in reached)

    def test_cycle_structure(self):
        """Test cycle lengths of the step permutation."""
        self.assertEqual(cycle_structure(build_step_matrix(load("liar_5.txt"))), [10])
        self.assertEqual(cycle_structure(build_step_matrix(load("liar_classic.txt"))), [2])
        self.assertEqual(cycle_structure(build_step_matrix(load("truth_teller.txt"))), [1, 1])
        self.assertEqual(cycle_structure(build_step_matrix(load("liar_pair_consistent.txt"))), [2, 2])


class HamiltonianTests(unittest.TestCase):
    """Tests for extract_hamiltonian and EvolutionOperator."""

    def test_exponential_reproduces_step(self):
        """Test that exp(tau H) = U_D and H is anti-Hermitian."""
        for name in ("liar_5.txt", "liar_classic.txt", "truth_teller.txt", "liar_pair_consistent.txt"):
            step = build_step_matrix(load(name))
            operator = extract_hamiltonian(step, TAU)
            np.testing.assert_allclose(expm(TAU * operator.H), step.matrix, atol=1e-10)
            np.testing.assert_allclose(operator.H, -operator.H.conj().T, atol=1e-12)

    def test_phases_on_principal_branch(self):
        """Test that eigenphases lie in (-pi, pi]."""
        operator = extract_hamiltonian(build_step_matrix(load("liar_5.txt")), TAU)
        self.assertTrue(np.all(operator.phases > -math.pi))
        self.assertTrue(np.all(operator.phases <= math.pi))
        self.assertTrue(np.any(np.abs(operator.phases - math.pi) < 1e-9))

    def test_evolution_is_unitary(self):
        """Test that U(t) preserves norms for random t and x."""
        operator = extract_hamiltonian(build_step_matrix(load("liar_5.txt")), TAU)
        rng = make_rng(31)
        for t in rng.uniform(0.0, 20.0, size=25):
            x = rng.normal(size=10) + 1j * rng.normal(size=10)
            self.assertAlmostEqual(np.linalg.norm(operator.at(t) @ x), np.linalg.norm(x), delta=1e-10)

    def test_group_law(self):
        """Test that U(s) U(t) = U(s + t)."""
        operator = extract_hamiltonian(build_step_matrix(load("liar_5.txt")), TAU)
        rng = make_rng(32)
        for s, t in rng.uniform(0.0, 20.0, size=(25, 2)):
            np.testing.assert_allclose(operator.at(s) @ operator.at(t), operator.at(s + t), atol=1e-9)

    def test_whole_steps_reproduce_step_powers(self):
        """Test that U(k tau) = U_D^k for k = 0..2m."""
        for name in ("liar_5.txt", "liar_classic.txt", "truth_teller.txt", "liar_pair_consistent.txt"):
            config = load(name)
            step = build_step_matrix(config)
            operator = extract_hamiltonian(step, TAU)
            for k in range(2 * config.m + 1):
                np.testing.assert_allclose(
                    operator.at(k * TAU), np.linalg.matrix_power(step.matrix, k), atol=1e-9
                )

    def test_tau_must_be_positive(self):
        """Test that tau must be positive."""
        with self.assertRaises(LiarConfigError):
            extract_hamiltonian(build_step_matrix(load("liar_classic.txt")), 0.0)


class TraceTests(unittest.TestCase):
    """Tests for probability_trace and find_contradiction_times."""

    def test_initial_state_is_projected_hypothesis(self):
        """Test the initial state for a false hypothesis."""
        psi = initial_state(load("liar_5.txt"), Claim(2, False))
        expected = np.zeros(10)
        expected[6] = 1.0
        np.testing.assert_allclose(psi, expected)

    def test_five_sentence_contradiction(self):
        """Test the negation at 5 pi / 2 and the return at 5 pi."""
        config = load("liar_5.txt")
        times = np.array([0.0, 5 * math.pi / 2, 5 * math.pi])
        trace = probability_trace(config, Claim(1, True), times)
        self.assertAlmostEqual(trace.probability(Claim(1, True))[0], 1.0, delta=1e-9)
        self.assertAlmostEqual(trace.probability(Claim(1, False))[1], 1.0, delta=1e-9)
        self.assertAlmostEqual(trace.probability(Claim(1, True))[2], 1.0, delta=1e-9)

    def test_contradiction_times_on_default_grid(self):
        """Test contradiction times on the default grid."""
        config = load("liar_5.txt")
        times = parse_grid("0:10pi:pi/20")
        trace = probability_trace(config, Claim(1, True), times)
        np.testing.assert_allclose(trace.probs.sum(axis=1), 1.0, atol=1e-9)
        found = find_contradiction_times(trace, Claim(1, True))
        self.assertEqual(len(found), 2)
        self.assertAlmostEqual(found[0], 5 * math.pi / 2, delta=1e-9)
        self.assertAlmostEqual(found[1], 15 * math.pi / 2, delta=1e-9)

    def test_integer_steps_match_discrete_reasoning(self):
        """Test that whole steps land on the discrete sequence."""
        config = load("liar_5.txt")
        hypothesis = Claim(4, False)
        sequence = reasoning_sequence(config, hypothesis, 12)
        trace = probability_trace(config, hypothesis, TAU * np.arange(13))
        for k, claim in enumerate(sequence):
            self.assertAlmostEqual(trace.probability(claim)[k], 1.0, delta=1e-9)

    def test_classic_liar_oscillates(self):
        """Test that the two-claim liar follows sin^2 t."""
        times = time_grid(0.0, 2 * math.pi, math.pi / 40)
        trace = probability_trace(load("liar_classic.txt"), Claim(1, True), times)
        np.testing.assert_allclose(trace.probability(Claim(1, False)), np.sin(times) ** 2, atol=1e-12)
        self.assertEqual(trace.probs.shape, (len(times), 2))

    def test_truth_teller_never_contradicts(self):
        """Test that a truth teller stays put."""
        trace = probability_trace(load("truth_teller.txt"), Claim(1, True), parse_grid("0:10pi:pi/20"))
        self.assertEqual(find_contradiction_times(trace, Claim(1, True)), [])
        np.testing.assert_allclose(trace.probability(Claim(1, True)), 1.0, atol=1e-12)

    def test_rows_are_time_major(self):
        """Test CSV row ordering."""
        trace = probability_trace(load("liar_classic.txt"), Claim(1, True), [0.0, 1.0])
        rows = trace.rows()
        self.assertEqual([label for _, label, _ in rows], ["1:true", "1:false", "1:true", "1:false"])
        self.assertEqual(rows[0][0], 0.0)

    def test_empty_grid(self):
        """Test that an empty grid is rejected."""
        with self.assertRaises(GridError):
            probability_trace(load("liar_classic.txt"), Claim(1, True), [])

    def test_hypothesis_outside_chain(self):
        """Test that the hypothesis must name an existing sentence."""
        with self.assertRaises(LiarConfigError):
            probability_trace(load("liar_classic.txt"), Claim(2, True), [0.0])


class GridTests(unittest.TestCase):
    """Tests for time-grid parsing."""

    def test_pi_values(self):
        """Test pi multiples and fractions."""
        self.assertAlmostEqual(parse_grid_value("pi"), math.pi)
        self.assertAlmostEqual(parse_grid_value("10pi"), 10 * math.pi)
        self.assertAlmostEqual(parse_grid_value("5pi/2"), 5 * math.pi / 2)
        self.assertAlmostEqual(parse_grid_value("pi/20"), math.pi / 20)
        self.assertEqual(parse_grid_value("2.5"), 2.5)

    def test_default_grid_is_inclusive(self):
        """Test that the stop value is included."""
        grid = parse_grid("0:10pi:pi/20")
        self.assertEqual(len(grid), 201)
        self.assertAlmostEqual(grid[-1], 10 * math.pi, delta=1e-12)

    def test_bad_grids(self):
        """Test malformed grids."""
        with self.assertRaises(GridError):
            parse_grid("0:10pi")
        with self.assertRaises(GridError):
            parse_grid("0:pi:0")
        with self.assertRaises(GridError):
            parse_grid_value("tau")
        with self.assertRaises(GridError):
            time_grid(1.0, 0.0, 0.1)


if __name__ == "__main__":
    unittest.main()
