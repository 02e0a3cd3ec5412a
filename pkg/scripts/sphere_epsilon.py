#!/usr/bin/env python3
"""
Sphere-elastic model and its epsilon generalization.

A state is a point v on the unit sphere. Measuring along axis u stretches
an elastic from u to -u that can only break inside a segment of length
2*epsilon around its middle; the state falls orthogonally onto the elastic
(foot-point c = u.v) and is pulled to the end on its side of the break.
epsilon = 1 is the spin-1/2 model, epsilon = 0 is deterministic.

Also runs the three-question opinion poll on a uniform respondent
population.
"""

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from config import (
    DEFAULT_POPULATION,
    DEFAULT_SEED,
    FAN_ADJACENT_DEGREES,
    POLL_CHUNK_SIZE,
    POLL_EPSILON,
    POLL_WORKERS,
    UNIT_NORM_TOLERANCE,
)
from context_core import TransitionKernel
from errors import GeometryError, PollConfigError
from probability_structure import TransitionData
from rng import check_seed, split_seeds

END_AXIS = "axis"
END_ANTI = "anti-axis"

PREDETERMINED_YES = "Y"
PREDETERMINED_NO = "N"
UNDETERMINED = "U"

# Region numbers the poll description names explicitly
NAMED_REGIONS = {"1": "YUU", "13": "UUU"}


def _unit(vector, what: str) -> np.ndarray:
    v = np.array(vector, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise GeometryError(f"{what} must be a finite 3-vector, got {vector!r}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
        raise GeometryError(f"{what} must have unit length, |v| = {norm!r}")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class SphereState:
    """A pure state: a unit vector on the sphere."""
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _unit(self.v, "state"))

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "SphereState":
        """Polar angle theta from +z, azimuth phi."""
        return cls(np.array([
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        ]))


@dataclass(frozen=True, eq=False)
class EpsilonContext:
    """A measurement axis u with elastic breakable in [-epsilon, epsilon]."""
    u: np.ndarray
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "u", _unit(self.u, "axis"))
        eps = float(self.epsilon)
        if not math.isfinite(eps) or eps < 0.0 or eps > 1.0:
            raise GeometryError(f"epsilon must be in [0, 1], got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)


@dataclass(frozen=True)
class MeasurementOutcome:
    """End reached by the state, the resulting state and the break point."""
    end: str
    resulting_state: SphereState
    break_point: Optional[float] = None


def _probabilities_from_foot(c: float, epsilon: float) -> tuple:
    if epsilon == 0.0:
        if c > UNIT_NORM_TOLERANCE:
            return 1.0, 0.0
        if c < -UNIT_NORM_TOLERANCE:
            return 0.0, 1.0
        return 0.5, 0.5
    if c >= epsilon - UNIT_NORM_TOLERANCE:
        return 1.0, 0.0
    if c <= -epsilon + UNIT_NORM_TOLERANCE:
        return 0.0, 1.0
    p_axis = (epsilon + c) / (2.0 * epsilon)
    return p_axis, 1.0 - p_axis


def transition_probability(state: SphereState, ctx: EpsilonContext) -> tuple:
    """(p_axis, p_anti) for measuring `state` in context `ctx`.

    With c = u.v: (1, 0) when c >= epsilon, (0, 1) when c <= -epsilon,
    else ((epsilon + c) / 2 epsilon, (epsilon - c) / 2 epsilon). At
    epsilon = 1 this is (cos^2(theta/2), sin^2(theta/2)).
    """
    return _probabilities_from_foot(float(ctx.u @ state.v), ctx.epsilon)


def _measure_batch(c: np.ndarray, epsilon: float, rng: np.random.Generator):
    """Vectorized break-point draws. Returns (lands_on_axis, break_points)."""
    c = np.asarray(c, dtype=float)
    if epsilon == 0.0:
        break_points = np.zeros_like(c)
        coin = rng.random(c.shape) < 0.5
        on_axis = np.where(np.abs(c) <= UNIT_NORM_TOLERANCE, coin, c > 0.0)
    else:
        break_points = rng.uniform(-epsilon, epsilon, size=c.shape)
        on_axis = c > break_points
        # Caps: the foot-point lies outside the breakable segment
        on_axis = np.where(c >= epsilon - UNIT_NORM_TOLERANCE, True, on_axis)
        on_axis = np.where(c <= -epsilon + UNIT_NORM_TOLERANCE, False, on_axis)
    return on_axis, break_points


def simulate_measurement(state: SphereState, ctx: EpsilonContext, rng: np.random.Generator) -> MeasurementOutcome:
    """Draw a break point uniformly on [-epsilon, epsilon] and collapse the state."""
    on_axis, break_points = _measure_batch(np.array([float(ctx.u @ state.v)]), ctx.epsilon, rng)
    if on_axis[0]:
        return MeasurementOutcome(END_AXIS, SphereState(ctx.u), float(break_points[0]))
    return MeasurementOutcome(END_ANTI, SphereState(-ctx.u), float(break_points[0]))


def simulate_measurements(states: np.ndarray, ctx: EpsilonContext, rng: np.random.Generator):
    """Measure many states (rows of an (n, 3) array) along one context.

    Returns (lands_on_axis, resulting_states, break_points).
    """
    states = np.asarray(states, dtype=float).reshape(-1, 3)
    on_axis, break_points = _measure_batch(states @ ctx.u, ctx.epsilon, rng)
    resulting = np.where(on_axis[:, None], ctx.u, -ctx.u)
    return on_axis, resulting, break_points


def _shared_epsilon(axes: Sequence[EpsilonContext]) -> float:
    epsilons = {ctx.epsilon for ctx in axes}
    if len(epsilons) != 1:
        raise GeometryError(f"Axes must share one epsilon, got {sorted(epsilons)}")
    return epsilons.pop()


def _region_codes(c: np.ndarray, epsilon: float) -> np.ndarray:
    """0 = Y, 1 = N, 2 = U for an array of foot-points."""
    if epsilon == 0.0:
        yes, no = c > UNIT_NORM_TOLERANCE, c < -UNIT_NORM_TOLERANCE
    else:
        yes = c >= epsilon - UNIT_NORM_TOLERANCE
        no = c <= -epsilon + UNIT_NORM_TOLERANCE
    return np.where(yes, 0, np.where(no, 1, 2))


_REGION_LETTERS = (PREDETERMINED_YES, PREDETERMINED_NO, UNDETERMINED)


def classify_region(state: SphereState, axes: Sequence[EpsilonContext]) -> tuple:
    """Sign pattern (Y/N/U per axis): predetermined yes, no, or formed when asked."""
    epsilon = _shared_epsilon(axes)
    c = np.array([float(ctx.u @ state.v) for ctx in axes])
    return tuple(_REGION_LETTERS[code] for code in _region_codes(c, epsilon))


def spinor(v) -> np.ndarray:
    """Two-component spinor of a unit 3-vector (Bloch sphere map)."""
    x, y, z = _unit(v, "state")
    theta = math.acos(min(1.0, max(-1.0, z)))
    phi = math.atan2(y, x)
    return np.array([math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)])


def spinor_transition_probability(v, u) -> float:
    """|<psi_u, psi_v>|^2 in the two-dimensional complex representation."""
    return float(abs(np.vdot(spinor(u), spinor(v))) ** 2)


def uniform_sphere_states(n: int, rng: np.random.Generator) -> np.ndarray:
    """n points uniformly distributed on the unit sphere, shape (n, 3)."""
    points = rng.standard_normal((n, 3))
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def default_fan_axes(epsilon: float = POLL_EPSILON, adjacent_degrees: float = FAN_ADJACENT_DEGREES) -> tuple:
    """Coplanar fan: u1.u2 = u2.u3 = cos(a), u1.u3 = cos(2a)."""
    a = math.radians(adjacent_degrees)
    return tuple(
        EpsilonContext(np.array([math.cos(k * a), math.sin(k * a), 0.0]), epsilon)
        for k in range(3)
    )


def sphere_transition_data(axes: Sequence[EpsilonContext]) -> TransitionData:
    """Analytic conditionals between collapsed states +/-u_i and each other axis."""
    n = len(axes)
    cond = np.zeros((n, 2, n, 2))
    for i, j in itertools.permutations(range(n), 2):
        for a, sign in enumerate((1.0, -1.0)):
            cond[i, a, j] = transition_probability(SphereState(sign * axes[i].u), axes[j])
    return TransitionData(n, cond)


def export_finite_kernel(states: Sequence, contexts: Sequence) -> TransitionKernel:
    """Finite kernel over the given states plus the outcome states +/-u of each context.

    `states` holds (label, SphereState) pairs and `contexts` holds
    (label, EpsilonContext) pairs. Outcome states are labelled
    "<context>:axis" and "<context>:anti".
    """
    if not states or not contexts:
        raise GeometryError("export_finite_kernel needs at least one state and one context")
    labels = [label for label, _ in states]
    points = [state for _, state in states]
    for label, ctx in contexts:
        labels += [f"{label}:{END_AXIS}", f"{label}:anti"]
        points += [SphereState(ctx.u), SphereState(-ctx.u)]

    first_outcome = len(states)
    prob = np.zeros((len(contexts), len(points), len(points)))
    for e, (_, ctx) in enumerate(contexts):
        axis_index = first_outcome + 2 * e
        for p, point in enumerate(points):
            p_axis, p_anti = transition_probability(point, ctx)
            prob[e, p, axis_index] = p_axis
            prob[e, p, axis_index + 1] = p_anti
    return TransitionKernel(labels, [label for label, _ in contexts], prob)


@dataclass
class PollConfig:
    """Three questions on a respondent population uniform on the sphere."""
    axes: tuple
    population: int = DEFAULT_POPULATION
    seed: int = DEFAULT_SEED
    question_order: tuple = (1, 2, 3)
    randomize_order: bool = True
    workers: int = POLL_WORKERS
    chunk_size: int = POLL_CHUNK_SIZE

    def __post_init__(self):
        self.axes = tuple(self.axes)
        if len(self.axes) != 3:
            raise PollConfigError(f"The poll needs exactly three questions, got {len(self.axes)}")
        try:
            _shared_epsilon(self.axes)
        except GeometryError as e:
            raise PollConfigError(e.message)
        for i, j in itertools.combinations(range(3), 2):
            if np.allclose(self.axes[i].u, self.axes[j].u, atol=UNIT_NORM_TOLERANCE):
                raise PollConfigError(f"Questions {i + 1} and {j + 1} share the same axis")
        if isinstance(self.population, bool) or not isinstance(self.population, int) or self.population <= 0:
            raise PollConfigError(f"population must be a positive integer, got {self.population!r}")
        try:
            self.seed = check_seed(self.seed)
        except (TypeError, ValueError) as e:
            raise PollConfigError(str(e))
        self.question_order = tuple(int(q) for q in self.question_order)
        if sorted(self.question_order) != [1, 2, 3]:
            raise PollConfigError(f"question_order must be a permutation of (1, 2, 3), got {self.question_order}")
        if self.workers < 1 or self.chunk_size < 1:
            raise PollConfigError("workers and chunk_size must be positive")

    @property
    def epsilon(self) -> float:
        return self.axes[0].epsilon


@dataclass
class PollReport:
    """Marginals, predetermined fractions, region census and conditionals."""
    population: int
    epsilon: float
    marginal_yes: list
    predetermined_yes: list
    predetermined_no: list
    formed: list
    region_census: dict
    conditional: TransitionData
    pair_counts: np.ndarray = field(repr=False)
    unobserved_pairs: list = field(default_factory=list)

    @property
    def predetermined_total(self) -> list:
        return [y + n for y, n in zip(self.predetermined_yes, self.predetermined_no)]

    def census_rows(self) -> list:
        return [
            (pattern, count, count / self.population)
            for pattern, count in sorted(self.region_census.items())
        ]

    def to_dict(self) -> dict:
        return {
            "population": self.population,
            "epsilon": self.epsilon,
            "marginal_yes": self.marginal_yes,
            "predetermined_yes": self.predetermined_yes,
            "predetermined_no": self.predetermined_no,
            "predetermined_total": self.predetermined_total,
            "formed": self.formed,
            "region_census": dict(sorted(self.region_census.items())),
            "named_regions": NAMED_REGIONS,
            "conditional": self.conditional.to_dict(),
            "pair_counts": self.pair_counts.tolist(),
            "unobserved_pairs": self.unobserved_pairs,
        }


def _poll_chunk(size: int, axes: np.ndarray, epsilon: float, config: PollConfig, rng: np.random.Generator) -> dict:
    states = uniform_sphere_states(size, rng)
    initial_regions = _region_codes(states @ axes.T, epsilon)

    if config.randomize_order:
        orders = np.argsort(rng.random((size, 3)), axis=1)
    else:
        orders = np.tile(np.array(config.question_order) - 1, (size, 1))

    answers = np.zeros((size, 3), dtype=int)  # 0 = yes, 1 = no
    current = states
    for position in range(3):
        question = orders[:, position]
        u = axes[question]
        on_axis, _ = _measure_batch(np.einsum("ij,ij->i", current, u), epsilon, rng)
        answers[np.arange(size), question] = np.where(on_axis, 0, 1)
        current = np.where(on_axis[:, None], u, -u)

    pair_counts = np.zeros((3, 2, 3, 2), dtype=np.int64)
    rows = np.arange(size)
    for position in range(2):
        i = orders[:, position]
        j = orders[:, position + 1]
        np.add.at(pair_counts, (i, answers[rows, i], j, answers[rows, j]), 1)

    pattern_index = initial_regions[:, 0] * 9 + initial_regions[:, 1] * 3 + initial_regions[:, 2]
    return {
        "yes": np.sum(answers == 0, axis=0),
        "pre_yes": np.sum(initial_regions == 0, axis=0),
        "pre_no": np.sum(initial_regions == 1, axis=0),
        "census": np.bincount(pattern_index, minlength=27),
        "pairs": pair_counts,
    }


def run_opinion_poll(config: PollConfig) -> PollReport:
    """Ask the three questions of every respondent, collapsing between questions.

    The population is cut into fixed-size chunks, each with its own child
    generator, so the report only depends on the seed.
    """
    n = config.population
    epsilon = config.epsilon
    axes = np.array([ctx.u for ctx in config.axes])
    sizes = [config.chunk_size] * (n // config.chunk_size)
    if n % config.chunk_size:
        sizes.append(n % config.chunk_size)
    rngs = split_seeds(config.seed, len(sizes))

    def work(k: int) -> dict:
        return _poll_chunk(sizes[k], axes, epsilon, config, rngs[k])

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        chunks = list(pool.map(work, range(len(sizes))))

    totals = {key: sum(chunk[key] for chunk in chunks) for key in chunks[0]}

    pair_counts = totals["pairs"]
    cond = np.full((3, 2, 3, 2), 0.5)
    unobserved = []
    for i, a, j in itertools.product(range(3), range(2), range(3)):
        if i == j:
            continue
        row_total = pair_counts[i, a, j].sum()
        if row_total:
            cond[i, a, j] = pair_counts[i, a, j] / row_total
        else:
            unobserved.append([i + 1, "+-"[a], j + 1])

    census = {}
    for index, count in enumerate(totals["census"]):
        if count:
            pattern = _REGION_LETTERS[index // 9] + _REGION_LETTERS[(index // 3) % 3] + _REGION_LETTERS[index % 3]
            census[pattern] = int(count)

    pre_yes = [int(x) / n for x in totals["pre_yes"]]
    pre_no = [int(x) / n for x in totals["pre_no"]]
    formed = [(n - int(y) - int(no)) / n for y, no in zip(totals["pre_yes"], totals["pre_no"])]
    return PollReport(
        population=n,
        epsilon=epsilon,
        marginal_yes=[int(x) / n for x in totals["yes"]],
        predetermined_yes=pre_yes,
        predetermined_no=pre_no,
        formed=formed,
        region_census=census,
        conditional=TransitionData(3, cond),
        pair_counts=pair_counts,
        unobserved_pairs=unobserved,
    )


def _whole(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not float(value).is_integer():
        raise PollConfigError(f"{key} must be a whole number, got {value!r}")
    return int(value)


def poll_config_from_dict(data: dict, **overrides) -> PollConfig:
    """Build a PollConfig from JSON; keyword overrides (e.g. from CLI flags) win.

    Keys: epsilon, axes (three 3-vectors; default coplanar fan),
    fan_degrees, population, seed, question_order, randomize_order,
    workers, chunk_size.
    """
    if not isinstance(data, dict):
        raise PollConfigError("Poll config must be a JSON object")
    merged = {**data, **{k: v for k, v in overrides.items() if v is not None}}
    randomize_order = merged.get("randomize_order", True)
    if not isinstance(randomize_order, bool):
        raise PollConfigError(f"randomize_order must be true or false, got {randomize_order!r}")
    try:
        epsilon = float(merged.get("epsilon", POLL_EPSILON))
        if "axes" in merged:
            axes = tuple(EpsilonContext(np.array(u, dtype=float), epsilon) for u in merged["axes"])
        else:
            axes = default_fan_axes(epsilon, float(merged.get("fan_degrees", FAN_ADJACENT_DEGREES)))
        return PollConfig(
            axes=axes,
            population=_whole(merged.get("population", DEFAULT_POPULATION), "population"),
            seed=_whole(merged.get("seed", DEFAULT_SEED), "seed"),
            question_order=tuple(merged.get("question_order", (1, 2, 3))),
            randomize_order=randomize_order,
            workers=_whole(merged.get("workers", POLL_WORKERS), "workers"),
            chunk_size=_whole(merged.get("chunk_size", POLL_CHUNK_SIZE), "chunk_size"),
        )
    except GeometryError as e:
        raise PollConfigError(e.message)
    except (TypeError, ValueError) as e:
        raise PollConfigError(f"Malformed poll config: {e}")


def load_poll_config(path: Path, **overrides) -> PollConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise PollConfigError(f"Invalid JSON in {path}: {e}")
    return poll_config_from_dict(data, **overrides)
