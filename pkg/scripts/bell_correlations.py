#!/usr/bin/env python3
"""
Bell correlations: expectation values and the CHSH form of the Bell
inequality, |E13 - E14| + |E23 + E24| <= 2, on joint outcome tables.
"""

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from config import NORMALIZATION_TOLERANCE, VIOLATION_SLACK
from errors import ScenarioError, TableError

CHSH_PAIRS = ((1, 3), (1, 4), (2, 3), (2, 4))
OUTCOME_UP = 1
OUTCOME_DOWN = -1


@dataclass(frozen=True)
class DichotomicExperiment:
    """An experiment with two outcomes valued +1 (up) and -1 (down)."""
    id: int
    description: str = ""
    outcome_value_up: int = OUTCOME_UP
    outcome_value_down: int = OUTCOME_DOWN

    def __post_init__(self):
        if self.id not in (1, 2, 3, 4):
            raise ScenarioError(f"Experiment id must be 1..4, got {self.id}")
        if (self.outcome_value_up, self.outcome_value_down) != (OUTCOME_UP, OUTCOME_DOWN):
            raise ScenarioError("Outcome values must be exactly +1 (up) and -1 (down)")


@dataclass(frozen=True)
class JointOutcomeTable:
    """Probabilities of the four outcome pairs of a coincidence experiment e_i e_j."""
    pair: tuple
    p_uu: float
    p_ud: float
    p_du: float
    p_dd: float

    def __post_init__(self):
        pair = tuple(self.pair)
        object.__setattr__(self, "pair", pair)
        if len(pair) != 2 or pair[0] not in (1, 2) or pair[1] not in (3, 4):
            raise TableError(f"Pair must be (i, j) with i in {{1,2}} and j in {{3,4}}, got {pair}")
        cells = (self.p_uu, self.p_ud, self.p_du, self.p_dd)
        if any(not math.isfinite(p) or p < 0.0 or p > 1.0 for p in cells):
            raise TableError(f"Table e{pair[0]}{pair[1]} has an entry outside [0, 1]: {cells}")
        total = math.fsum(cells)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise TableError(f"Table e{pair[0]}{pair[1]} sums to {total!r}, not 1")

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "p_uu": self.p_uu,
            "p_ud": self.p_ud,
            "p_du": self.p_du,
            "p_dd": self.p_dd,
        }


@dataclass(frozen=True)
class BellScenario:
    """Four dichotomic experiments and the four CHSH joint tables."""
    experiments: tuple
    joints: tuple
    name: str = ""

    def __post_init__(self):
        ids = sorted(e.id for e in self.experiments)
        if ids != [1, 2, 3, 4]:
            raise ScenarioError(f"A scenario needs experiments 1..4 exactly once, got {ids}")
        pairs = sorted(t.pair for t in self.joints)
        if pairs != sorted(CHSH_PAIRS):
            raise ScenarioError(f"A scenario needs the pairs {list(CHSH_PAIRS)}, got {pairs}")

    def table(self, pair: tuple) -> JointOutcomeTable:
        for joint in self.joints:
            if joint.pair == tuple(pair):
                return joint
        raise ScenarioError(f"No table for pair {pair}")


@dataclass(frozen=True)
class BellReport:
    """Expectation values, CHSH value and violation verdict."""
    E13: float
    E14: float
    E23: float
    E24: float
    chsh: float
    violated: bool

    def to_dict(self) -> dict:
        return {
            "E13": self.E13,
            "E14": self.E14,
            "E23": self.E23,
            "E24": self.E24,
            "chsh": self.chsh,
            "violated": self.violated,
        }

    def summary(self) -> str:
        verdict = "VIOLATED" if self.violated else "satisfied"
        return (
            f"CHSH = {self.chsh:.6g} (bound 2, {verdict}); "
            f"E13={self.E13:+.6g} E14={self.E14:+.6g} E23={self.E23:+.6g} E24={self.E24:+.6g}"
        )


def expectation_value(table: JointOutcomeTable) -> float:
    """E_ij = P(u,u) + P(d,d) - P(u,d) - P(d,u)."""
    value = math.fsum((table.p_uu, table.p_dd, -table.p_ud, -table.p_du))
    return min(1.0, max(-1.0, value))


def chsh_value(E13: float, E14: float, E23: float, E24: float) -> float:
    """|E13 - E14| + |E23 + E24|."""
    for name, value in (("E13", E13), ("E14", E14), ("E23", E23), ("E24", E24)):
        if not math.isfinite(value) or abs(value) > 1.0:
            raise ScenarioError(f"{name} = {value!r} is outside [-1, 1]")
    return abs(E13 - E14) + abs(E23 + E24)


def evaluate_bell_scenario(scenario: BellScenario) -> BellReport:
    """Expectation values of the four joint tables and the CHSH verdict."""
    E = {pair: expectation_value(scenario.table(pair)) for pair in CHSH_PAIRS}
    chsh = chsh_value(E[(1, 3)], E[(1, 4)], E[(2, 3)], E[(2, 4)])
    return BellReport(
        E13=E[(1, 3)],
        E14=E[(1, 4)],
        E23=E[(2, 3)],
        E24=E[(2, 4)],
        chsh=chsh,
        violated=chsh > 2.0 + VIOLATION_SLACK,
    )


def table_from_counts(pair: tuple, n_uu: int, n_ud: int, n_du: int, n_dd: int):
    """Normalize raw coincidence counts. Returns (table, sample_size)."""
    counts = (n_uu, n_ud, n_du, n_dd)
    if any(c < 0 for c in counts):
        raise TableError(f"Counts must be nonnegative, got {counts}")
    total = sum(counts)
    if total == 0:
        raise TableError(f"No counts recorded for pair {pair}")
    return JointOutcomeTable(pair, *(c / total for c in counts)), total


def default_experiments(descriptions: Optional[Sequence[str]] = None) -> tuple:
    descriptions = list(descriptions or ["", "", "", ""])
    return tuple(DichotomicExperiment(i + 1, descriptions[i]) for i in range(4))


def scenario_from_joint(joint, name: str = "") -> BellScenario:
    """Marginalize one joint distribution over four +/-1 variables.

    `joint` maps outcome tuples (s1, s2, s3, s4), each +1 or -1, to
    probabilities, or is a (2, 2, 2, 2) array indexed 0 = +1, 1 = -1.
    """
    if isinstance(joint, dict):
        array = np.zeros((2, 2, 2, 2))
        for outcome, p in joint.items():
            array[tuple(0 if s == OUTCOME_UP else 1 for s in outcome)] += p
    else:
        array = np.asarray(joint, dtype=float).reshape(2, 2, 2, 2)

    tables = []
    for i, j in CHSH_PAIRS:
        keep = (i - 1, j - 1)
        drop = tuple(axis for axis in range(4) if axis not in keep)
        marginal = array.sum(axis=drop)
        tables.append(JointOutcomeTable(
            (i, j),
            float(marginal[0, 0]),
            float(marginal[0, 1]),
            float(marginal[1, 0]),
            float(marginal[1, 1]),
        ))
    return BellScenario(default_experiments(), tuple(tables), name=name)


def deterministic_assignments() -> list:
    """The 16 local deterministic outcome assignments (s1, s2, s3, s4)."""
    return list(itertools.product((OUTCOME_UP, OUTCOME_DOWN), repeat=4))


def singlet_scenario(angles: Sequence[float] = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)) -> BellScenario:
    """Spin-singlet tables for four coplanar measurement directions.

    With a relative angle delta, P(same) = sin^2(delta/2) and
    P(different) = cos^2(delta/2), each split evenly, so E = -cos(delta).
    The default arrangement reaches 2*sqrt(2).
    """
    if len(angles) != 4:
        raise ScenarioError(f"Need four angles, got {len(angles)}")
    tables = []
    for i, j in CHSH_PAIRS:
        delta = angles[i - 1] - angles[j - 1]
        p_same = math.sin(delta / 2) ** 2
        p_diff = 1.0 - p_same
        tables.append(JointOutcomeTable((i, j), p_same / 2, p_diff / 2, p_diff / 2, p_same / 2))
    return BellScenario(default_experiments(), tuple(tables), name="singlet")


def scenario_from_dict(data: dict) -> BellScenario:
    """Build a scenario from its JSON form.

    {"name": ..., "experiments": [{"id", "description"}, ...],
     "joints": [{"pair": [i, j], "p_uu", "p_ud", "p_du", "p_dd"}, ...]}
    Joints may give "counts": [n_uu, n_ud, n_du, n_dd] instead of probabilities.
    """
    if not isinstance(data, dict) or not isinstance(data.get("joints"), list):
        raise ScenarioError("Scenario must be a JSON object with a 'joints' list")
    experiments = data.get("experiments")
    if experiments:
        try:
            experiments = tuple(
                DichotomicExperiment(int(e["id"]), e.get("description", "")) for e in experiments
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ScenarioError(f"Malformed experiment entry: {e}")
    else:
        experiments = default_experiments()

    joints = []
    for entry in data["joints"]:
        try:
            pair = tuple(int(x) for x in entry["pair"])
            if "counts" in entry:
                table, _ = table_from_counts(pair, *[int(c) for c in entry["counts"]])
            else:
                table = JointOutcomeTable(
                    pair,
                    float(entry["p_uu"]),
                    float(entry["p_ud"]),
                    float(entry["p_du"]),
                    float(entry["p_dd"]),
                )
        except (KeyError, TypeError, ValueError) as e:
            raise ScenarioError(f"Malformed joint table entry {entry!r}: {e}")
        joints.append(table)
    return BellScenario(experiments, tuple(joints), name=str(data.get("name", "")))


def scenario_to_dict(scenario: BellScenario) -> dict:
    return {
        "name": scenario.name,
        "experiments": [{"id": e.id, "description": e.description} for e in scenario.experiments],
        "joints": [t.to_dict() for t in scenario.joints],
    }


def load_scenario(path: Path) -> BellScenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError(f"Invalid JSON in {path}: {e}")
    return scenario_from_dict(data)
