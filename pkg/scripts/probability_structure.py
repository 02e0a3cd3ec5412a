#!/usr/bin/env python3
"""
Probability structure of dichotomic-context transition data.

Decides whether the data admits a single classical (Kolmogorovian) joint
distribution, a pure sphere-model (spin-1/2) representation, both, or
neither.
"""

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
from scipy.optimize import linprog

from config import (
    FEASIBILITY_TOLERANCE,
    MAX_KOLMOGOROV_CONTEXTS,
    NORMALIZATION_TOLERANCE,
    SYMMETRY_TOLERANCE,
)
from errors import ContextLimitError, TransitionDataError

OUTCOMES = ("+", "-")
ANGLE_TOLERANCE = 1e-9

VERDICT_KOLMOGOROVIAN = "kolmogorovian"
VERDICT_QUANTUM = "pure-quantum"
VERDICT_BOTH = "both"
VERDICT_NEITHER = "neither"


@dataclass(frozen=True)
class TransitionData:
    """cond[i, a, j, b]: probability of outcome b of context j after outcome a of context i.

    Outcome index 0 is '+', 1 is '-'. Diagonal blocks (i == j) are unused
    and held as the identity.
    """
    n: int
    cond: np.ndarray = field(compare=False, repr=False)

    def __init__(self, n: int, cond):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise TransitionDataError(f"n must be a positive integer, got {n!r}")
        n = int(n)
        table = np.array(cond, dtype=float)
        if table.shape != (n, 2, n, 2):
            raise TransitionDataError(f"cond has shape {table.shape}, expected {(n, 2, n, 2)}")
        for i in range(n):
            table[i, :, i, :] = np.eye(2)
        for i, a, j in itertools.product(range(n), range(2), range(n)):
            if i == j:
                continue
            row = table[i, a, j]
            if not np.all(np.isfinite(row)) or np.any(row < 0.0) or np.any(row > 1.0):
                raise TransitionDataError(
                    f"cond[{i + 1}][{OUTCOMES[a]}][{j + 1}] has entries outside [0, 1]: {row.tolist()}"
                )
            if abs(row.sum() - 1.0) > NORMALIZATION_TOLERANCE:
                raise TransitionDataError(
                    f"cond[{i + 1}][{OUTCOMES[a]}][{j + 1}] sums to {row.sum()!r}, not 1"
                )
        table.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "cond", table)

    def to_dict(self) -> dict:
        cond = self.cond.tolist()
        for i in range(self.n):
            cond[i][0][i] = None
            cond[i][1][i] = None
        return {"n": self.n, "outcomes": list(OUTCOMES), "cond": cond}


@dataclass
class FeasibilityResult:
    """Outcome of one feasibility question, with witness or certificate."""
    kind: str
    feasible: bool
    witness: Optional[Any] = None
    residual: Optional[float] = None
    certificate: Optional[dict] = None
    applicable: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        witness = self.witness
        if isinstance(witness, np.ndarray):
            witness = witness.tolist()
        return {
            "kind": self.kind,
            "applicable": self.applicable,
            "feasible": self.feasible,
            "residual": self.residual,
            "witness": witness,
            "certificate": self.certificate,
            "note": self.note,
        }


@dataclass
class Classification:
    """Verdict over the Kolmogorov and sphere-quantum feasibility results."""
    verdict: str
    kolmogorov: FeasibilityResult
    quantum: FeasibilityResult

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "kolmogorov": self.kolmogorov.to_dict(),
            "quantum": self.quantum.to_dict(),
        }


def transition_data_from_pairwise(p12: float, p13: float, p23: float) -> TransitionData:
    """Symmetric three-context data: equal outcomes with p_ij, opposite with 1 - p_ij."""
    pairwise = {(0, 1): p12, (0, 2): p13, (1, 2): p23}
    cond = np.zeros((3, 2, 3, 2))
    for (i, j), p in pairwise.items():
        if not 0.0 <= p <= 1.0:
            raise TransitionDataError(f"p{i + 1}{j + 1} = {p!r} is outside [0, 1]")
        same = np.array([[p, 1.0 - p], [1.0 - p, p]])
        cond[i, :, j, :] = same
        cond[j, :, i, :] = same
    return TransitionData(3, cond)


def _kolmogorov_system(data: TransitionData):
    """Equality system A x = b over the 2^n outcome assignments."""
    n = data.n
    assignments = np.array(list(itertools.product((0, 1), repeat=n)), dtype=int)
    rows = [np.ones(len(assignments))]
    labels = ["normalization"]
    for i, j in itertools.permutations(range(n), 2):
        for a, b in itertools.product(range(2), repeat=2):
            on_a = (assignments[:, i] == a).astype(float)
            on_ab = on_a * (assignments[:, j] == b)
            rows.append(on_ab - data.cond[i, a, j, b] * on_a)
            labels.append(f"rho({i + 1}{OUTCOMES[a]},{j + 1}{OUTCOMES[b]}) = "
                          f"cond[{i + 1}][{OUTCOMES[a]}][{j + 1}][{OUTCOMES[b]}] rho({i + 1}{OUTCOMES[a]})")
    b_eq = np.zeros(len(rows))
    b_eq[0] = 1.0
    return assignments, np.array(rows), b_eq, labels


def kolmogorov_residual(data: TransitionData, weights) -> float:
    """Max violation of the joint-distribution constraints by `weights`."""
    _, A, b, _ = _kolmogorov_system(data)
    w = np.asarray(weights, dtype=float)
    negative = float(max(0.0, -w.min()))
    return max(float(np.abs(A @ w - b).max()), negative)


def verify_certificate(data: TransitionData, multipliers) -> bool:
    """Check a Farkas certificate y: b.y exceeds max(A^T y, 0).

    Any distribution x with A x = b has b.y = x.(A^T y) <= max(A^T y, 0),
    so the inequality proves no joint distribution exists.
    """
    _, A, b, _ = _kolmogorov_system(data)
    y = np.asarray(multipliers, dtype=float)
    return float(b @ y) > max(0.0, float((A.T @ y).max())) + FEASIBILITY_TOLERANCE


def kolmogorov_fit(data: TransitionData) -> FeasibilityResult:
    """Search for a joint distribution over {+,-}^n reproducing every conditional.

    Solved as a phase-one linear program: minimize the total slack of
    A x + s+ - s- = b with x, s >= 0. Zero slack gives a witness; positive
    slack gives dual multipliers that form an infeasibility certificate.
    """
    if data.n > MAX_KOLMOGOROV_CONTEXTS:
        raise ContextLimitError(
            f"{data.n} contexts need 2^{data.n} variables; the limit is {MAX_KOLMOGOROV_CONTEXTS}"
        )
    assignments, A, b, labels = _kolmogorov_system(data)
    n_vars, n_rows = A.shape[1], A.shape[0]

    A_phase = np.hstack([A, np.eye(n_rows), -np.eye(n_rows)])
    cost = np.concatenate([np.zeros(n_vars), np.ones(2 * n_rows)])
    lp = linprog(
        cost,
        A_eq=A_phase,
        b_eq=b,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if not lp.success:
        return FeasibilityResult(
            kind="kolmogorov",
            feasible=False,
            note=f"linear program did not finish: {lp.message}",
        )

    weights = np.clip(lp.x[:n_vars], 0.0, None)
    residual = kolmogorov_residual(data, weights)
    if lp.fun <= FEASIBILITY_TOLERANCE and residual <= FEASIBILITY_TOLERANCE:
        witness = {
            "".join(OUTCOMES[s] for s in assignment): float(w)
            for assignment, w in zip(assignments, weights)
            if w > 1e-15
        }
        return FeasibilityResult(kind="kolmogorov", feasible=True, witness=witness, residual=residual)

    y = np.asarray(lp.eqlin.marginals, dtype=float)
    if not verify_certificate(data, y):
        y = -y
    certificate = {
        "type": "farkas",
        "multipliers": y.tolist(),
        "constraints": labels,
        "b_dot_y": float(b @ y),
        "max_AT_y": float((A.T @ y).max()),
        "verified": verify_certificate(data, y),
        "min_total_slack": float(lp.fun),
    }
    return FeasibilityResult(
        kind="kolmogorov",
        feasible=False,
        residual=float(lp.fun),
        certificate=certificate,
        note="no joint distribution over all contexts reproduces the data",
    )


def _angle(p: float) -> float:
    """theta with cos^2(theta/2) = p; sqrt clamped to [0, 1] before arccos."""
    return 2.0 * math.acos(min(1.0, max(0.0, math.sqrt(max(0.0, p)))))


def sphere_residual(vectors, p12: float, p13: float, p23: float) -> float:
    u = [np.asarray(v, dtype=float) for v in vectors]
    fitted = {
        (0, 1): (1.0 + float(u[0] @ u[1])) / 2,
        (0, 2): (1.0 + float(u[0] @ u[2])) / 2,
        (1, 2): (1.0 + float(u[1] @ u[2])) / 2,
    }
    target = {(0, 1): p12, (0, 2): p13, (1, 2): p23}
    return max(abs(fitted[k] - target[k]) for k in fitted)


def sphere_quantum_fit(p12: float, p13: float, p23: float) -> FeasibilityResult:
    """Look for unit vectors u1, u2, u3 with cos^2(theta_ij / 2) = p_ij.

    Feasible iff the angles theta_ij = 2 arccos(sqrt(p_ij)) close a
    spherical triangle: |t12 - t13| <= t23 <= min(t12 + t13, 2 pi - t12 - t13).
    Boundary cases count as feasible.
    """
    for name, p in (("p12", p12), ("p13", p13), ("p23", p23)):
        if not math.isfinite(p) or p < 0.0 or p > 1.0:
            raise TransitionDataError(f"{name} = {p!r} is outside [0, 1]")
    t12, t13, t23 = _angle(p12), _angle(p13), _angle(p23)
    lower = abs(t12 - t13)
    upper = min(t12 + t13, 2 * math.pi - t12 - t13)
    violation = max(0.0, lower - t23, t23 - upper)
    angles = {"theta12": t12, "theta13": t13, "theta23": t23}

    if violation > ANGLE_TOLERANCE:
        return FeasibilityResult(
            kind="sphere-quantum",
            feasible=False,
            residual=violation,
            certificate={"type": "spherical-triangle", "angles": angles,
                         "lower": lower, "upper": upper, "violation": violation},
            note="pairwise angles do not close a spherical triangle",
        )

    u1 = np.array([0.0, 0.0, 1.0])
    u2 = np.array([math.sin(t12), 0.0, math.cos(t12)])
    denominator = math.sin(t12) * math.sin(t13)
    if abs(denominator) < 1e-15:
        cos_phi = 1.0
    else:
        cos_phi = (math.cos(t23) - math.cos(t12) * math.cos(t13)) / denominator
    phi = math.acos(min(1.0, max(-1.0, cos_phi)))
    u3 = np.array([
        math.sin(t13) * math.cos(phi),
        math.sin(t13) * math.sin(phi),
        math.cos(t13),
    ])
    vectors = [u1, u2, u3]
    residual = sphere_residual(vectors, p12, p13, p23)
    return FeasibilityResult(
        kind="sphere-quantum",
        feasible=residual <= FEASIBILITY_TOLERANCE,
        witness=[v.tolist() for v in vectors],
        residual=residual,
        certificate={"type": "spherical-triangle", "angles": angles},
    )


def pairwise_probabilities(data: TransitionData, tolerance: float = SYMMETRY_TOLERANCE):
    """Reduce n = 3 data to (p12, p13, p23), or None when it is not symmetric.

    The reduction needs cond[i][+][j][+], cond[i][-][j][-] and their
    reverses to agree within `tolerance`; p_ij is their mean.
    """
    if data.n != 3:
        return None
    result = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        values = [
            data.cond[i, 0, j, 0],
            data.cond[i, 1, j, 1],
            data.cond[j, 0, i, 0],
            data.cond[j, 1, i, 1],
        ]
        if max(values) - min(values) > tolerance:
            return None
        result.append(float(np.mean(values)))
    return tuple(result)


def classify_structure(data: TransitionData, tolerance: float = SYMMETRY_TOLERANCE) -> Classification:
    """Kolmogorovian, pure-quantum, both or neither."""
    kolmogorov = kolmogorov_fit(data)
    pairwise = pairwise_probabilities(data, tolerance)
    if pairwise is None:
        reason = ("needs exactly three contexts" if data.n != 3
                  else "data is not symmetric enough to reduce to pairwise probabilities")
        quantum = FeasibilityResult(kind="sphere-quantum", feasible=False, applicable=False, note=reason)
        verdict = VERDICT_KOLMOGOROVIAN if kolmogorov.feasible else VERDICT_NEITHER
        return Classification(verdict, kolmogorov, quantum)

    quantum = sphere_quantum_fit(*pairwise)
    quantum.note = quantum.note or f"pairwise probabilities p12, p13, p23 = {list(pairwise)}"
    if kolmogorov.feasible and quantum.feasible:
        verdict = VERDICT_BOTH
    elif kolmogorov.feasible:
        verdict = VERDICT_KOLMOGOROVIAN
    elif quantum.feasible:
        verdict = VERDICT_QUANTUM
    else:
        verdict = VERDICT_NEITHER
    return Classification(verdict, kolmogorov, quantum)


def transition_data_from_dict(data: dict) -> TransitionData:
    """{"n": 3, "cond": [i][a][j][b]} with null allowed on the diagonal blocks."""
    if not isinstance(data, dict) or "n" not in data or "cond" not in data:
        raise TransitionDataError("Transition data must be a JSON object with 'n' and 'cond'")
    n = data["n"]
    raw = data["cond"]
    try:
        cond = np.zeros((n, 2, n, 2))
        for i, a, j in itertools.product(range(n), range(2), range(n)):
            if i == j:
                continue
            cond[i, a, j] = [float(x) for x in raw[i][a][j]]
    except (TypeError, ValueError, IndexError) as e:
        raise TransitionDataError(f"Malformed cond table: {e}")
    return TransitionData(n, cond)


def load_transition_data(path: Path) -> TransitionData:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise TransitionDataError(f"Invalid JSON in {path}: {e}")
    return transition_data_from_dict(data)
