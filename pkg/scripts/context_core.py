#!/usr/bin/env python3
"""
Context core: finite states, contexts and transition kernels.

A kernel holds mu(q, p, e), the probability that context e changes
state p into state q. Tables are stored indexed [context][source][target]
(the JSON file layout) and are read-only once built.
"""

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from config import NORMALIZATION_TOLERANCE
from errors import (
    ContextualityError,
    InvalidKernelError,
    KernelStructureError,
    UnknownIdError,
)
from rng import check_seed, make_rng


@dataclass(frozen=True)
class StateId:
    """A state of the entity, by label and position in its state set."""
    label: str
    index: int


@dataclass(frozen=True)
class ContextId:
    """A context acting on the entity, by label and position in its context set."""
    label: str
    index: int


@dataclass(frozen=True)
class RowViolation:
    """One (source, context) row of a kernel that is not a distribution."""
    source: str
    context: str
    row_sum: float
    reason: str

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "context": self.context,
            "row_sum": self.row_sum,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class ValidationReport:
    """Result of validate_kernel."""
    valid: bool
    violations: tuple = ()

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [v.to_dict() for v in self.violations],
        }


def _build_ids(labels: Sequence, cls, kind: str) -> tuple:
    if not isinstance(labels, (list, tuple)):
        raise KernelStructureError(f"{kind.capitalize()} labels must be a list, got {type(labels).__name__}")
    ids = []
    seen = set()
    for index, item in enumerate(labels):
        label = item.label if isinstance(item, (StateId, ContextId)) else item
        if not isinstance(label, str) or not label:
            raise KernelStructureError(f"{kind} {index} has an empty or non-text label")
        if label in seen:
            raise KernelStructureError(f"Duplicate {kind} label: {label!r}")
        seen.add(label)
        ids.append(cls(label=label, index=index))
    if not ids:
        raise KernelStructureError(f"A kernel needs at least one {kind}")
    return tuple(ids)


@dataclass(frozen=True)
class TransitionKernel:
    """The probability function mu over finite state and context sets."""
    states: tuple
    contexts: tuple
    prob: np.ndarray = field(compare=False, repr=False)

    def __init__(self, states: Sequence, contexts: Sequence, prob):
        state_ids = _build_ids(states, StateId, "state")
        context_ids = _build_ids(contexts, ContextId, "context")
        try:
            table = np.array(prob, dtype=float)
        except (TypeError, ValueError) as e:
            raise KernelStructureError(f"prob is not a rectangular numeric table: {e}")

        expected = (len(context_ids), len(state_ids), len(state_ids))
        if table.shape != expected:
            raise KernelStructureError(
                f"prob has shape {table.shape}, expected {expected} "
                f"(contexts x source states x target states)"
            )
        table.setflags(write=False)
        object.__setattr__(self, "states", state_ids)
        object.__setattr__(self, "contexts", context_ids)
        object.__setattr__(self, "prob", table)

    def state(self, ref: Union[str, StateId]) -> StateId:
        """Resolve a state label (or id) against this kernel."""
        label = ref.label if isinstance(ref, StateId) else ref
        for state in self.states:
            if state.label == label:
                if isinstance(ref, StateId) and ref != state:
                    break
                return state
        raise UnknownIdError(f"Unknown state: {ref!r}")

    def context(self, ref: Union[str, ContextId]) -> ContextId:
        """Resolve a context label (or id) against this kernel."""
        label = ref.label if isinstance(ref, ContextId) else ref
        for context in self.contexts:
            if context.label == label:
                if isinstance(ref, ContextId) and ref != context:
                    break
                return context
        raise UnknownIdError(f"Unknown context: {ref!r}")

    def probability(self, target, source, context) -> float:
        """mu(target, source, context)."""
        q = self.state(target)
        p = self.state(source)
        e = self.context(context)
        return float(self.prob[e.index, p.index, q.index])

    def row(self, source, context) -> np.ndarray:
        """Distribution over target states for one (source, context)."""
        return self.prob[self.context(context).index, self.state(source).index]

    @cached_property
    def report(self) -> "ValidationReport":
        return validate_kernel(self)


def validate_kernel(kernel: TransitionKernel) -> ValidationReport:
    """Check every (source, context) row is a probability distribution.

    Dimension problems never reach this point: they are rejected with
    KernelStructureError when the kernel is built.
    """
    violations = []
    for e in kernel.contexts:
        for p in kernel.states:
            row = kernel.prob[e.index, p.index]
            total = float(row.sum())
            if not np.all(np.isfinite(row)):
                reason = "non-finite entry"
            elif np.any(row < 0.0) or np.any(row > 1.0):
                reason = "entry outside [0, 1]"
            elif abs(total - 1.0) > NORMALIZATION_TOLERANCE:
                reason = "row does not sum to 1"
            else:
                continue
            violations.append(RowViolation(p.label, e.label, total, reason))
    return ValidationReport(valid=not violations, violations=tuple(violations))


def require_valid(kernel: TransitionKernel) -> None:
    """Reject an invalid kernel before it is used for sampling."""
    report = kernel.report
    if not report.valid:
        first = report.violations[0]
        raise InvalidKernelError(
            f"{len(report.violations)} invalid row(s), first: source={first.source!r} "
            f"context={first.context!r} ({first.reason}, sum={first.row_sum!r})",
            violations=report.violations,
        )


def _draw(row: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    cumulative = np.cumsum(row)
    index = int(np.searchsorted(cumulative, u, side="right"))
    # Rounding can leave the last cumulative value a hair under u
    support = np.flatnonzero(row > 0.0)
    return min(index, int(support[-1]))


def sample_step(kernel: TransitionKernel, state, context, rng: np.random.Generator) -> StateId:
    """Draw the state that `context` changes `state` into.

    The generator is owned by the caller; the same generator state always
    yields the same result.
    """
    require_valid(kernel)
    p = kernel.state(state)
    e = kernel.context(context)
    index = _draw(kernel.prob[e.index, p.index], rng)
    return kernel.states[index]


@dataclass(frozen=True)
class Trajectory:
    """A seeded sequence of context applications and resulting states."""
    initial: StateId
    steps: tuple
    seed: int

    def states(self) -> list:
        return [self.initial] + [state for _, state in self.steps]

    def to_dict(self) -> dict:
        return {
            "initial": self.initial.label,
            "seed": self.seed,
            "steps": [
                {"context": context.label, "state": state.label}
                for context, state in self.steps
            ],
        }


def sample_trajectory(kernel: TransitionKernel, initial, contexts: Sequence, seed: int) -> Trajectory:
    """Apply contexts in order from `initial`, sampling each change."""
    if not contexts:
        raise ContextualityError(
            "A trajectory needs at least one context",
            code="EMPTY_CONTEXTS",
        )
    require_valid(kernel)
    seed = check_seed(seed)
    start = kernel.state(initial)
    resolved = [kernel.context(c) for c in contexts]

    rng = make_rng(seed)
    current = start
    steps = []
    for context in resolved:
        current = sample_step(kernel, current, context, rng)
        steps.append((context, current))
    return Trajectory(initial=start, steps=tuple(steps), seed=seed)


def propagate_distribution(kernel: TransitionKernel, distribution, context) -> np.ndarray:
    """Push a statistical state (probabilities over states) through one context."""
    require_valid(kernel)
    weights = np.asarray(distribution, dtype=float)
    if weights.shape != (len(kernel.states),):
        raise KernelStructureError(
            f"distribution has shape {weights.shape}, expected ({len(kernel.states)},)"
        )
    if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > NORMALIZATION_TOLERANCE:
        raise InvalidKernelError("distribution must be nonnegative and sum to 1")
    e = kernel.context(context)
    return weights @ kernel.prob[e.index]


def identity_kernel(states: Iterable[str], contexts: Iterable[str]) -> TransitionKernel:
    """Kernel in which every context leaves every state unchanged."""
    states = list(states)
    contexts = list(contexts)
    eye = np.eye(len(states))
    return TransitionKernel(states, contexts, np.stack([eye] * len(contexts)))


def kernel_from_dict(data: dict) -> TransitionKernel:
    """Build a kernel from the JSON layout {"states", "contexts", "prob"}."""
    if not isinstance(data, dict):
        raise KernelStructureError("Kernel file must hold a JSON object")
    missing = [key for key in ("states", "contexts", "prob") if key not in data]
    if missing:
        raise KernelStructureError(f"Kernel file is missing: {', '.join(missing)}")
    return TransitionKernel(data["states"], data["contexts"], data["prob"])


def kernel_to_dict(kernel: TransitionKernel) -> dict:
    return {
        "states": [s.label for s in kernel.states],
        "contexts": [c.label for c in kernel.contexts],
        "prob": kernel.prob.tolist(),
    }


def load_kernel(path: Path, enforce: bool = True) -> TransitionKernel:
    """Load a kernel file; with enforce, invalid rows raise InvalidKernelError."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise KernelStructureError(f"Invalid JSON in {path}: {e}")
    kernel = kernel_from_dict(data)
    if enforce:
        require_valid(kernel)
    return kernel
