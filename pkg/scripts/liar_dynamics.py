#!/usr/bin/env python3
"""
Generalized m-sentence Liar paradox dynamics.

Each sentence i asserts "sentence target(i) is true|false"; the targets
link the sentences into one closed chain. Reasoning moves a claim
(sentence, truth value) to the claim it implies. On the 2m claims this
is a permutation U_D; its principal logarithm gives a Hamiltonian H with
exp(tau H) = U_D, and U(t) = exp(t H) interpolates the reasoning in
continuous time.

Basis order: (1,T) ... (m,T), (1,F) ... (m,F).
"""

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import schur

from config import CONTRADICTION_THRESHOLD, DEFAULT_TAU, LOG_BRANCH, NORMALIZATION_TOLERANCE
from errors import DecompositionError, GridError, LiarConfigError

_LINE = re.compile(
    r"^\s*(\d+)\s*[:.)]\s*(?:sentence\s+)?(\d+)\s+is\s+(true|false)\s*$",
    re.IGNORECASE,
)
_CLAIM = re.compile(r"^\s*(\d+)\s*[:,]\s*(true|false|t|f)\s*$", re.IGNORECASE)
_GRID_VALUE = re.compile(
    r"^(?P<num>[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*"
    r"(?P<pi>pi|π)?(?:\s*/\s*(?P<den>\d+(?:\.\d*)?))?$",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class Claim:
    """Sentence `sentence` held to have truth value `value`."""
    sentence: int
    value: bool

    def negated(self) -> "Claim":
        return Claim(self.sentence, not self.value)

    @property
    def label(self) -> str:
        return f"{self.sentence}:{'true' if self.value else 'false'}"


@dataclass(frozen=True)
class LiarConfig:
    """m sentences; sentences[i-1] = (target, asserted) for sentence i."""
    m: int
    sentences: tuple

    def __post_init__(self):
        sentences = tuple((int(t), bool(v)) for t, v in self.sentences)
        object.__setattr__(self, "sentences", sentences)
        if self.m < 1 or len(sentences) != self.m:
            raise LiarConfigError(f"Expected {self.m} sentences, got {len(sentences)}")
        targets = [t for t, _ in sentences]
        if sorted(targets) != list(range(1, self.m + 1)):
            raise LiarConfigError(
                f"Targets {tuple(targets)} are not a permutation of 1..{self.m}"
            )
        cycles = _cycles([t - 1 for t in targets])
        if len(cycles) != 1:
            raise LiarConfigError(
                f"Sentences form {len(cycles)} separate chains "
                f"({', '.join(str(len(c)) for c in cycles)} sentences); a single closed chain is required"
            )

    def target(self, sentence: int) -> int:
        return self.sentences[sentence - 1][0]

    def asserted(self, sentence: int) -> bool:
        return self.sentences[sentence - 1][1]

    def to_text(self) -> str:
        return "\n".join(
            f"{i}: sentence {t} is {'true' if v else 'false'}"
            for i, (t, v) in enumerate(self.sentences, start=1)
        ) + "\n"


def _cycles(perm: Sequence[int]) -> list:
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycle = []
        k = start
        while not seen[k]:
            seen[k] = True
            cycle.append(k)
            k = perm[k]
        cycles.append(cycle)
    return cycles


def parse_config(text: str) -> LiarConfig:
    """Parse lines of the form "<i>: sentence <j> is <true|false>".

    Blank lines and '#' comments are skipped; ';' or '/' may separate
    sentences on one line.
    """
    entries = {}
    pieces = (piece for row in text.splitlines() for piece in re.split(r"[;/]", row.split("#", 1)[0]))
    for raw in pieces:
        line = raw.strip()
        if not line:
            continue
        match = _LINE.match(line)
        if not match:
            raise LiarConfigError(f"Malformed sentence line: {line!r}")
        pointer, target, value = int(match.group(1)), int(match.group(2)), match.group(3).lower()
        if pointer in entries:
            raise LiarConfigError(f"Sentence {pointer} is defined twice")
        entries[pointer] = (target, value == "true")

    if not entries:
        raise LiarConfigError("No sentences found")
    m = len(entries)
    if sorted(entries) != list(range(1, m + 1)):
        raise LiarConfigError(f"Sentence pointers {sorted(entries)} must be 1..{m}")
    for pointer, (target, _) in entries.items():
        if not 1 <= target <= m:
            raise LiarConfigError(f"Sentence {pointer} refers to sentence {target}, which does not exist")
    return LiarConfig(m, tuple(entries[i] for i in range(1, m + 1)))


def parse_claim(text: str) -> Claim:
    """"1:true" / "3:false" -> Claim."""
    match = _CLAIM.match(text)
    if not match:
        raise LiarConfigError(f"Malformed hypothesis {text!r}; use <sentence>:<true|false>")
    return Claim(int(match.group(1)), match.group(2).lower() in ("true", "t"))


def _check_claim(claim: Claim, config: LiarConfig) -> None:
    if not 1 <= claim.sentence <= config.m:
        raise LiarConfigError(f"Claim refers to sentence {claim.sentence}; the chain has {config.m}")


def inference_step(claim: Claim, config: LiarConfig) -> Claim:
    """The claim inferred from `claim`.

    A sentence held true passes on what it asserts; held false, it passes
    on the negation.
    """
    _check_claim(claim, config)
    asserted = config.asserted(claim.sentence)
    return Claim(config.target(claim.sentence), asserted if claim.value else not asserted)


def reasoning_sequence(config: LiarConfig, hypothesis: Claim, steps: int) -> list:
    """hypothesis followed by `steps` successive inferences."""
    claims = [hypothesis]
    _check_claim(hypothesis, config)
    for _ in range(steps):
        claims.append(inference_step(claims[-1], config))
    return claims


def is_paradoxical(config: LiarConfig) -> bool:
    """True iff an odd number of sentences assert falsehood."""
    return sum(1 for _, asserted in config.sentences if not asserted) % 2 == 1


def basis(config: LiarConfig) -> tuple:
    return tuple(Claim(i, True) for i in range(1, config.m + 1)) + tuple(
        Claim(i, False) for i in range(1, config.m + 1)
    )


def basis_index(claim: Claim, m: int) -> int:
    return claim.sentence - 1 if claim.value else m + claim.sentence - 1


@dataclass(frozen=True, eq=False)
class StepMatrix:
    """U_D: column k has its 1 in the row of the claim inferred from basis claim k."""
    dim: int
    matrix: np.ndarray = field(repr=False)
    basis: tuple = ()

    def permutation(self) -> list:
        """perm[k] = index of the claim inferred from basis claim k."""
        return [int(np.argmax(self.matrix[:, k])) for k in range(self.dim)]


def build_step_matrix(config: LiarConfig) -> StepMatrix:
    claims = basis(config)
    matrix = np.zeros((2 * config.m, 2 * config.m))
    for k, claim in enumerate(claims):
        matrix[basis_index(inference_step(claim, config), config.m), k] = 1.0
    matrix.setflags(write=False)
    return StepMatrix(dim=2 * config.m, matrix=matrix, basis=claims)


def cycle_structure(step: StepMatrix) -> list:
    """Sorted cycle lengths of the step permutation."""
    return sorted(len(c) for c in _cycles(step.permutation()))


@dataclass(frozen=True, eq=False)
class EvolutionOperator:
    """Generator H with exp(tau H) = U_D, kept with its spectral decomposition."""
    H: np.ndarray = field(repr=False)
    tau: float
    phases: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)

    def at(self, t: float) -> np.ndarray:
        """U(t) = exp(t H)."""
        rotation = np.exp(1j * self.phases * (t / self.tau))
        return (self.vectors * rotation) @ self.vectors.conj().T

    def column(self, times: np.ndarray, k: int) -> np.ndarray:
        """U(t) e_k for every t, shape (len(times), dim)."""
        rotation = np.exp(1j * np.outer(np.asarray(times, dtype=float) / self.tau, self.phases))
        return (rotation * self.vectors[k].conj()) @ self.vectors.T

    def metadata(self) -> dict:
        return {
            "tau": self.tau,
            "branch": LOG_BRANCH,
            "eigenphases": sorted(float(p) for p in self.phases),
        }


def extract_hamiltonian(step: StepMatrix, tau: float = DEFAULT_TAU) -> EvolutionOperator:
    """H = log(U_D) / tau through the complex Schur form (diagonal for permutations)."""
    if not tau > 0:
        raise LiarConfigError(f"tau must be positive, got {tau!r}")
    U = np.asarray(step.matrix, dtype=float)
    if not (np.all((U == 0) | (U == 1))
            and np.all(U.sum(axis=0) == 1) and np.all(U.sum(axis=1) == 1)):
        raise LiarConfigError("Step matrix is not a permutation matrix")

    T, Z = schur(U.astype(complex), output="complex")
    off_diagonal = np.abs(T - np.diag(np.diag(T))).max()
    if off_diagonal > 1e-10:
        raise DecompositionError(f"Schur form is not diagonal (off-diagonal {off_diagonal:.3g})")

    phases = np.angle(np.diag(T))
    # Phase pi (even cycles) can come back as -pi; keep the branch (-pi, pi]
    phases = np.where(phases <= -math.pi + 1e-9, math.pi, phases)

    H = (Z * (1j * phases / tau)) @ Z.conj().T
    H = (H - H.conj().T) / 2
    operator = EvolutionOperator(H=H, tau=float(tau), phases=phases, vectors=Z)

    error = np.abs(operator.at(tau) - U).max()
    if error > 1e-10:
        raise DecompositionError(f"exp(tau H) misses U_D by {error:.3g}")
    return operator


def initial_state(config: LiarConfig, hypothesis: Claim) -> np.ndarray:
    """Equal-weight superposition of all claims, projected onto the hypothesis and renormalized."""
    _check_claim(hypothesis, config)
    dim = 2 * config.m
    psi0 = np.full(dim, 1.0 / math.sqrt(dim))
    projector = np.zeros((dim, dim))
    k = basis_index(hypothesis, config.m)
    projector[k, k] = 1.0
    psi = projector @ psi0
    return psi / np.linalg.norm(psi)


@dataclass
class ProbabilityTrace:
    """probs[t, k]: probability of basis claim k at times[t]."""
    times: np.ndarray
    probs: np.ndarray
    basis: tuple

    def probability(self, claim: Claim) -> np.ndarray:
        m = len(self.basis) // 2
        return self.probs[:, basis_index(claim, m)]

    def rows(self) -> list:
        """(time, claim label, probability) in time-major order."""
        return [
            (float(t), claim.label, float(p))
            for t, row in zip(self.times, self.probs)
            for claim, p in zip(self.basis, row)
        ]


def probability_trace(
    config: LiarConfig,
    hypothesis: Claim,
    times,
    tau: float = DEFAULT_TAU,
    operator: Optional[EvolutionOperator] = None,
) -> ProbabilityTrace:
    """|<e_claim, U(t) psi>|^2 for each claim and time."""
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0:
        raise GridError("Time grid is empty")
    if operator is None:
        operator = extract_hamiltonian(build_step_matrix(config), tau)
    psi = initial_state(config, hypothesis)
    amplitudes = operator.column(times, basis_index(hypothesis, config.m)) * psi[basis_index(hypothesis, config.m)]
    probs = np.abs(amplitudes) ** 2
    worst = np.abs(probs.sum(axis=1) - 1.0).max()
    if worst > NORMALIZATION_TOLERANCE:
        raise DecompositionError(f"Trace lost normalization by {worst:.3g}")
    return ProbabilityTrace(times=times, probs=probs, basis=basis(config))


def find_contradiction_times(trace: ProbabilityTrace, hypothesis: Claim) -> list:
    """Times at which the negated hypothesis is reached with certainty."""
    probs = trace.probability(hypothesis.negated())
    return sorted(float(t) for t, p in zip(trace.times, probs) if p >= CONTRADICTION_THRESHOLD)


def parse_grid_value(text: str) -> float:
    """"2.5", "pi", "10pi", "5pi/2", "pi/20" -> float."""
    match = _GRID_VALUE.match(text.strip())
    if not text.strip() or not match or not (match.group("num") or match.group("pi")):
        raise GridError(f"Cannot read grid value {text!r}")
    value = float(match.group("num")) if match.group("num") else 1.0
    if match.group("pi"):
        value *= math.pi
    if match.group("den"):
        value /= float(match.group("den"))
    return value


def time_grid(start: float, stop: float, step: float) -> np.ndarray:
    """start, start + step, ... up to stop inclusive; points are start + k*step."""
    if not step > 0 or stop < start:
        raise GridError(f"Need step > 0 and stop >= start, got {start}:{stop}:{step}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + np.arange(count) * step


def parse_grid(text: str) -> np.ndarray:
    """START:STOP:STEP -> grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise GridError(f"Grid must be START:STOP:STEP, got {text!r}")
    return time_grid(*(parse_grid_value(p) for p in parts))
