"""Set-membership circuit: is the discrete log inside S_{n,tau}?

The circuit acts on registers (s: n qubits, x: m, z: m, anc: 1):

    phi0  |0>|0>|1>|0>
    phi1  H on s and x
    phi2  Lambda(M_b)               z <- z b^x
    phi3  Gamma_tau                 z <- z a^{-(s+tau)x}
    phi4  QFT^dagger on x
    phi5  U_g                       anc ^= [x == 0]
    phi6  QFT on x
    phi7  Gamma_tau^dagger
    phi8  Lambda(M_b)^dagger
    phi9  H on s and x

The QFT is applied exactly on 2**m points, so for orders r that do not divide
2**m the simulator follows the non-exact dynamics with no extra modelling.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from . import gates, qsim
from .numt import ProblemInstance

MARKER = 1


@dataclass(frozen=True)
class SetDescriptor:
    """S_{n,tau} = {tau + s mod r : s = 0..2**n - 1}."""

    tau: int
    n: int

    def validate(self, instance: ProblemInstance) -> None:
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if not 0 <= self.tau < instance.r:
            raise ValueError(f"tau={self.tau} outside [0, {instance.r})")
        if 2**self.n >= instance.r:
            raise ValueError(f"2^n = {2**self.n} must be < r = {instance.r}")
        if not self.n < instance.m - 1:
            raise ValueError(f"n={self.n} violates n < m - 1 (m={instance.m})")

    @property
    def size(self) -> int:
        return 2**self.n

    def elements(self, r: int) -> list[int]:
        return [(self.tau + s) % r for s in range(self.size)]

    def contains(self, t: int, r: int) -> bool:
        return (t - self.tau) % r < self.size


def layout_for(instance: ProblemInstance, desc: SetDescriptor) -> qsim.RegisterLayout:
    return qsim.RegisterLayout(n=desc.n, m=instance.m)


def evolve(instance: ProblemInstance, desc: SetDescriptor) -> Iterator[tuple[str, qsim.StateVector]]:
    """Yield ``("phi0", state) ... ("phi9", state)`` in circuit order."""
    desc.validate(instance)
    state = qsim.init_phi0(layout_for(instance, desc))
    yield "phi0", state
    state = qsim.hadamard_all(qsim.hadamard_all(state, 1), 2)
    yield "phi1", state
    state = qsim.apply_basis_map(state, gates.gate_lambda_Mb(instance))
    yield "phi2", state
    state = qsim.apply_basis_map(state, gates.gate_gamma(desc.tau, instance))
    yield "phi3", state
    state = qsim.qft_register2(state, inverse=True)
    yield "phi4", state
    state = qsim.apply_basis_map(state, gates.gate_Ug())
    yield "phi5", state
    state = qsim.qft_register2(state)
    yield "phi6", state
    state = qsim.apply_basis_map(state, gates.gate_gamma(desc.tau, instance, dagger=True))
    yield "phi7", state
    state = qsim.apply_basis_map(state, gates.gate_lambda_Mb(instance, dagger=True))
    yield "phi8", state
    state = qsim.hadamard_all(qsim.hadamard_all(state, 1), 2)
    yield "phi9", state


def build_phi9(instance: ProblemInstance, desc: SetDescriptor) -> qsim.StateVector:
    for _, state in evolve(instance, desc):
        pass
    return state


@dataclass(frozen=True)
class ProbabilityProbe:
    p_fourth_1: float
    p_third_marker_given_fourth_1: float
    p_joint_marker: float


def _anc1_register3(state: qsim.StateVector) -> np.ndarray:
    """Joint P(anc = 1, z = value) for every register-3 value."""
    return state.probabilities()[..., 1].sum(axis=(0, 1))


def probe(instance: ProblemInstance, desc: SetDescriptor) -> ProbabilityProbe:
    state = build_phi9(instance, desc)
    p4 = qsim.marginal_probability(state, lambda s, x, z, anc: anc == 1)
    joint = qsim.marginal_probability(state, lambda s, x, z, anc: (anc == 1) & (z == MARKER))
    return ProbabilityProbe(p4, joint / p4 if p4 > 0 else 0.0, joint)


def third_register_distribution(instance: ProblemInstance, desc: SetDescriptor) -> dict[int, float]:
    """P(z = value | anc = 1) over register-3 values with nonzero weight."""
    joint = _anc1_register3(build_phi9(instance, desc))
    total = joint.sum()
    return {int(z): float(p / total) for z, p in enumerate(joint) if p / total > qsim.IMPOSSIBLE}


@dataclass(frozen=True)
class _Sampler:
    """Cached measurement statistics of phi9; every preparation of a set is identical."""

    fourth: np.ndarray  # cumulative marginal of register 4
    third_given_1: np.ndarray  # cumulative register-3 marginal after observing anc = 1


@lru_cache(maxsize=4096)
def _sampler(instance: ProblemInstance, desc: SetDescriptor) -> _Sampler:
    state = build_phi9(instance, desc)
    fourth = qsim.register_marginal(state, 4)
    fourth = np.where(fourth / fourth.sum() < qsim.IMPOSSIBLE, 0.0, fourth)
    third = _anc1_register3(state)
    third = third / third.sum() if third.sum() > 0 else third
    third = np.where(third < qsim.IMPOSSIBLE, 0.0, third)
    return _Sampler(np.cumsum(fourth), np.cumsum(third))


@dataclass(frozen=True)
class TrialOutcome:
    fourth_bit: int
    third_value: int | None
    postselect_attempts: int

    @property
    def inconclusive(self) -> bool:
        return self.fourth_bit == 0

    @property
    def marker_hit(self) -> bool:
        return self.third_value == MARKER


def default_max_attempts(n: int) -> int:
    return 64 * 2**n


def run_trial(
    instance: ProblemInstance,
    desc: SetDescriptor,
    rng: np.random.Generator,
    max_attempts: int | None = None,
) -> TrialOutcome:
    """Prepare phi9 and measure register 4 until it reads 1, then measure register 3.

    Draws follow :func:`qsim.measure` exactly (one uniform per measurement), so a
    seeded run matches measuring freshly built states with the same generator.
    """
    if max_attempts is None:
        max_attempts = default_max_attempts(desc.n)
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    sampler = _sampler(instance, desc)
    if sampler.fourth[-1] - sampler.fourth[0] <= 0:
        return TrialOutcome(0, None, max_attempts)
    for attempt in range(1, max_attempts + 1):
        if qsim.sample_index(sampler.fourth, rng) == 1:
            return TrialOutcome(1, qsim.sample_index(sampler.third_given_1, rng), attempt)
    return TrialOutcome(0, None, max_attempts)


class Verdict(str, enum.Enum):
    TRUE = "true"
    FALSE = "false"
    INCONCLUSIVE = "inconclusive"

    @property
    def bit(self) -> int:
        return 1 if self is Verdict.TRUE else 0


@dataclass
class MembershipVerdict:
    desc: SetDescriptor
    verdict: Verdict
    trials: list[TrialOutcome] = field(default_factory=list)

    @property
    def postselect_attempts(self) -> int:
        return sum(t.postselect_attempts for t in self.trials)

    def log_lines(self) -> list[str]:
        """JSON lines ``{tau, n, attempt, fourth, third, marker_hit}``, one per trial."""
        return [
            json.dumps(
                {
                    "tau": self.desc.tau,
                    "n": self.desc.n,
                    "attempt": t.postselect_attempts,
                    "fourth": t.fourth_bit,
                    "third": t.third_value,
                    "marker_hit": t.marker_hit,
                },
                sort_keys=True,
            )
            for t in self.trials
        ]


def membership_verdict(
    instance: ProblemInstance,
    desc: SetDescriptor,
    p: int,
    rng: np.random.Generator,
    max_attempts: int | None = None,
) -> MembershipVerdict:
    """Collect ``p`` post-selected trials; True iff any of them hits the marker."""
    if p < 1:
        raise ValueError("p must be >= 1")
    trials: list[TrialOutcome] = []
    for _ in range(p):
        trial = run_trial(instance, desc, rng, max_attempts)
        trials.append(trial)
        if trial.inconclusive:
            return MembershipVerdict(desc, Verdict.INCONCLUSIVE, trials)
    hit = any(t.marker_hit for t in trials)
    return MembershipVerdict(desc, Verdict.TRUE if hit else Verdict.FALSE, trials)


def trial_to_dict(trial: TrialOutcome) -> dict:
    return asdict(trial)
