"""Dichotomy search for the discrete log over sets S_{n,tau}.

The walk queries S_{n,tau}; a True verdict keeps tau and halves the set
(n -> n-1), a False verdict slides the window (tau -> tau + 2^n mod r). A True
at n = 0 names the candidate, which is then checked classically.

Recovery ladder (the bare walk has no failure branch):

* inconclusive verdicts count as False;
* if a level slides a full period without a True, the walk backtracks to the
  parent level and resumes sliding just past the set that misled it;
* if the top level slides a full period, the pass is stranded;
* a stranded pass, a rejected candidate or an exhausted query budget starts a
  fresh pass on a new rng stream, up to ``max_restarts`` times.

Each step records the transition taken out of it in ``note``: ``descend``,
``advance``, ``backtrack``, ``candidate``, ``stranded``, ``budget`` or
``scan`` (a level-0 step of the parallel plan).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .cluster import Coordinator, Job, WorkerPool
from .membership import MembershipVerdict, SetDescriptor, TrialOutcome, Verdict, trial_to_dict
from .numt import DlpSolution, ProblemInstance, brute_force_dlp, verify

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchConfig:
    n0: int
    p: int = 2
    epsilon: float = 0.5
    max_restarts: int = 0
    seed: int = 0
    max_attempts: int | None = None
    max_queries: int | None = None
    enforce_constraint: bool = False

    def validate(self, instance: ProblemInstance) -> None:
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be >= 0")
        SetDescriptor(0, self.n0).validate(instance)
        if self.p + math.log2(self.p) > math.log2(instance.r):
            msg = f"p={self.p} violates p + log2 p <= log2 r for r={instance.r}"
            if self.enforce_constraint:
                raise ValueError(msg)
            log.warning(msg)

    def query_budget(self, r: int) -> int:
        if self.max_queries is not None:
            return self.max_queries
        return 16 * r * (self.n0 + 1)


@dataclass
class SearchStep:
    desc: SetDescriptor
    verdict: Verdict
    worker: int
    trials: list[TrialOutcome]
    restart: int
    note: str = ""

    @property
    def positive(self) -> bool:
        return self.verdict is Verdict.TRUE

    def to_dict(self) -> dict:
        return {
            "tau": self.desc.tau,
            "n": self.desc.n,
            "verdict": self.verdict.value,
            "worker": self.worker,
            "restart": self.restart,
            "note": self.note,
            "trials": [trial_to_dict(t) for t in self.trials],
        }


@dataclass
class SearchTrace:
    steps: list[SearchStep] = field(default_factory=list)
    result: DlpSolution | None = None
    candidate: int | None = None
    restarts_used: int = 0
    total_postselect_attempts: int = 0
    failure: str | None = None
    ledger: dict = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.result is not None

    def to_dict(self) -> dict:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "result": None if self.result is None else self.result.t,
            "candidate": self.candidate,
            "restarts": self.restarts_used,
            "attempts": self.total_postselect_attempts,
            "queries": len(self.steps),
            "failure": self.failure,
            "ledger": self.ledger,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class _BudgetExhausted(Exception):
    pass


class _Pass:
    """One attempt of the walk on its own rng stream."""

    def __init__(self, coord: Coordinator, config: SearchConfig, trace: SearchTrace, key: tuple[int, ...]):
        self.coord = coord
        self.config = config
        self.trace = trace
        self.key = key
        self.r = coord.instance.r
        self.budget = config.query_budget(self.r)
        self.queries = 0

    def query(self, descs: list[SetDescriptor]) -> list[SearchStep]:
        if self.queries + len(descs) > self.budget:
            if self.trace.steps:
                self.trace.steps[-1].note = "budget"
            raise _BudgetExhausted
        jobs = [Job(d, self.config.p, (*self.key, self.queries + i)) for i, d in enumerate(descs)]
        self.queries += len(descs)
        out = []
        for res in self.coord.dispatch(jobs):
            step = SearchStep(res.job.desc, res.result.verdict, res.worker, res.result.trials, self.key[-1])
            self.trace.steps.append(step)
            self.trace.total_postselect_attempts += res.result.postselect_attempts
            out.append(step)
        return out

    def descend(self, n: int, tau: int) -> int | None:
        """Walk from S_{n,tau} with ``n`` as the top level; candidate or None if stranded."""
        stack: list[tuple[int, int, int]] = []
        advanced = 0
        while True:
            (step,) = self.query([SetDescriptor(tau, n)])
            if step.positive:
                if n == 0:
                    step.note = "candidate"
                    return tau
                step.note = "descend"
                stack.append((n, tau, advanced))
                n, advanced = n - 1, 0
                continue
            step.note = "advance"
            advanced += 2**n
            tau = (tau + 2**n) % self.r
            while advanced >= self.r:
                if not stack:
                    step.note = "stranded"
                    return None
                step.note = "backtrack"
                n, parent_tau, advanced = stack.pop()
                advanced += 2**n
                tau = (parent_tau + 2**n) % self.r

    def run_serial(self) -> int | None:
        return self.descend(self.config.n0, 0)

    def run_parallel(self) -> int | None:
        n0 = self.config.n0
        plan = plan_queries(self.r, n0)
        scan = self.query(plan.level0)
        for step in scan:
            step.note = "scan"
        confirmed = [s.desc.tau for s in scan if s.positive]
        if not confirmed:
            scan[-1].note = "stranded"
            return None
        for tau in confirmed:
            if n0 == 0:
                return tau
            candidate = self.descend(n0 - 1, tau)
            if candidate is not None:
                return candidate
        return None


def solve(
    instance: ProblemInstance,
    config: SearchConfig,
    coordinator: Coordinator | None = None,
    stream: tuple[int, ...] = (),
) -> SearchTrace:
    """Run the search; failures come back as data in ``trace.failure``.

    Job ``q`` of restart ``k`` draws from ``SeedSequence(seed, spawn_key=(*stream, k, q))``.
    """
    config.validate(instance)
    own = coordinator is None
    coord = coordinator or Coordinator(instance, WorkerPool(seed_base=config.seed), max_attempts=config.max_attempts)
    trace = SearchTrace()
    try:
        for restart in range(config.max_restarts + 1):
            trace.restarts_used = restart
            run = _Pass(coord, config, trace, (*stream, restart))
            try:
                candidate = run.run_parallel() if coord.parallel else run.run_serial()
            except _BudgetExhausted:
                trace.failure = "query budget exhausted"
                continue
            if candidate is None:
                trace.failure = "stranded: top level wrapped without a True verdict"
                continue
            trace.candidate = candidate
            if verify(instance, candidate):
                trace.result = DlpSolution(candidate)
                trace.failure = None
                break
            trace.steps[-1].note = "rejected"
            trace.failure = f"candidate {candidate} failed classical verification"
    finally:
        if own:
            coord.close()
    if trace.result is None:
        trace.failure = f"restarts exhausted ({trace.failure})"
    trace.ledger = coord.ledger.to_dict(instance.r)
    return trace


@dataclass(frozen=True)
class QueryPlan:
    r: int
    n0: int
    level0: list[SetDescriptor]

    def depth(self, K: int) -> int:
        """Wall-clock level-0 query rounds with K workers."""
        if K < 1:
            raise ValueError("K must be >= 1")
        return -(-len(self.level0) // K)


def plan_queries(r: int, n0: int) -> QueryPlan:
    if n0 < 0 or 2**n0 >= r:
        raise ValueError(f"need 0 <= n0 and 2^n0 < r (n0={n0}, r={r})")
    size = 2**n0
    return QueryPlan(r, n0, [SetDescriptor(k * size, n0) for k in range(-(-r // size))])


def truthful_walk(r: int, n0: int, t: int) -> list[SetDescriptor]:
    """Sets the serial walk queries when every verdict is exactly ``t in S``."""
    n, tau, out = n0, 0, []
    while True:
        desc = SetDescriptor(tau, n)
        out.append(desc)
        if desc.contains(t, r):
            if n == 0:
                return out
            n -= 1
        else:
            tau = (tau + 2**n) % r


class TruthfulOracle:
    """Drop-in membership backend answering ``t in S`` exactly, with no trials."""

    def __init__(self, t: int | None = None):
        self.t = t

    def __call__(
        self,
        instance: ProblemInstance,
        desc: SetDescriptor,
        p: int,
        rng: np.random.Generator,
        max_attempts: int | None = None,
    ) -> MembershipVerdict:
        t = self.t if self.t is not None else brute_force_dlp(instance).t
        verdict = Verdict.TRUE if desc.contains(t, instance.r) else Verdict.FALSE
        return MembershipVerdict(desc, verdict, [])
