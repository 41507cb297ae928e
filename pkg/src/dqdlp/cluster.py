"""Simulated K-worker execution with classical-only coordinator messaging.

Workers are in-process lanes (one single-thread executor each). A job is
described to its worker by one query message carrying the set (tau, n), and
answered by one verdict message carrying a single bit. Messages hold integers
only, so nothing amplitude-like can cross the worker boundary.

Every job draws randomness from ``SeedSequence(seed_base, spawn_key=job.key)``,
so results do not depend on K, on lane assignment, or on completion order.
"""

from __future__ import annotations

import math
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .membership import MembershipVerdict, SetDescriptor, Verdict, membership_verdict
from .numt import ProblemInstance, ceil_log2

FRAMING_ALLOWANCE = 8

Backend = Callable[
    [ProblemInstance, SetDescriptor, int, np.random.Generator, "int | None"], MembershipVerdict
]


def tau_bits(r: int) -> int:
    return ceil_log2(r)


def n_bits(r: int) -> int:
    # n ranges over 0..ceil(log2 r) - 1 since 2^n < r
    return ceil_log2(ceil_log2(r))


def query_bits(r: int) -> int:
    return tau_bits(r) + n_bits(r)


def encode_query(tau: int, n: int, r: int) -> int:
    if not 0 <= tau < r or not 0 <= n < max(1, 2 ** n_bits(r)):
        raise ValueError(f"(tau={tau}, n={n}) not encodable for r={r}")
    return (n << tau_bits(r)) | tau


def decode_query(payload: int, r: int) -> tuple[int, int]:
    return payload & ((1 << tau_bits(r)) - 1), payload >> tau_bits(r)


@dataclass(frozen=True)
class ClassicalMessage:
    kind: str
    tau: int
    n: int
    payload: int
    bits_on_wire: int
    verdict_bit: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("query", "verdict"):
            raise ValueError(f"unknown message kind {self.kind!r}")
        for name in ("tau", "n", "payload", "bits_on_wire"):
            if type(getattr(self, name)) is not int:
                raise TypeError(f"message field {name} must be a plain int")
        if self.verdict_bit is not None and self.verdict_bit not in (0, 1):
            raise TypeError("verdict_bit must be 0 or 1")
        if not 0 <= self.payload < 2**self.bits_on_wire:
            raise ValueError("payload does not fit in bits_on_wire")

    @classmethod
    def query(cls, desc: SetDescriptor, r: int) -> "ClassicalMessage":
        return cls("query", desc.tau, desc.n, encode_query(desc.tau, desc.n, r), query_bits(r))

    @classmethod
    def verdict(cls, desc: SetDescriptor, bit: int) -> "ClassicalMessage":
        return cls("verdict", desc.tau, desc.n, bit, 1, verdict_bit=bit)


@dataclass
class CommsLedger:
    messages: int = 0
    total_bits: int = 0
    per_query_bits: int = 0

    def record(self, query: ClassicalMessage, reply: ClassicalMessage) -> None:
        self.messages += 2
        self.total_bits += query.bits_on_wire + reply.bits_on_wire
        self.per_query_bits = max(self.per_query_bits, query.bits_on_wire + reply.bits_on_wire)

    def to_dict(self, r: int) -> dict:
        return {
            "messages": self.messages,
            "total_bits": self.total_bits,
            "per_query_bits": self.per_query_bits,
            "bound": ledger_bound(r),
            "pass": ledger_check(self, r),
        }


def ledger_bound(r: int) -> int:
    loglog = math.ceil(math.log2(math.log2(r))) if r > 2 else 0
    return ceil_log2(r) + loglog + 1 + FRAMING_ALLOWANCE


def ledger_check(ledger: CommsLedger, r: int) -> bool:
    return ledger.per_query_bits <= ledger_bound(r)


@dataclass(frozen=True)
class Job:
    desc: SetDescriptor
    p: int
    key: tuple[int, ...]


@dataclass
class JobResult:
    job: Job
    result: MembershipVerdict
    worker: int
    query: ClassicalMessage
    reply: ClassicalMessage


@dataclass
class WorkerPool:
    K: int = 1
    seed_base: int = 0
    mode: str = "serial"

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.mode not in ("serial", "parallel"):
            raise ValueError(f"mode must be serial or parallel, got {self.mode!r}")

    def rng(self, key: tuple[int, ...]) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed_base, spawn_key=key))


@dataclass
class Coordinator:
    """Owns the ledger and hands jobs to worker lanes; results come back in submission order."""

    instance: ProblemInstance
    pool: WorkerPool = field(default_factory=WorkerPool)
    backend: Backend = membership_verdict
    max_attempts: int | None = None
    ledger: CommsLedger = field(default_factory=CommsLedger)
    _lanes: list[ThreadPoolExecutor] = field(default_factory=list, repr=False)

    @property
    def parallel(self) -> bool:
        return self.pool.mode == "parallel"

    def _run(self, job: Job) -> MembershipVerdict:
        rng = self.pool.rng(job.key)
        return self.backend(self.instance, job.desc, job.p, rng, self.max_attempts)

    def dispatch(self, jobs: Sequence[Job]) -> list[JobResult]:
        if not jobs:
            raise ValueError("no jobs to dispatch")
        r = self.instance.r
        queries = [ClassicalMessage.query(job.desc, r) for job in jobs]
        for q, job in zip(queries, jobs):
            tau, n = decode_query(q.payload, r)
            if (tau, n) != (job.desc.tau, job.desc.n):
                raise AssertionError("query encoding round-trip failed")

        if self.parallel and self.pool.K > 1 and len(jobs) > 1:
            if not self._lanes:
                self._lanes = [ThreadPoolExecutor(max_workers=1) for _ in range(self.pool.K)]
            workers = [i % self.pool.K for i in range(len(jobs))]
            futures: list[Future] = [
                self._lanes[w].submit(self._run, job) for w, job in zip(workers, jobs)
            ]
            verdicts = [f.result() for f in futures]
        else:
            workers = [0] * len(jobs)
            verdicts = [self._run(job) for job in jobs]

        out = []
        for job, q, w, v in zip(jobs, queries, workers, verdicts):
            reply = ClassicalMessage.verdict(job.desc, v.verdict.bit)
            self.ledger.record(q, reply)
            out.append(JobResult(job, v, w, q, reply))
        return out

    def close(self) -> None:
        for lane in self._lanes:
            lane.shutdown(wait=True)
        self._lanes = []

    def __enter__(self) -> "Coordinator":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def dispatch(
    pool: WorkerPool,
    jobs: Sequence[Job],
    instance: ProblemInstance,
    backend: Backend = membership_verdict,
    max_attempts: int | None = None,
) -> tuple[list[JobResult], CommsLedger]:
    with Coordinator(instance, pool, backend, max_attempts) as coord:
        results = coord.dispatch(jobs)
    return results, coord.ledger


def inconclusive(results: Sequence[JobResult]) -> list[JobResult]:
    return [res for res in results if res.result.verdict is Verdict.INCONCLUSIVE]
