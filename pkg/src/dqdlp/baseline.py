"""Shor's three-register discrete-log circuit, for comparison and cross-checking.

Registers x, y, z hold m qubits each. After Hadamards on x and y and the
controlled multiplications z <- z a^x b^y, an inverse QFT on x and y leaves
peaks near x = 2^m l / r and y = 2^m (t l) / r, from which t = (tl) l^-1 mod r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import qsim
from .numt import ProblemInstance, mod_inverse, mod_pow, verify


@dataclass(frozen=True)
class ShorOutcome:
    x_out: int
    y_out: int
    t_candidate: int | None

    @property
    def accepted(self) -> bool:
        return self.t_candidate is not None


def baseline_state(instance: ProblemInstance, transform: bool = True) -> np.ndarray:
    """Amplitudes indexed ``[x, y, z]``; with ``transform=False`` the state before the inverse QFTs."""
    M, N = 2**instance.m, instance.N
    x = np.arange(M)
    ax = np.array([mod_pow(instance.a, int(v), N) for v in x], dtype=np.int64)
    by = np.array([mod_pow(instance.b, int(v), N) for v in x], dtype=np.int64)
    z = (ax[:, None] * by[None, :]) % N
    amps = np.zeros((M, M, M), dtype=np.complex128)
    amps[x[:, None], x[None, :], z] = 1.0 / M
    if transform:
        amps = np.fft.fft(np.fft.fft(amps, axis=0, norm="ortho"), axis=1, norm="ortho")
    return amps


@lru_cache(maxsize=32)
def _xy_cumulative(instance: ProblemInstance) -> np.ndarray:
    probs = (np.abs(baseline_state(instance)) ** 2).sum(axis=2).reshape(-1)
    return np.cumsum(probs)


def decode(x_out: int, y_out: int, instance: ProblemInstance) -> int | None:
    """Round each reading to the nearest multiple of 2^m / r, then invert l."""
    M, r = 2**instance.m, instance.r
    l = round(x_out * r / M) % r
    tl = round(y_out * r / M) % r
    if math.gcd(l, r) != 1:
        return None
    t = tl * mod_inverse(l, r) % r
    return t if verify(instance, t) else None


def shor_dlp_run(instance: ProblemInstance, rng: np.random.Generator) -> ShorOutcome:
    """One joint measurement of x and y followed by classical decoding."""
    M = 2**instance.m
    idx = qsim.sample_index(_xy_cumulative(instance), rng)
    x_out, y_out = divmod(idx, M)
    return ShorOutcome(x_out, y_out, decode(x_out, y_out, instance))


def qubit_report(m: int, n: int) -> tuple[int, int]:
    """(baseline qubits, set-membership circuit qubits) = (3m, 2m + n + 1)."""
    if not 0 <= n < m - 1:
        raise ValueError(f"need 0 <= n < m - 1 (n={n}, m={m})")
    return 3 * m, 2 * m + n + 1
