"""Classical modular arithmetic and brute-force discrete-log oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass


class NotInvertibleError(ValueError):
    pass


class InvalidInstanceError(ValueError):
    pass


def mod_pow(base: int, exp: int, modulus: int) -> int:
    """Return ``base**exp mod modulus``; negative exponents go through the inverse."""
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    if exp < 0 and math.gcd(base, modulus) != 1:
        raise NotInvertibleError(f"{base} is not invertible mod {modulus}")
    return pow(base, exp, modulus)


def mod_inverse(x: int, modulus: int) -> int:
    return mod_pow(x, -1, modulus)


def multiplicative_order(a: int, N: int) -> int:
    if N < 2:
        raise ValueError("modulus must be >= 2")
    if math.gcd(a, N) != 1:
        raise ValueError(f"no order: gcd({a}, {N}) != 1")
    value = a % N
    r = 1
    while value != 1:
        value = value * a % N
        r += 1
        if r >= N:  # unreachable for gcd(a, N) == 1, kept as a hard stop
            raise ValueError(f"no order found for {a} mod {N}")
    return r


def ceil_log2(x: float) -> int:
    """Smallest k >= 0 with 2**k >= x (0 for x <= 1)."""
    if x <= 1:
        return 0
    if isinstance(x, int):
        return (x - 1).bit_length()
    return math.ceil(math.log2(x))


def default_register_size(r: int, N: int, epsilon: float = 0.5) -> int:
    """Register width ceil(log2 r) + ceil(log2 1/eps), raised until 2**m >= N."""
    m = max(1, ceil_log2(r) + ceil_log2(1.0 / epsilon))
    while 2**m < N:
        m += 1
    return m


@dataclass(frozen=True)
class ProblemInstance:
    """A promised-solvable DLP instance ``b = a^t mod N`` with register width ``m``.

    Build through :meth:`create`, which derives ``r`` and ``m`` when omitted and
    checks every invariant (order minimality, solvability, register capacity).
    """

    a: int
    b: int
    N: int
    r: int
    m: int
    epsilon: float = 0.5

    @classmethod
    def create(
        cls,
        a: int,
        b: int,
        N: int,
        r: int | None = None,
        m: int | None = None,
        epsilon: float = 0.5,
    ) -> "ProblemInstance":
        if N < 2:
            raise InvalidInstanceError("modulus must be >= 2")
        if not 0 < epsilon <= 1:
            raise InvalidInstanceError("epsilon must lie in (0, 1]")
        a %= N
        b %= N
        if math.gcd(a, N) != 1:
            raise InvalidInstanceError(f"gcd(a={a}, N={N}) != 1")
        order = multiplicative_order(a, N)
        if r is None:
            r = order
        elif r != order:
            # a^r == 1 is required, and r must be the smallest such exponent
            if r < 1 or pow(a, r, N) != 1:
                raise InvalidInstanceError(f"a^r != 1 mod N for r={r}")
            raise InvalidInstanceError(f"r={r} is not the multiplicative order ({order})")
        if m is None:
            m = default_register_size(r, N, epsilon)
        if 2**m < N:
            raise InvalidInstanceError(f"2^m = {2**m} cannot hold residues mod {N}")
        if m < ceil_log2(r) + ceil_log2(1.0 / epsilon):
            raise InvalidInstanceError(f"m={m} too small for r={r}, epsilon={epsilon}")
        inst = cls(a=a, b=b, N=N, r=r, m=m, epsilon=epsilon)
        brute_force_dlp(inst)  # solvability promise
        return inst


@dataclass(frozen=True)
class DlpSolution:
    t: int


def brute_force_dlp(instance: ProblemInstance) -> DlpSolution:
    a, b, N = instance.a, instance.b, instance.N
    value = 1 % N
    for t in range(instance.r):
        if value == b % N:
            return DlpSolution(t)
        value = value * a % N
    raise InvalidInstanceError("unsolvable instance: b is not a power of a")


def f_hat(s: int, x: int, instance: ProblemInstance) -> int:
    """``a^(-s*x) * b^x mod N``; identically 1 when ``s`` is the discrete log."""
    a, b, N, r = instance.a, instance.b, instance.N, instance.r
    return mod_pow(a, (-s * x) % r, N) * mod_pow(b, x, N) % N


def verify(instance: ProblemInstance, t: int) -> bool:
    return mod_pow(instance.a, t, instance.N) == instance.b % instance.N
