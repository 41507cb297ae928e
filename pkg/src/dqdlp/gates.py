"""Modular-multiplication gates, U_g and the shared eigenvectors psi_l.

Every gate here is a basis permutation (see :func:`qsim.apply_basis_map`).
Multiplications touch only register-3 values ``z < N``; ``z >= N`` is left
fixed so that each map stays a bijection on all ``2**m`` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numt import ProblemInstance, mod_pow
from .qsim import BasisFn, IndexArrays


def _multiply(z: np.ndarray, factor: np.ndarray, N: int) -> np.ndarray:
    return np.where(z < N, (z * factor) % N, z)


def _power_table(c: int, count: int, N: int, sign: int) -> np.ndarray:
    """``c**(sign * x) mod N`` for x = 0..count-1."""
    step = mod_pow(c, sign, N)
    table = np.empty(count, dtype=np.int64)
    value = 1 % N
    for x in range(count):
        table[x] = value
        value = value * step % N
    return table


def chain(*maps: BasisFn) -> BasisFn:
    """Apply ``maps`` left to right."""

    def fn(s, x, z, anc) -> IndexArrays:
        for f in maps:
            s, x, z, anc = f(s, x, z, anc)
        return s, x, z, anc

    return fn


def identity(s, x, z, anc) -> IndexArrays:
    return s, x, z, anc


def gate_M(c: int, instance: ProblemInstance) -> BasisFn:
    """M_c: z -> z*c mod N on register 3."""
    N = instance.N
    if math.gcd(c, N) != 1:
        raise ValueError(f"M_{c} is not a permutation mod {N}")
    c %= N

    def fn(s, x, z, anc) -> IndexArrays:
        return s, x, _multiply(z, np.int64(c), N), anc

    return fn


def gate_lambda_M(c: int, instance: ProblemInstance, dagger: bool = False) -> BasisFn:
    """Lambda(M_c): |x>|z> -> |x>|z c^{+-x} mod N>, controlled by register 2."""
    N = instance.N
    if math.gcd(c, N) != 1:
        raise ValueError(f"Lambda(M_{c}) is not a permutation mod {N}")
    table = _power_table(c, 2**instance.m, N, -1 if dagger else 1)

    def fn(s, x, z, anc) -> IndexArrays:
        return s, x, _multiply(z, table[x], N), anc

    return fn


def gate_lambda_Mb(instance: ProblemInstance, dagger: bool = False) -> BasisFn:
    return gate_lambda_M(instance.b, instance, dagger)


def gate_power(tau: int, instance: ProblemInstance, sign: int) -> BasisFn:
    """z -> z * a^{sign*(s+tau)*x} mod N, controlled by registers 1 and 2."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    N, r = instance.N, instance.r
    powers = np.array(orbit(instance), dtype=np.int64)

    def fn(s, x, z, anc) -> IndexArrays:
        exponent = (sign * (s + tau) * x) % r
        return s, x, _multiply(z, powers[exponent], N), anc

    return fn


def gate_gamma(tau: int, instance: ProblemInstance, dagger: bool = False) -> BasisFn:
    """Gamma_tau: z -> z a^{-(s+tau)x}; the dagger flips the exponent sign."""
    return gate_power(tau, instance, +1 if dagger else -1)


def gate_xi(U: BasisFn) -> BasisFn:
    """Xi(U): |s>|x>|z> -> |s> U^s (|x>|z>), by applying U once per unit of s."""

    def fn(s, x, z, anc) -> IndexArrays:
        s, x, z, anc = np.broadcast_arrays(s, x, z, anc)
        x, z = x.copy(), z.copy()
        for k in range(1, int(s.max(initial=0)) + 1):
            active = s >= k
            _, x_new, z_new, _ = U(s[active], x[active], z[active], anc[active])
            x[active], z[active] = x_new, z_new
        return s, x, z, anc

    return fn


def gate_gamma_composed(tau: int, instance: ProblemInstance) -> BasisFn:
    """Xi(Lambda(M_a^dag)) followed by Lambda(M_{a^tau}^dag): z -> z a^{-(s+tau)x}."""
    a_tau = mod_pow(instance.a, tau % instance.r, instance.N)
    return chain(
        gate_xi(gate_lambda_M(instance.a, instance, dagger=True)),
        gate_lambda_M(a_tau, instance, dagger=True),
    )


def _flip_on_zero(s, x, z, anc) -> IndexArrays:
    return s, x, z, np.where(x == 0, 1 - anc, anc)


def gate_Ug() -> BasisFn:
    """U_g for the 0/1 indicator g(x) = [x == 0]: flips the ancilla iff x = 0."""
    return _flip_on_zero


@dataclass(frozen=True)
class EigenVector:
    l: int
    amps: np.ndarray


def orbit(instance: ProblemInstance) -> list[int]:
    """``[a^0, a^1, ..., a^(r-1)] mod N``."""
    out, value = [], 1 % instance.N
    for _ in range(instance.r):
        out.append(value)
        value = value * instance.a % instance.N
    return out


def make_eigenvector(l: int, instance: ProblemInstance) -> EigenVector:
    """psi_l = r^-1/2 sum_k omega_r^{-lk} |a^k>, laid out over 2**m register-3 values."""
    r = instance.r
    if not 0 <= l < r:
        raise ValueError(f"l must lie in [0, {r})")
    amps = np.zeros(2**instance.m, dtype=np.complex128)
    k = np.arange(r)
    amps[orbit(instance)] = np.exp(-2j * np.pi * l * k / r) / np.sqrt(r)
    return EigenVector(l, amps)
