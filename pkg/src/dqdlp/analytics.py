"""Closed-form probabilities and bounds for the membership test and the search.

Closed forms are evaluated in exact rational arithmetic (``Fraction``) and only
converted to float at the edge. Functions named ``*_as_printed`` keep
alternative expressions that disagree with the exact forms; they exist for
comparison and are never used as oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .numt import ceil_log2


def _check_set(n: int, r: int) -> None:
    if n < 0 or 2**n >= r:
        raise ValueError(f"need 0 <= n and 2^n < r (n={n}, r={r})")


def joint_fourth1_in_fraction(n: int, r: int) -> Fraction:
    _check_set(n, r)
    k = 2**n
    num = (k - 1) ** 2 * (r - 1) + (r + k - 1) ** 2 + (k - 1) * (r - 1) + (k - 1) * (r - 1) ** 2
    return Fraction(num, k * k * r * r)


def joint_marker_in_fraction(n: int, r: int) -> Fraction:
    _check_set(n, r)
    k = 2**n
    return Fraction((r + k - 1) ** 2 + (k - 1) * (r - 1) ** 2, k * k * r * r)


def exact_joint_fourth1_in(n: int, r: int) -> float:
    """P(anc = 1) on phi9 when t is in S_{n,tau}, assuming an exact QFT."""
    return float(joint_fourth1_in_fraction(n, r))


def exact_joint_marker_in(n: int, r: int) -> float:
    """P(anc = 1, z = 1) on phi9 when t is in S_{n,tau}, assuming an exact QFT."""
    return float(joint_marker_in_fraction(n, r))


def prop_t_in_conditional_as_printed(n: int, r: int, variant: str = "statement") -> float:
    """Alternative closed forms for the conditional marker probability when t is in S.

    ``variant="statement"`` carries the ``2^n (r^2 + 1)`` numerator term;
    ``variant="derivation"`` carries ``(2^n - 1)(r^2 + 1)``.
    """
    k = 2**n
    factor = {"statement": k, "derivation": k - 1}[variant]
    num = r * r + (k - 1) ** 2 + factor * (r * r + 1)
    den = (k - 1) ** 2 * r + r * r + (k - 1) * r * (r + 1)
    return float(Fraction(num, den))


def notin_probabilities(r: int) -> tuple[float, float]:
    """(P(anc = 1), P(z = 1 | anc = 1)) when t is not in the set, exact QFT."""
    if r < 2:
        raise ValueError("r must be >= 2")
    return 1 / r, 1 / r


def exact_qft_probabilities(offset: int, n: int, r: int) -> tuple[Fraction, Fraction]:
    """(P(anc = 1), P(anc = 1, z = 1)) on phi9 when r divides 2**m.

    ``offset`` is ``(t - tau) mod r``. Set element s contributes the
    eigenvectors l with ``(offset - s) l = 0 mod r``; there are
    ``g_s = gcd(offset - s, r)`` of them, which gives

        P(anc = 1)        = sum_s g_s   / (2^n r)
        P(anc = 1, z = 1) = sum_s g_s^2 / (2^n r^2)

    For prime r this reduces to the two closed forms above (t in S) and to
    1/r, 1/r^2 (t not in S). For composite r the extra l values matter.
    """
    _check_set(n, r)
    k = 2**n
    g = [math.gcd((offset - s) % r, r) for s in range(k)]
    return Fraction(sum(g), k * r), Fraction(sum(x * x for x in g), k * r * r)


def iteration_bounds(r: int, p: int) -> tuple[float, float]:
    """(P(at least one marker in p trials | t in S) lower bound, P(no marker | t not in S))."""
    if p < 1:
        raise ValueError("p must be >= 1")
    per_trial = Fraction(1) / (2 + Fraction(2, r))
    return float(1 - (1 - per_trial) ** p), float(Fraction(r - 1, r) ** p)


def iteration_bound_loose(r: int, p: int) -> float:
    return float(1 - Fraction(1, 2**p) * Fraction(r + 2, r + 1) ** p)


def d_factor(r: int) -> float:
    return 2 * (r + 1) / (r + 2)


def eform_bound(r: int, p: int) -> float:
    """exp(-2p / (d^p - 1)) with d = 2(r+1)/(r+2)."""
    d = d_factor(r)
    return math.exp(-2 * p / (d**p - 1))


def p_constraint_ok(r: int, p: int) -> bool:
    return p + math.log2(p) <= math.log2(r)


def success_bound_exact_qft(r: int, p: int) -> tuple[float, float]:
    """(middle form, exponential form) of the exact-QFT success bound.

    middle = (1 - 2^-p ((r+2)/(r+1))^p)^ceil(log2 r); requires p + log2 p <= log2 r.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if not p_constraint_ok(r, p):
        raise ValueError(f"p too large for r (p={p}, r={r})")
    middle = Fraction(1) - Fraction(1, 2**p) * Fraction(r + 2, r + 1) ** p
    return float(middle ** ceil_log2(r)), eform_bound(r, p)


def nonexact_middle(r: int, m: int, p: int) -> float:
    """(1 - (1 - (2^m - 1)^2 / 2^(2m+1))^p)^ceil(log2 r)."""
    if p < 1 or m < 1:
        raise ValueError("p and m must be >= 1")
    per_set = Fraction((2**m - 1) ** 2, 2 ** (2 * m + 1))
    return float((1 - (1 - per_set) ** p) ** ceil_log2(r))


def nonexact_per_set(m: int, p: int) -> float:
    per_set = Fraction((2**m - 1) ** 2, 2 ** (2 * m + 1))
    return float(1 - (1 - per_set) ** p)


def success_bound_terms(r: int, m: int, p: int) -> dict[str, float]:
    return {"middle": nonexact_middle(r, m, p), "exponential": eform_bound(r, p)}


def success_bound_nonexact_qft(r: int, m: int, p: int) -> float:
    """Lower bound on the search success probability without an exact QFT.

    The bound is asserted as a chain ``P' > middle > exp(-2p/(d^p - 1))``; this
    returns the larger of the two asserted terms. The chain's second step does
    not hold everywhere (r=35, m=7, p=2 gives middle 0.167 < 0.238), so both
    terms are exposed by :func:`success_bound_terms`.
    """
    return max(success_bound_terms(r, m, p).values())


def nonexact_bounds(m: int, n: int, r: int) -> dict[str, float]:
    """The non-exact-QFT bounds on phi9 statistics, keyed by what they bound."""
    if not n < m - 1:
        raise ValueError("need n < m - 1")
    _check_set(n, r)
    M, K = 2**m, 2**n
    return {
        "fourth1_in_upper": float(Fraction(1, M * K) + Fraction(1, K) + Fraction(1, r)),
        "fourth1_notin_lower": float(Fraction(1, r)),
        "joint_marker_in_lower": float(Fraction((M - 1) ** 2, M * M * K)),
        "joint_marker_notin": float(Fraction(1, M * M)),
        "cond_marker_in_lower": float(Fraction((M - 1) ** 2, 2 * M * M)),
        "cond_marker_notin_upper": float(Fraction(r, M * M)),
    }


@dataclass
class BoundReport:
    r: int
    n: int
    m: int
    p: int
    d: float
    values: dict[str, float] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)


def bound_report(r: int, n: int, m: int, p: int) -> BoundReport:
    """Every closed form for the given parameters; violated preconditions are recorded per formula."""
    report = BoundReport(r=r, n=n, m=m, p=p, d=d_factor(r))
    v = report.values

    def attempt(name: str, fn) -> None:
        try:
            out = fn()
        except ValueError as exc:
            report.errors[name] = str(exc)
            return
        if isinstance(out, dict):
            v.update(out)
        elif isinstance(out, tuple):
            for suffix, val in zip(out[1], out[0]):
                v[f"{name}.{suffix}"] = val
        else:
            v[name] = out

    attempt("exact_joint_fourth1_in", lambda: exact_joint_fourth1_in(n, r))
    attempt("exact_joint_marker_in", lambda: exact_joint_marker_in(n, r))
    attempt("prop_t_in_conditional_as_printed", lambda: prop_t_in_conditional_as_printed(n, r))
    attempt("notin_probabilities", lambda: (notin_probabilities(r), ("p_fourth_1", "p_marker_given_fourth_1")))
    attempt("iteration_bounds", lambda: (iteration_bounds(r, p), ("lower_in", "miss_notin")))
    attempt("success_bound_exact_qft", lambda: (success_bound_exact_qft(r, p), ("middle", "exponential")))
    attempt("success_bound_nonexact_qft", lambda: success_bound_nonexact_qft(r, m, p))
    attempt("success_bound_nonexact_qft.middle", lambda: nonexact_middle(r, m, p))
    attempt("nonexact_bounds", lambda: nonexact_bounds(m, n, r))
    return report
