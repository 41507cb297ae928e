import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqdlp import analytics, membership
from dqdlp.membership import SetDescriptor

from conftest import find_instance

PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71]


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(PRIMES), st.integers(0, 5), st.integers(0, 10**6))
def test_closed_forms_agree_with_gcd_form_for_prime_r(r, n, seed):
    if 2**n >= r:
        n = 0
    offset = seed % r
    p_anc, p_joint = analytics.exact_qft_probabilities(offset, n, r)
    if offset < 2**n:
        assert p_anc == analytics.joint_fourth1_in_fraction(n, r)
        assert p_joint == analytics.joint_marker_in_fraction(n, r)
        assert p_anc == Fraction(r + 2**n - 1, 2**n * r)
    else:
        assert (float(p_anc), float(p_joint / p_anc)) == pytest.approx(analytics.notin_probabilities(r))


def test_simulator_matches_gcd_form_at_r8(r8):
    for n in (0, 1, 2):
        for tau in range(8):
            pr = membership.probe(r8, SetDescriptor(tau, n))
            p_anc, p_joint = analytics.exact_qft_probabilities((6 - tau) % 8, n, 8)
            assert pr.p_fourth_1 == pytest.approx(float(p_anc), abs=1e-9)
            assert pr.p_joint_marker == pytest.approx(float(p_joint), abs=1e-9)


def test_composite_r_departs_from_prime_forms():
    # n = 2, t in S at r = 8: the divisor l = 4 of offsets 2 adds weight
    p_anc, _ = analytics.exact_qft_probabilities(0, 2, 8)
    assert p_anc == Fraction(3, 8)
    assert analytics.exact_joint_fourth1_in(2, 8) == pytest.approx(0.34375)
    p_anc_out, _ = analytics.exact_qft_probabilities(4, 0, 8)
    assert p_anc_out == Fraction(1, 2)
    assert analytics.notin_probabilities(8)[0] == 0.125


def test_conditional_variants():
    for r, n in [(35, 3), (8, 2), (101, 4)]:
        ratio = analytics.joint_marker_in_fraction(n, r) / analytics.joint_fourth1_in_fraction(n, r)
        assert analytics.prop_t_in_conditional_as_printed(n, r, "derivation") == pytest.approx(float(ratio))
        assert analytics.prop_t_in_conditional_as_printed(n, r, "statement") != pytest.approx(float(ratio))


def test_range_checks():
    with pytest.raises(ValueError):
        analytics.exact_joint_fourth1_in(3, 8)
    with pytest.raises(ValueError):
        analytics.notin_probabilities(1)


def test_iteration_bounds():
    lower, miss = analytics.iteration_bounds(35, 2)
    assert lower == pytest.approx(1 - (37 / 72) ** 2)
    assert miss == pytest.approx((34 / 35) ** 2)
    for r, p in [(8, 1), (35, 2), (4096, 8)]:
        assert analytics.iteration_bound_loose(r, p) == pytest.approx(analytics.iteration_bounds(r, p)[0])
    with pytest.raises(ValueError):
        analytics.iteration_bounds(35, 0)


def test_exact_success_bound():
    middle, eform = analytics.success_bound_exact_qft(35, 2)
    assert eform == pytest.approx(0.2380, abs=5e-5)
    assert middle == pytest.approx((1 - 0.25 * (37 / 36) ** 2) ** 6)
    middle, eform = analytics.success_bound_exact_qft(4096, 8)
    assert middle > 0.8924 and eform > 0.8924
    with pytest.raises(ValueError, match="p too large"):
        analytics.success_bound_exact_qft(8, 4)
    assert analytics.d_factor(35) == pytest.approx(72 / 37)


def test_eform_at_r12_is_the_quoted_large_r_figure():
    assert analytics.eform_bound(12, 8) == pytest.approx(0.8924, abs=5e-5)


def test_nonexact_success_bound():
    assert analytics.success_bound_nonexact_qft(35, 7, 2) == pytest.approx(0.2380, abs=5e-4)
    terms = analytics.success_bound_terms(35, 7, 2)
    assert terms["middle"] < terms["exponential"]
    assert analytics.success_bound_nonexact_qft(4096, 13, 8) > 0.8924
    assert 0 < analytics.nonexact_per_set(7, 2) < 1


def test_nonexact_bounds_requires_size_constraint():
    with pytest.raises(ValueError):
        analytics.nonexact_bounds(4, 3, 35)
    b = analytics.nonexact_bounds(7, 3, 35)
    assert b["fourth1_notin_lower"] == pytest.approx(1 / 35)
    assert b["joint_marker_notin"] == 2**-14


@pytest.mark.parametrize(
    "a,b,N,n",
    [(3, 12, 71, 3), (3, 12, 71, 1), (2, 13, 17, 2), (2, 13, 17, 0), (5, 3, 37, 2), (3, 7, 29, 3)],
)
def test_always_valid_nonexact_bounds(a, b, N, n):
    from dqdlp.numt import ProblemInstance, brute_force_dlp

    inst = ProblemInstance.create(a, b, N)
    t = brute_force_dlp(inst).t
    bounds = analytics.nonexact_bounds(inst.m, n, inst.r)
    for tau in range(inst.r):
        desc = SetDescriptor(tau, n)
        pr = membership.probe(inst, desc)
        if desc.contains(t, inst.r):
            assert pr.p_joint_marker >= bounds["joint_marker_in_lower"] - 1e-12
        else:
            assert pr.p_fourth_1 >= bounds["fourth1_notin_lower"] - 1e-12


def test_bound_report_records_errors():
    rep = analytics.bound_report(8, 2, 5, 4)
    assert "success_bound_exact_qft" in rep.errors
    assert "iteration_bounds.lower_in" in rep.values
    rep = analytics.bound_report(35, 3, 7, 2)
    assert not rep.errors
    assert rep.values["success_bound_nonexact_qft"] == pytest.approx(0.2380, abs=5e-4)


def test_bound_report_probabilities_in_range():
    rep = analytics.bound_report(2, 0, 2, 1)
    for key in (
        "exact_joint_fourth1_in",
        "exact_joint_marker_in",
        "notin_probabilities.p_fourth_1",
        "iteration_bounds.lower_in",
        "iteration_bounds.miss_notin",
        "success_bound_exact_qft.middle",
        "success_bound_exact_qft.exponential",
        "success_bound_nonexact_qft",
    ):
        assert 0 <= rep.values[key] <= 1
