"""Structured text round-trips."""

import math

import pytest
from hypothesis import given, strategies as st

from svmart.analytic import CanonicalParams, analytic_verdicts
from svmart.classify import full_report
from svmart.mc import McEstimate, PhiSummary, Tallies
from svmart.model import builtin, check_conditions
from svmart.serialize import (
    REPORT_HEADER,
    FormatError,
    emit_conditions,
    emit_estimate,
    emit_phi,
    emit_report,
    parse_conditions,
    parse_estimate,
    parse_phi,
    parse_report,
)

HESTON = builtin("heston", dict(kappa=1.0, theta=1.0, xi=2.0, rho=-0.5))


def test_numeric_report_round_trip():
    r = full_report(HESTON)
    text = emit_report(r)
    assert text.startswith(REPORT_HEADER + "\n")
    back = parse_report(text)
    assert back == r
    assert back.analytic == r.analytic and back.agreement == r.agreement
    assert back.conditions == r.conditions
    assert emit_report(back) == text


def test_analytic_report_round_trip():
    r = analytic_verdicts(CanonicalParams.of("hull_white", mu=0.1, sigma=1.0, rho=0.3))
    assert parse_report(emit_report(r)) == r


def test_conditions_round_trip():
    c = check_conditions(HESTON)
    assert parse_conditions(emit_conditions(c)) == c


def test_floats_round_trip_bit_exactly():
    r = full_report(HESTON)
    back = parse_report(emit_report(r))
    assert back.profile_original.s_left.estimate == r.profile_original.s_left.estimate
    assert back.profile_original.s_left_limit == r.profile_original.s_left_limit


@pytest.mark.parametrize("text,fragment", [
    ("", "expected header"),
    ("# svmart-report v2\n", "expected header"),
    (REPORT_HEADER + "\nsource=numeric\nsource=numeric\n", "duplicate key"),
    (REPORT_HEADER + "\nsource\n", "expected key=value"),
    (REPORT_HEADER + "\nsource=numeric\n", "missing key"),
])
def test_malformed_documents(text, fragment):
    with pytest.raises(FormatError, match=fragment):
        parse_report(text)


@pytest.mark.parametrize("label", ["a\nb", "a\rb", "a\u2028b"])
def test_values_with_line_breaks_are_refused(label):
    with pytest.raises(FormatError):
        emit_estimate(McEstimate(label, 1.0, 0.0, 1, Tallies(survived=1)))


reals = st.floats(allow_nan=False)
counts = st.integers(0, 10 ** 9)
tallies = st.builds(Tallies, counts, counts, counts, counts)
line_text = st.text().filter(lambda s: s.splitlines() in ([], [s]))
estimates = st.builds(McEstimate, line_text, reals, reals, counts, tallies, st.booleans(),
                      st.lists(line_text, max_size=3).map(tuple), st.none() | reals)
phis = st.builds(PhiSummary, reals,
                 st.lists(st.tuples(st.floats(0, 1), reals), max_size=4, unique_by=lambda t: t[0]).map(tuple),
                 reals, reals, tallies, counts)


@given(estimates)
def test_estimate_round_trip(e):
    assert parse_estimate(emit_estimate(e)) == e


@given(phis)
def test_phi_round_trip(s):
    back = parse_phi(emit_phi(s))
    assert back == s
    assert all(math.copysign(1, a) == math.copysign(1, b) for (_, a), (_, b) in zip(back.quantiles, s.quantiles))
