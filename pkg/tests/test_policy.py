import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from casecart.policy import (ALL_POLICIES, PolicyKind, PolicyParams, hhmm, parse_hhmm, policy_label,
                             release_time)

P = PolicyParams()
DAY = 1440.0


def t(day, h, m=0):
    return day * DAY + h * 60 + m


@pytest.mark.parametrize("policy,start,expected", [
    (PolicyKind.CURRENT, t(3, 7, 30), t(2, 15)),
    (PolicyKind.CURRENT, t(3, 14, 45), t(2, 15)),
    (PolicyKind.TWOBATCH, t(3, 7, 30), t(2, 15)),
    (PolicyKind.TWOBATCH, t(3, 12, 0), t(2, 15)),
    (PolicyKind.TWOBATCH, t(3, 12, 15), t(3, 6)),
    (PolicyKind.TWOBATCH, t(3, 15, 0), t(3, 6)),
    (PolicyKind.JIT, t(3, 7, 30), t(3, 6, 30)),
    (PolicyKind.JIT, t(3, 0, 30), t(2, 23, 30)),
])
def test_release_examples(policy, start, expected):
    assert release_time(policy, P, start) == expected


def test_release_clamped_to_simulation_start(caplog):
    caplog.set_level(logging.WARNING)
    assert release_time(PolicyKind.CURRENT, P, t(0, 8), sim_start=0.0) == 0.0
    assert "clamped" in caplog.text


def test_custom_parameters():
    p = PolicyParams(current_batch=parse_hhmm("17:30"), jit_interval=90)
    assert release_time(PolicyKind.CURRENT, p, t(2, 9)) == t(1, 17, 30)
    assert release_time(PolicyKind.JIT, p, t(2, 9)) == t(2, 7, 30)


@pytest.mark.parametrize("kw", [dict(jit_interval=0), dict(current_batch=1440), dict(twobatch_morning=800)])
def test_invalid_parameters(kw):
    with pytest.raises(ValueError):
        PolicyParams(**kw)


def test_parse_and_labels():
    assert PolicyKind.parse("Two-Batch") is PolicyKind.TWOBATCH
    assert PolicyKind.parse("just_in_time") is PolicyKind.JIT
    assert PolicyKind.parse("1") is PolicyKind.CURRENT
    assert [policy_label(p) for p in ALL_POLICIES] == [1, 2, 3]
    with pytest.raises(ValueError):
        PolicyKind.parse("weekly")


def test_hhmm_round_trip_and_errors():
    assert hhmm(parse_hhmm("06:05")) == "06:05"
    for bad in ("6", "24:00", "07:60", "ab:cd"):
        with pytest.raises(ValueError):
            parse_hhmm(bad)


starts = st.builds(lambda d, m: d * DAY + m, st.integers(1, 60), st.integers(0, 1439))


@given(starts)
def test_release_never_after_start_and_ordered(s):
    cur, two, jit = (release_time(p, P, s) for p in ALL_POLICIES)
    assert cur <= two <= s
    assert jit == s - 60.0
    assert cur == (s // DAY - 1) * DAY + 900


@given(starts)
def test_twobatch_noon_boundary(s):
    two = release_time(PolicyKind.TWOBATCH, P, s)
    same_day = two >= (s // DAY) * DAY
    assert same_day == (s % DAY > 720)
