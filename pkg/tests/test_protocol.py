import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from echomemory import analytic
from echomemory.protocol import (
    ControlOrder,
    ProtocolKind,
    ScheduleError,
    build_schedule,
    storage_time,
)

import oracles

PI = math.pi
odd_pi = st.integers(0, 3).map(lambda n: (2 * n + 1) * PI)


def oracle_sign(schedule) -> float:
    seq = [(oracles.OPT if p.transition == "opt12" else oracles.CTL, p.area) for p in schedule.pulses[1:]]
    r = oracles.resonant_sign(seq)
    assert abs(r.imag) < 1e-6 and abs(abs(r.real) - 1) < 1e-3
    return r.real


@pytest.mark.parametrize("kwargs, sign", [
    (dict(kind="dr"), 1),
    (dict(kind="cdr"), -1),
    (dict(kind="csr"), 1),
    (dict(kind="csr", c2_area=3 * PI), -1),
])
def test_sign_ledger_brute_force(kwargs, sign):
    s = build_schedule(**kwargs)
    assert s.final_echo.sign == sign
    assert round(oracle_sign(s)) == sign


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["2pe", "dr", "cdr", "csr"]), odd_pi, odd_pi, odd_pi, odd_pi,
       st.sampled_from(["after", "between"]))
def test_stage_sign_matches_rotation_composition(kind, r1, r2, c1, c2, order):
    s = build_schedule(kind, r1_area=r1, r2_area=r2, c1_area=c1, c2_area=c2, control_order=order)
    final = s.stages[-1].expr
    assert final.carrier == analytic.OPTICAL_CARRIER
    assert round(oracle_sign(s)) == final.prefactor_sign


@pytest.mark.parametrize("n", [0, 1, 2])
def test_cdr_pi_pi_plus_four_pi_n_emissive(n):
    s = build_schedule("cdr", c2_area=PI + 4 * PI * n)
    assert s.final_echo.emissive
    assert round(oracle_sign(s)) == -1


@pytest.mark.parametrize("n", [0, 1, 2])
def test_cdr_pi_three_pi_follows_rotation_composition(n):
    s = build_schedule("cdr", c2_area=3 * PI + 4 * PI * n)
    assert s.final_echo.sign == round(oracle_sign(s)) == 1


def test_cdr_defaults_backward_emissive_at_formula_time():
    s = build_schedule("cdr")
    e = s.final_echo
    assert (e.label, e.k, e.emissive, e.radiated) == ("E2", -1, True, True)
    assert e.time == analytic.cdr_echo_time(s.t_d, s.t_r1, s.t_r2, s.t_c1, s.t_c2)


def test_dr_defaults_absorptive():
    e = build_schedule("dr").final_echo
    assert e.label == "E2" and not e.emissive and not e.radiated and not e.silent


def test_dr_first_echo_silent():
    s = build_schedule("dr")
    assert s.predictions[0].label == "E1" and s.predictions[0].k == -3 and s.predictions[0].silent


@pytest.mark.parametrize("c2_area, emissive", [(PI, False), (3 * PI, True)])
def test_single_rephasing_flags(c2_area, emissive):
    assert build_schedule("csr", c2_area=c2_area).final_echo.emissive is emissive


def test_two_pulse_prediction():
    s = build_schedule("2pe", t_r1=12.0, k_r1=1)
    e = s.final_echo
    assert (e.time, e.k, e.sign) == (19.0, 1, -1)


def test_data_only_has_no_echo():
    s = build_schedule("data")
    assert len(s.predictions) == 0
    assert s.final_echo is None


def test_storage_time():
    assert storage_time(build_schedule("cdr", t_c1=21.0, t_c2=31.0)) == 10.0


def test_storage_time_requires_controls():
    with pytest.raises(ScheduleError):
        storage_time(build_schedule("dr"))


def test_long_storage_scales_echo_time():
    t_r1 = 10.0
    t_c2 = 1e6 * (t_r1 - 5.0)
    s = build_schedule("cdr", t_r1=t_r1, t_r2=20.0, t_c1=21.0, t_c2=t_c2)
    assert s.final_echo.time == analytic.cdr_echo_time(5.0, t_r1, 20.0, 21.0, t_c2)


@pytest.mark.parametrize("kwargs, match", [
    (dict(kind="cdr", t_c1=25.0, t_c2=22.0), "ordering violation"),
    (dict(kind="dr", t_r1=10.0, t_r2=9.0), "ordering violation"),
    (dict(kind="2pe", d_area=0.5), "data pulse area"),
    (dict(kind="2pe", r1_area=PI / 2), "odd multiple"),
    (dict(kind="2pe", k_d=2), "wavevector index"),
    (dict(kind="2pe", t_r1=6.0), "overlaps"),
    (dict(kind="cdr", c1_area=-PI), "negative|odd multiple"),
    (dict(kind="csr", t_c1=float("nan")), "finite|undefined|arrival"),
])
def test_validation_errors(kwargs, match):
    with pytest.raises(ScheduleError, match=match):
        build_schedule(**kwargs)


def test_unknown_kind():
    with pytest.raises(ScheduleError):
        ProtocolKind.parse("afc")


def test_kind_aliases():
    assert ProtocolKind.parse("DoubleRephasing") is ProtocolKind.DOUBLE_REPHASING
    assert ProtocolKind.parse("CDR") is ProtocolKind.CDR


def test_between_order():
    s = build_schedule("cdr", control_order="between")
    assert [p.name for p in s.pulses] == ["D", "R1", "C1", "C2", "R2"]
    assert s.control_order is ControlOrder.BETWEEN


def test_derived_intervals():
    s = build_schedule("cdr", t_r1=10.0, t_r2=20.0, t_c1=23.0, t_c2=26.0)
    assert s.T == 5.0
    assert s.delta_T == 3.0


@settings(max_examples=50, deadline=None)
@given(st.floats(3.5, 10), st.floats(1, 20), st.floats(1.5, 8), st.floats(1, 5))
def test_built_prediction_equals_echo_time(t, storage, u, delta):
    t_r1 = 5.0 + t
    t_r2 = t_r1 + t + u + delta + 1
    s = build_schedule("cdr", t_r1=t_r1, t_r2=t_r2, t_c1=t_r2 + delta, t_c2=t_r2 + delta + storage)
    assert s.final_echo.time == analytic.echo_time(s)
    assert s.final_echo.time == pytest.approx(analytic.cdr_echo_time(5.0, t_r1, t_r2, t_r2 + delta,
                                                                     t_r2 + delta + storage))
