import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kickedising.classical import (
    PORTRAIT_INITIAL_CONDITIONS,
    ClassicalState,
    iterate,
    phase_portrait,
    rotation_about_x,
    separation_growth_rate,
    step,
    trajectories,
    write_portrait_csv,
)

unit = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 0.1)


def test_identity_map():
    s = ClassicalState.normalized(0.3, -0.4, 0.5)
    out = step(s, 0.0, 0.0)
    assert np.allclose(out.as_array(), s.as_array(), atol=1e-15)


def test_quarter_turn_from_pole():
    out = step(ClassicalState(0.0, 0.0, 1.0), math.pi / 2, 0.0)
    # Jz' = Jy sin(a) + Jz cos(a) = 0 and Jy' = Jy cos(a) - Jz sin(a) = -1
    assert np.allclose(out.as_array(), [0.0, -1.0, 0.0], atol=1e-15)


@given(unit, st.floats(-np.pi, np.pi))
@settings(max_examples=50, deadline=None)
def test_zero_twist_is_rotation(v, alpha):
    s = ClassicalState.normalized(*v)
    expected = rotation_about_x(alpha) @ s.as_array()
    assert np.max(np.abs(step(s, alpha, 0.0).as_array() - expected)) < 1e-12


@given(unit, st.floats(-4, 4), st.floats(-20, 20))
@settings(max_examples=50, deadline=None)
def test_single_step_drift(v, alpha, tau):
    _, drift = iterate(ClassicalState.normalized(*v), alpha, tau, 1)
    assert drift < 1e-12


def test_twist_rotates_about_z_by_height():
    s = ClassicalState.normalized(1.0, 0.0, 1.0)
    out = step(s, 0.0, 2.0)
    z = s.jz
    assert np.allclose(out.as_array(), [s.jx * math.cos(2 * z), s.jx * math.sin(2 * z), z], atol=1e-15)


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        ClassicalState.normalized(0, 0, 0)


def test_iterate_matches_vectorised():
    s = ClassicalState.normalized(-1, -3, -3)
    final, _ = iterate(s, 1.7, 3.0, 40)
    t = trajectories([s.as_array()], 1.7, 3.0, 40)
    assert np.allclose(t[-1, 0], final.as_array(), atol=1e-10)


def test_portrait_shape_and_normalisation():
    p = phase_portrait(PORTRAIT_INITIAL_CONDITIONS, 1.7, 3.0, 100)
    assert len(p) == 6 and all(a.shape == (100, 2) for a in p)
    t = trajectories(PORTRAIT_INITIAL_CONDITIONS, 1.7, 3.0, 100)
    assert np.allclose(np.linalg.norm(t, axis=2), 1.0, atol=1e-14)


def test_portrait_deterministic():
    a = phase_portrait(PORTRAIT_INITIAL_CONDITIONS, 1.7, 6.0, 50)
    b = phase_portrait(PORTRAIT_INITIAL_CONDITIONS, 1.7, 6.0, 50)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_zero_twist_orbits_keep_jx():
    # a pure rotation about x conserves Jx and the circle radius in the (Jy, Jz) plane
    p = phase_portrait(PORTRAIT_INITIAL_CONDITIONS, 1.7, 0.0, 200)
    for ic, pts in zip(PORTRAIT_INITIAL_CONDITIONS, p):
        jx0 = ic[0] / np.linalg.norm(ic)
        assert np.allclose(pts[:, 0], jx0, atol=1e-12)


def test_black_initial_condition_three_vector():
    assert PORTRAIT_INITIAL_CONDITIONS[-1] == (0.0, -2.0, 2.0)
    assert all(len(ic) == 3 for ic in PORTRAIT_INITIAL_CONDITIONS)


def test_chaotic_separation_grows():
    assert separation_growth_rate((0.2, -0.7, 0.5), 1.7, 10.0) > 0.5
    assert separation_growth_rate((0.2, -0.7, 0.5), 1.7, 10.0) > 5 * abs(
        separation_growth_rate((0.2, -0.7, 0.5), 1.7, 0.5)
    )


def test_csv_layout(tmp_path):
    p = phase_portrait(PORTRAIT_INITIAL_CONDITIONS[:2], 1.7, 3.0, 5)
    path = write_portrait_csv(p, tmp_path / "portrait.csv")
    raw = path.read_bytes()
    assert raw.startswith(b"trajectory_id,step,Jx,Jz\r\n")
    rows = list(csv.reader(path.open(newline="")))
    assert len(rows) == 11
    assert rows[1][:2] == ["0", "1"] and rows[-1][:2] == ["1", "5"]
    assert float(rows[1][2]) == p[0][0, 0]
