import math

import numpy as np
import pytest
from hypothesis import assume, example, given, settings
from hypothesis import strategies as st

from fftsvd.cordic import (
    CordicState,
    FixedCordic,
    build_angle_table,
    cordic_gain,
    cordic_iterate,
    cordic_rotate,
    cordic_vector,
    rotation_directions,
)
from fftsvd.errors import UsageError
from fftsvd.fixedpoint import Q2_14, QFormat, quantize

# 40-digit reference values
GAIN_32 = 1.6467602581210656483
ANGLE_SUM_32 = 1.7432866200066787162
ROT_06_08_BY_1 = (-0.34899540432543342425, 0.93712443557924968322)
ATAN2_4_M3 = 2.214297435588181006
ATAN_2_M31 = 4.6566128730773925778e-10

BOUND = 2.0**-31  # 2**(-iters + 1) at 32 iterations
coord = st.floats(min_value=-4.0, max_value=4.0, allow_nan=False)
angle = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def test_angle_table_examples():
    assert build_angle_table(1).angles == (math.pi / 4,)
    t = build_angle_table(32)
    assert t.angles[1] == math.atan(0.5)
    assert abs(sum(t.angles) - ANGLE_SUM_32) <= 1e-15
    assert all(a > b for a, b in zip(t.angles, t.angles[1:]))
    # the table first covers the whole first quadrant at four entries
    assert sum(build_angle_table(3).angles) < math.pi / 2 < sum(build_angle_table(4).angles)
    for bad in (0, 65):
        with pytest.raises(UsageError):
            build_angle_table(bad)


def test_iterate_examples():
    t = build_angle_table(32)
    s = cordic_iterate(CordicState(1.0, 0.0, math.pi / 4), 1, t)
    assert (s.x, s.y, s.z, s.i) == (1.0, 1.0, 0.0, 1)
    s0 = CordicState(0.3, -0.8, 0.1, 5)
    back = cordic_iterate(CordicState(*[getattr(cordic_iterate(s0, 1, t), k) for k in "xyz"], 5), -1, t)
    assert back.z == s0.z
    assert abs(back.x - s0.x) <= 2.0**-10 and abs(back.y - s0.y) <= 2.0**-10
    with pytest.raises(UsageError):
        cordic_iterate(CordicState(1.0, 0.0, 0.0, 32), 1, t)
    with pytest.raises(UsageError):
        cordic_iterate(CordicState(1.0, 0.0, 0.0), 0, t)


@pytest.mark.parametrize("theta", [0.0, 0.3, -1.2, 1.5, ANGLE_SUM_32 - 1e-9])
def test_iterate_drives_z_to_residual_bound(theta):
    t = build_angle_table(32)
    s = CordicState(1.0, 0.0, theta)
    for _ in range(32):
        s = cordic_iterate(s, 1 if s.z >= 0 else -1, t)
    assert abs(s.z) <= ATAN_2_M31 * (1 + 1e-9)


def test_iterate_on_fixed_registers():
    t = build_angle_table(8)
    zf = QFormat(3, 13)
    s = CordicState(quantize(1.0), quantize(0.0), quantize(0.5, zf))
    s = cordic_iterate(s, 1, t)
    assert s.x.raw == 16384 and s.y.raw == 16384
    assert s.z.raw == quantize(0.5, zf).raw - t.raw(zf)[0]


def test_gain_examples():
    assert cordic_gain(1) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert cordic_gain(2) == pytest.approx(math.sqrt(2) * math.sqrt(1.25), abs=1e-15)
    assert abs(cordic_gain(32) - GAIN_32) <= 1e-12
    with pytest.raises(UsageError):
        cordic_gain(0)


def test_rotate_examples():
    x, y = cordic_rotate(1.0, 0.0, math.pi / 4)
    assert abs(x - math.sqrt(0.5)) <= BOUND and abs(y - math.sqrt(0.5)) <= BOUND
    x, y = cordic_rotate(0.25, -0.6, 0.0)
    assert abs(x - 0.25) <= BOUND and abs(y + 0.6) <= BOUND
    x, y = cordic_rotate(0.6, 0.8, 1.0)
    assert abs(x - ROT_06_08_BY_1[0]) <= BOUND and abs(y - ROT_06_08_BY_1[1]) <= BOUND


def test_vector_examples():
    m, a = cordic_vector(1.0, 1.0)
    assert abs(m - math.sqrt(2)) <= math.sqrt(2) * BOUND and abs(a - math.pi / 4) <= BOUND
    m, a = cordic_vector(1.0, 0.0)
    assert abs(m - 1) <= BOUND and abs(a) <= BOUND
    m, a = cordic_vector(-3.0, 4.0)
    assert abs(m - 5) <= 5 * BOUND and abs(a - ATAN2_4_M3) <= BOUND
    with pytest.raises(UsageError):
        cordic_vector(0.0, 0.0)


def test_rotate_accepts_arrays(rng):
    x, y = rng.standard_normal(10), rng.standard_normal(10)
    gx, gy = cordic_rotate(x, y, 0.7)
    c, s = math.cos(0.7), math.sin(0.7)
    assert np.max(np.abs(gx - (c * x - s * y))) <= 4 * BOUND
    assert np.max(np.abs(gy - (s * x + c * y))) <= 4 * BOUND


@given(coord, coord, angle)
def test_uncompensated_gain_is_angle_independent(x, y, theta):
    assume(math.hypot(x, y) > 1e-6)
    t = build_angle_table(32)
    th = math.remainder(theta, 2 * math.pi)
    assume(abs(th) <= math.pi / 2)
    s = CordicState(x, y, th)
    for _ in range(32):
        s = cordic_iterate(s, 1 if s.z >= 0 else -1, t)
    assert abs(math.hypot(s.x, s.y) - GAIN_32 * math.hypot(x, y)) <= 1e-12 * max(1.0, math.hypot(x, y))


@given(coord, coord, angle)
def test_rotation_error_and_magnitude(x, y, theta):
    r = math.hypot(x, y)
    gx, gy = cordic_rotate(x, y, theta)
    c, s = math.cos(theta), math.sin(theta)
    assert math.hypot(gx - (c * x - s * y), gy - (s * x + c * y)) <= r * BOUND + 1e-300
    assert abs(math.hypot(gx, gy) - r) <= r * BOUND + 1e-300


@example(0.0, 1.0, -9.0, -3.5597664712717583)  # 2.14 * BOUND apart
@given(coord, coord, angle, angle)
def test_angle_additivity(x, y, a, b):
    # three rotations, each with its own residual angle up to atan(2**-31)
    r = math.hypot(x, y)
    once = cordic_rotate(*cordic_rotate(x, y, a), b)
    both = cordic_rotate(x, y, a + b)
    assert math.hypot(once[0] - both[0], once[1] - both[1]) <= 3 * BOUND * r + 1e-300


@given(st.floats(min_value=1e-3, max_value=4.0), st.floats(min_value=-3.14159, max_value=3.14159))
def test_vectoring_inverts_rotation(m, theta):
    x, y = m * math.cos(theta), m * math.sin(theta)
    rx, ry = cordic_rotate(x, y, -theta)
    assert abs(rx - m) <= 2 * m * BOUND and abs(ry) <= 2 * m * BOUND
    vm, va = cordic_vector(x, y)
    assert abs(vm - m) <= m * BOUND
    assert abs(math.remainder(va - math.atan2(y, x), 2 * math.pi)) <= BOUND


# fixed point


@settings(max_examples=200)
@given(st.floats(min_value=-1.5, max_value=1.5))
def test_fixed_directions_follow_float_until_quantisation(theta):
    eng = FixedCordic(Q2_14)
    z = eng.quantize_angle(theta)
    fixed = eng.directions(z)
    flt = rotation_directions(z * eng.afmt.lsb, eng.iters)
    # track the float residual; past the first step where it falls inside the
    # angle-quantisation band the sequences may differ
    table = build_angle_table(eng.iters).angles
    resid = z * eng.afmt.lsb
    step = len(table) * eng.afmt.lsb
    for i, (df, dq) in enumerate(zip(flt, fixed)):
        if abs(resid) <= step:
            break
        assert df == dq, f"diverged at step {i}"
        resid -= df * table[i]


@pytest.mark.parametrize("fmt", [Q2_14, QFormat(2, 20)])
def test_fixed_rotate_and_vector_accuracy(fmt, rng):
    lsb = fmt.lsb
    for _ in range(200):
        x, y = rng.uniform(-0.7, 0.7, 2)
        th = rng.uniform(-math.pi, math.pi)
        gx, gy = cordic_rotate(x, y, th, fmt=fmt, iters=fmt.frac_bits + 2)
        c, s = math.cos(th), math.sin(th)
        assert math.hypot(gx - (c * x - s * y), gy - (s * x + c * y)) <= 4 * lsb
        if math.hypot(x, y) > 0.05:
            m, a = cordic_vector(x, y, iters=fmt.frac_bits + 2, fmt=fmt)
            assert abs(m - math.hypot(x, y)) <= 4 * lsb
            assert abs(math.remainder(a - math.atan2(y, x), 2 * math.pi)) <= 4 * lsb / math.hypot(x, y)


def test_fixed_engine_registers():
    eng = FixedCordic(Q2_14)
    assert eng.iters == 16 and eng.guard >= 2
    assert eng.wfmt.frac_bits == 14 + eng.guard
    assert eng.afmt.int_bits == 3
