import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sandroll import _kernels
from sandroll.errors import InvalidShapeParams
from sandroll.geometry import support_frame
from sandroll.shapespace import (ShapeParams, boundary_band, classify_level, classify_slope,
                                 grid_axis, parallelogon, projection_sweep, sweep)
from sandroll.stability import Roll, roll_outcome

PI = math.pi
CROSS = ShapeParams(PI / 3, 5 * PI / 6)

# cell counts of the 181 x 181 map, agreed by the closed form and the projection route
FROZEN_COUNTS = {0.0: (3063, 3063), 5.0: (2639, 3551), 10.0: (2258, 4087),
                 20.0: (1616, 5349), 30.0: (1124, 6886)}


def generic(params, incline, L=0.056):
    return roll_outcome(support_frame(parallelogon(params, L), 0), incline)


def test_regular_hexagon():
    shape = parallelogon(ShapeParams(2 * PI / 3, 2 * PI / 3), 1.0)
    assert np.allclose(shape.interior_angles, [2 * PI / 3] * 6)


def test_cross_vertices():
    shape = parallelogon(CROSS, 1.0)
    r3 = math.sqrt(3)
    expect = [(0, 0), (1, 0), (1 + r3 / 2, 0.5), (1.5 + r3 / 2, 0.5 + r3 / 2),
              (0.5 + r3 / 2, 0.5 + r3 / 2), (0.5, r3 / 2)]
    assert np.allclose(shape.vertices, expect, atol=1e-12)
    v = shape.vertices
    assert np.allclose(v.mean(axis=0), (v[0] + v[3]) / 2)


@pytest.mark.parametrize("a,z", [(PI / 6, PI / 6), (0.0, PI), (PI, -0.1), (PI + 0.1, PI / 2)])
def test_invalid_params(a, z):
    with pytest.raises(InvalidShapeParams):
        ShapeParams(a, z)


def test_level_examples():
    assert classify_level(CROSS).direction is Roll.FORWARD
    assert classify_level(ShapeParams(2 * PI / 3, 2 * PI / 3)).direction is Roll.NONE
    assert classify_level(ShapeParams(5 * PI / 6, PI / 3)).direction is Roll.BACKWARD


def test_slope_examples():
    assert classify_slope(CROSS, 20.0).direction is Roll.NONE
    assert classify_slope(CROSS, 0.0) == classify_level(CROSS)
    hexagon = ShapeParams(2 * PI / 3, 2 * PI / 3)
    # checked against the projection route before freezing
    assert generic(hexagon, 20.0).direction is Roll.NONE
    assert classify_slope(hexagon, 20.0).direction is Roll.NONE


def test_slope_domain():
    with pytest.raises(ValueError):
        classify_slope(CROSS, 90.0)
    with pytest.raises(ValueError):
        classify_slope(CROSS, -1.0)


def test_margin_matches_projection_route():
    for inc in (0.0, 10.0, 20.0):
        a, b = classify_slope(CROSS, inc), generic(CROSS, inc)
        assert a.direction is b.direction
        assert a.margin == pytest.approx(b.margin, abs=1e-12)


params = st.tuples(st.floats(1e-3, PI), st.floats(1e-3, PI)).filter(
    lambda p: 1e-6 < 2 * PI - p[0] - p[1] <= PI)


@settings(max_examples=300, deadline=None)
@given(params, st.floats(0.0, 60.0))
def test_closed_form_equals_generic_route(p, inc):
    sp = ShapeParams(*p)
    a, b = classify_slope(sp, inc), generic(sp, inc)
    if abs(b.margin) > 1e-9 * 0.056:
        assert a.direction is b.direction


@settings(max_examples=300, deadline=None)
@given(params)
def test_level_reduction(p):
    sp = ShapeParams(*p)
    assert classify_slope(sp, 0.0) == classify_level(sp)


@settings(max_examples=300, deadline=None)
@given(params)
def test_mirror_antisymmetry(p):
    a, z = p
    swap = {Roll.FORWARD: Roll.BACKWARD, Roll.BACKWARD: Roll.FORWARD, Roll.NONE: Roll.NONE}
    assert classify_level(ShapeParams(z, a)).direction is swap[classify_level(ShapeParams(a, z)).direction]


def test_grid_axis():
    assert grid_axis(2).tolist() == [0.0, PI]
    assert np.allclose(np.diff(grid_axis(181)), PI / 180)
    with pytest.raises(ValueError):
        grid_axis(1)


def test_smallest_grid_all_invalid():
    cmap = sweep(2, 0.0)
    assert cmap.counts == {"forward": 0, "backward": 0, "none": 0, "invalid": 4}
    lines = cmap.to_csv().splitlines()
    assert lines[0] == "alpha_rad,zeta_rad,valid,outcome,margin_m"
    assert len(lines) == 5


@pytest.mark.parametrize("inc", sorted(FROZEN_COUNTS))
def test_frozen_counts(inc):
    c = sweep(181, inc).counts
    assert (c["forward"], c["backward"]) == FROZEN_COUNTS[inc]


@pytest.mark.parametrize("inc", [0.0, 5.0, 10.0, 20.0, 30.0])
def test_sweep_agrees_with_projection_sweep(inc):
    cf, pr = sweep(181, inc), projection_sweep(181, inc)
    assert np.array_equal(cf.valid, pr.valid)
    keep = cf.valid & ~boundary_band(pr)
    assert np.array_equal(cf.outcome[keep], pr.outcome[keep])
    assert np.allclose(cf.margin[cf.valid], pr.margin[cf.valid], atol=1e-12)


def test_level_map_antisymmetric():
    cmap = sweep(181, 0.0)
    o = np.where(cmap.valid, cmap.outcome, 99)
    assert np.array_equal(o, np.where(o.T == 99, 99, -o.T))


def test_level_boundary_follows_curve():
    cmap = sweep(181, 0.0)
    a, z = np.meshgrid(cmap.alpha, cmap.zeta, indexing="ij")
    s = np.cos(a) - np.cos(z)
    fwd = cmap.valid & (cmap.outcome == _kernels.FORWARD)
    assert np.all(s[fwd] > 1)
    assert not np.any(cmap.valid & (s > 1 + 1e-9) & ~fwd)


def test_forward_set_shrinks_with_incline():
    prev = None
    for inc in (0.0, 10.0, 20.0, 30.0):
        fwd = sweep(181, inc)
        mask = fwd.valid & (fwd.outcome == _kernels.FORWARD)
        if prev is not None:
            assert not np.any(mask & ~prev)
        prev = mask


def test_lookup_cross():
    assert sweep(181, 0.0).lookup(PI / 3, 5 * PI / 6) is Roll.FORWARD
    assert sweep(181, 20.0).lookup(PI / 3, 5 * PI / 6) is Roll.NONE


def test_csv_rows_round_trip():
    import csv
    import io
    cmap = sweep(19, 10.0)
    rows = list(csv.DictReader(io.StringIO(cmap.to_csv())))
    assert len(rows) == 19 * 19
    for r in rows:
        if r["valid"] == "1":
            got = classify_slope(ShapeParams(float(r["alpha_rad"]), float(r["zeta_rad"])), 10.0)
            assert r["outcome"] == got.direction.value
        else:
            assert r["outcome"] == "" and r["margin_m"] == ""
