"""Closed-form geometry: length inversion, normal composition, arc
viewpoints and the speed budget."""

import math

import numpy as np
import pytest

from vaporwipe.errors import DegenerateArc, InfeasibleLength
from vaporwipe.geometry import (Angle, CameraPose, SprayGeometry, UnitVec3,
                                angle_from_projected_length, arc_viewpoint,
                                check_spray_speed, normal_from_angles)


def make_geometry(**kw):
    defaults = dict(half_length=50.0, standoff=100.0,
                    sweep_angle=Angle.from_degrees(60.0),
                    wrist_speed=50.0, completion_budget=6.0)
    defaults.update(kw)
    return SprayGeometry(**defaults)


class TestAngle:
    def test_degree_round_trip(self):
        a = Angle.from_degrees(37.5)
        assert a.degrees == pytest.approx(37.5, abs=1e-12)

    def test_negation(self):
        assert (-Angle.from_degrees(10.0)).degrees == pytest.approx(-10.0)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Angle(float("nan"))


class TestUnitVec3:
    def test_normalized(self):
        v = UnitVec3.normalized(3.0, 4.0, 0.0)
        assert np.allclose(v.as_array(), [0.6, 0.8, 0.0])

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            UnitVec3(1.0, 1.0, 0.0)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            UnitVec3.normalized(0.0, 0.0, 0.0)


class TestLengthInversion:
    def test_zero_tilt(self):
        plus, minus = angle_from_projected_length(50.0, 100.0)
        assert plus.radians == 0.0
        assert minus.degrees == 0.0

    def test_known_value(self):
        # L = 2l / cos(30 deg)
        length = 100.0 / math.cos(math.radians(30.0))
        plus, minus = angle_from_projected_length(50.0, length)
        assert plus.degrees == pytest.approx(30.0, abs=1e-9)
        assert minus.degrees == pytest.approx(-30.0, abs=1e-9)

    def test_symmetric_pair(self):
        plus, minus = angle_from_projected_length(50.0, 130.0)
        assert plus.radians == pytest.approx(-minus.radians, abs=1e-15)
        assert plus.radians > 0

    def test_short_length_clamps_within_tolerance(self):
        plus, minus = angle_from_projected_length(50.0, 99.5)
        assert plus.radians == 0.0 and minus.radians == 0.0

    def test_short_length_rejected_below_tolerance(self):
        with pytest.raises(InfeasibleLength):
            angle_from_projected_length(50.0, 95.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            angle_from_projected_length(50.0, 0.0)
        with pytest.raises(ValueError):
            angle_from_projected_length(0.0, 100.0)

    def test_round_trip_dense(self):
        for deg in np.linspace(-75, 75, 151):
            length = 100.0 / math.cos(math.radians(deg))
            plus, minus = angle_from_projected_length(50.0, length)
            got = plus if deg >= 0 else minus
            assert got.degrees == pytest.approx(deg, abs=1e-9) or deg == 0


class TestNormalFromAngles:
    def test_zero_angles_point_along_x(self):
        n = normal_from_angles(Angle(0.0), Angle(0.0))
        assert np.allclose(n.as_array(), [1.0, 0.0, 0.0])

    def test_pure_azimuth(self):
        n = normal_from_angles(Angle.from_degrees(30.0), Angle(0.0))
        assert np.allclose(n.as_array(),
                           [math.cos(math.radians(30)), math.sin(math.radians(30)), 0.0])

    def test_pure_elevation(self):
        n = normal_from_angles(Angle(0.0), Angle.from_degrees(45.0))
        assert n.z == pytest.approx(math.sin(math.radians(45)), abs=1e-12)

    def test_always_unit(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            t, p = rng.uniform(-89, 89, size=2)
            n = normal_from_angles(Angle.from_degrees(t), Angle.from_degrees(p))
            assert np.linalg.norm(n.as_array()) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            normal_from_angles(Angle.from_degrees(90.0), Angle(0.0))
        with pytest.raises(ValueError):
            normal_from_angles(Angle(0.0), Angle.from_degrees(-90.0))


class TestSpraySpeed:
    def test_reference_budget(self):
        check = check_spray_speed(make_geometry())
        # r * beta = 100 mm * (pi/3) = 104.72 mm of arc
        assert check.min_speed == pytest.approx(100.0 * math.pi / 3.0 / 6.0, abs=1e-9)
        assert check.traverse_time == pytest.approx(100.0 * math.pi / 3.0 / 50.0, abs=1e-9)
        assert check.feasible

    def test_infeasible_when_slow(self):
        check = check_spray_speed(make_geometry(wrist_speed=10.0))
        assert not check.feasible
        assert check.traverse_time > 6.0

    def test_validation(self):
        with pytest.raises(ValueError):
            make_geometry(half_length=-1.0)
        with pytest.raises(ValueError):
            make_geometry(sweep_angle=Angle(0.0))


class TestCameraPose:
    def test_orthonormal_basis(self):
        pose = CameraPose.looking_at([100.0, 0.0, 0.0], [0.0, 0.0, 0.0])
        for a, b in ((pose.right, pose.up), (pose.right, pose.forward),
                     (pose.up, pose.forward)):
            assert abs(float(a @ b)) < 1e-12
        assert np.allclose(pose.forward, [-1.0, 0.0, 0.0])

    def test_rejects_coincident(self):
        with pytest.raises(ValueError):
            CameraPose.looking_at([0.0, 0.0, 0.0], [0.0, 0.0, 0.0])

    def test_rejects_vertical_axis(self):
        with pytest.raises(ValueError):
            CameraPose.looking_at([0.0, 0.0, 100.0], [0.0, 0.0, 0.0])


class TestArcViewpoint:
    def setup_method(self):
        self.anchor = np.zeros(3)
        self.initial = CameraPose.looking_at([100.0, 0.0, 0.0], self.anchor)

    def test_zero_offset_is_identity(self):
        pose = arc_viewpoint(self.initial, self.anchor, Angle(0.0))
        assert np.allclose(pose.position, self.initial.position, atol=1e-12)

    def test_radius_preserved(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            off = Angle.from_degrees(rng.uniform(-80, 80))
            axis = "azimuth" if rng.random() < 0.5 else "elevation"
            pose = arc_viewpoint(self.initial, self.anchor, off, axis)
            assert np.linalg.norm(pose.position - self.anchor) == pytest.approx(
                100.0, abs=1e-9)

    def test_always_aims_at_anchor(self):
        pose = arc_viewpoint(self.initial, self.anchor, Angle.from_degrees(25.0))
        to_anchor = (self.anchor - pose.position)
        to_anchor /= np.linalg.norm(to_anchor)
        assert np.allclose(pose.forward, to_anchor, atol=1e-12)

    def test_azimuth_arc_stays_level(self):
        pose = arc_viewpoint(self.initial, self.anchor, Angle.from_degrees(30.0))
        assert pose.position[2] == pytest.approx(0.0, abs=1e-12)
        # rotated by +30 deg about the vertical
        assert math.degrees(math.atan2(pose.position[1], pose.position[0])) \
            == pytest.approx(30.0, abs=1e-9)

    def test_elevation_arc_raises_camera(self):
        pose = arc_viewpoint(self.initial, self.anchor,
                             Angle.from_degrees(30.0), "elevation")
        assert pose.position[2] == pytest.approx(100.0 * math.sin(math.radians(30)),
                                                 abs=1e-9)

    def test_offsets_compose(self):
        a = arc_viewpoint(self.initial, self.anchor, Angle.from_degrees(10.0))
        b = arc_viewpoint(a, self.anchor, Angle.from_degrees(15.0))
        c = arc_viewpoint(self.initial, self.anchor, Angle.from_degrees(25.0))
        assert np.allclose(b.position, c.position, atol=1e-9)

    def test_degenerate_cases(self):
        on_anchor = CameraPose(position=self.anchor.copy(),
                               forward=np.array([-1.0, 0.0, 0.0]),
                               right=np.array([0.0, -1.0, 0.0]),
                               up=np.array([0.0, 0.0, 1.0]))
        with pytest.raises(DegenerateArc):
            arc_viewpoint(on_anchor, self.anchor, Angle.from_degrees(5.0))
        with pytest.raises(ValueError):
            arc_viewpoint(self.initial, self.anchor, Angle(0.1), "roll")
