"""Viewpoint sweep planning, argmax selection and the end-to-end normal
estimate at zero noise."""

import math

import numpy as np
import pytest

from vaporwipe.errors import (BudgetExceeded, EmptyInput, InfeasibleLength,
                              MistEvaporated)
from vaporwipe.estimator import (SweepPlan, _argmax_with_ties, _refine_peak,
                                 plan_sweep, resolve_sign, rmse,
                                 sweep_and_estimate, sweep_axis)
from vaporwipe.geometry import (Angle, SprayGeometry,
                                angle_from_projected_length)
from vaporwipe.imaging import Intrinsics, NoiseModel
from vaporwipe.scene import PlaneTarget, Scene, spray_cross

SPRAY = SprayGeometry(half_length=50.0, standoff=100.0,
                      sweep_angle=Angle.from_degrees(60.0),
                      wrist_speed=50.0, completion_budget=6.0)
INTR = Intrinsics(width=640, height=360, focal_px=400.0)
NO_NOISE = NoiseModel()


def make_scene(azimuth_deg=0.0, elevation_deg=0.0):
    plane = PlaneTarget(azimuth=Angle.from_degrees(azimuth_deg),
                        elevation=Angle.from_degrees(elevation_deg))
    mist = spray_cross(plane, SPRAY, per_arm_duration=2.5, reciprocations=3)
    return Scene(plane=plane, mist=mist)


class TestPlanSweep:
    def test_default_layout(self):
        plan = plan_sweep(SPRAY, Angle.from_degrees(1.0))
        assert len(plan.offsets) == 61
        assert plan.offsets[0].degrees == pytest.approx(-30.0)
        assert plan.offsets[-1].degrees == pytest.approx(30.0)
        assert plan.offsets[30].degrees == pytest.approx(0.0)

    def test_coarser_step(self):
        plan = plan_sweep(SPRAY, Angle.from_degrees(5.0))
        assert len(plan.offsets) == 13

    def test_infeasible_budget_rejected(self):
        slow = SprayGeometry(half_length=50.0, standoff=100.0,
                             sweep_angle=Angle.from_degrees(60.0),
                             wrist_speed=10.0, completion_budget=6.0)
        with pytest.raises(BudgetExceeded):
            plan_sweep(slow, Angle.from_degrees(1.0))

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            SweepPlan(axis="azimuth", geometry=SPRAY,
                      offsets=(Angle(0.0), Angle(0.1)))          # too few
        with pytest.raises(ValueError):
            SweepPlan(axis="azimuth", geometry=SPRAY,
                      offsets=(Angle(0.2), Angle(0.1), Angle(0.3)))  # not sorted
        with pytest.raises(ValueError):
            SweepPlan(axis="spin", geometry=SPRAY,
                      offsets=(Angle(-0.1), Angle(0.0), Angle(0.1)))
        with pytest.raises(ValueError):
            SweepPlan(axis="azimuth", geometry=SPRAY,
                      offsets=(Angle(-1.0), Angle(0.0), Angle(1.0)))  # span > beta


class TestArgmaxSelection:
    def test_plain_argmax(self):
        offs = np.radians([-2.0, -1.0, 0.0, 1.0, 2.0])
        lens = np.array([1.0, 2.0, 3.0, 2.0, 1.0])
        assert _argmax_with_ties(lens, offs) == 2

    def test_tie_breaks_to_smallest_offset(self):
        offs = np.radians([-2.0, -1.0, 0.0, 1.0, 2.0])
        lens = np.array([1.0, 3.0, 1.0, 3.0, 1.0])
        assert _argmax_with_ties(lens, offs) == 1  # |−1| == |+1|, negative wins

    def test_scale_invariance(self):
        rng = np.random.default_rng(9)
        offs = np.radians(np.arange(-10.0, 11.0))
        for _ in range(50):
            lens = rng.random(offs.size)
            i = _argmax_with_ties(lens, offs)
            assert _argmax_with_ties(lens * 7.3, offs) == i
            refined = _refine_peak(offs, lens, i)
            scaled = _refine_peak(offs, lens * 7.3, i)
            assert scaled == pytest.approx(refined, abs=1e-12)

    def test_refinement_recovers_parabola_vertex(self):
        offs = np.radians(np.arange(-5.0, 6.0))
        vertex = math.radians(1.7)
        lens = 10.0 - (offs - vertex) ** 2
        i = _argmax_with_ties(lens, offs)
        assert _refine_peak(offs, lens, i) == pytest.approx(vertex, abs=1e-9)

    def test_refinement_falls_back_on_flat_data(self):
        offs = np.radians(np.arange(-5.0, 6.0))
        lens = np.full(offs.size, 2.0)
        lens[3] = 2.5
        got = _refine_peak(offs, lens, 3)
        assert offs[0] <= got <= offs[-1]


class TestResolveSign:
    def test_positive_peak_picks_positive(self):
        cands = (Angle.from_degrees(20.0), Angle.from_degrees(-20.0))
        assert resolve_sign(cands, Angle.from_degrees(12.0)).degrees == 20.0

    def test_negative_peak_picks_negative(self):
        cands = (Angle.from_degrees(20.0), Angle.from_degrees(-20.0))
        assert resolve_sign(cands, Angle.from_degrees(-12.0)).degrees == -20.0

    def test_zero_peak_means_flat(self):
        cands = angle_from_projected_length(50.0, 101.0)
        assert resolve_sign(cands, Angle(0.0)).radians == 0.0


class TestRmse:
    def test_known_value(self):
        assert rmse([3.0, -4.0]) == pytest.approx(math.sqrt(12.5))

    def test_zero_for_zero_errors(self):
        assert rmse([0.0, 0.0, 0.0]) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            rmse([])


class TestSweepAxis:
    def test_zero_noise_recovers_tilt(self):
        for truth in (-20.0, -5.0, 0.0, 5.0, 20.0):
            scene = make_scene(truth)
            plan = plan_sweep(SPRAY, Angle.from_degrees(1.0))
            result = sweep_axis(scene, plan, NO_NOISE, INTR)
            # half-resolution camera: coarser pixel quantization than the
            # full-resolution accuracy checks elsewhere
            assert result.estimate_deg == pytest.approx(truth, abs=1.0)
            assert not result.span_saturated

    def test_peak_length_matches_foreshortening(self):
        scene = make_scene(20.0)
        plan = plan_sweep(SPRAY, Angle.from_degrees(1.0))
        result = sweep_axis(scene, plan, NO_NOISE, INTR)
        peak = result.samples[result.argmax_index].length_mm
        assert peak == pytest.approx(100.0 / math.cos(math.radians(20.0)), rel=0.02)
        assert result.closed_form_deg == pytest.approx(20.0, abs=2.5)

    def test_span_saturation_flagged(self):
        # truth at the sweep edge: argmax pinned to the boundary viewpoint
        narrow = SprayGeometry(half_length=50.0, standoff=100.0,
                               sweep_angle=Angle.from_degrees(20.0),
                               wrist_speed=50.0, completion_budget=6.0)
        plane = PlaneTarget(azimuth=Angle.from_degrees(25.0), elevation=Angle(0.0))
        mist = spray_cross(plane, narrow, per_arm_duration=2.5, reciprocations=3)
        scene = Scene(plane=plane, mist=mist)
        plan = plan_sweep(narrow, Angle.from_degrees(2.0))
        result = sweep_axis(scene, plan, NO_NOISE, INTR)
        assert result.span_saturated
        assert abs(result.argmax_offset_deg) == pytest.approx(10.0)

    def test_mist_evaporated_raises(self):
        plane = PlaneTarget(azimuth=Angle(0.0), elevation=Angle(0.0))
        mist = spray_cross(plane, SPRAY, per_arm_duration=2.5, reciprocations=3,
                           dry_time=1.0, onset_time=1.0)
        scene = Scene(plane=plane, mist=mist)
        plan = plan_sweep(SPRAY, Angle.from_degrees(1.0))
        with pytest.raises(MistEvaporated):
            sweep_axis(scene, plan, NO_NOISE, INTR)

    def test_timestamps_follow_arc_speed(self):
        scene = make_scene()
        plan = plan_sweep(SPRAY, Angle.from_degrees(1.0))
        result = sweep_axis(scene, plan, NO_NOISE, INTR)
        t = [s.timestamp for s in result.samples]
        # one degree of arc at r=100, v=50 between consecutive viewpoints
        dt = math.radians(1.0) * 100.0 / 50.0
        assert t[1] - t[0] == pytest.approx(dt, abs=1e-9)
        assert result.time_spent == pytest.approx(60 * dt, abs=1e-9)


class TestSweepAndEstimate:
    def test_two_axis_estimate(self):
        scene = make_scene(15.0, -10.0)
        plans = [plan_sweep(SPRAY, Angle.from_degrees(1.0), axis)
                 for axis in ("azimuth", "elevation")]
        result = sweep_and_estimate(scene, plans, NO_NOISE, INTR)
        # doubly tilted plate couples the axes slightly; looser bound than
        # the single-axis checks
        assert result.theta_hat.degrees == pytest.approx(15.0, abs=1.5)
        assert result.phi_hat.degrees == pytest.approx(-10.0, abs=1.5)
        n = result.normal.as_array()
        assert np.linalg.norm(n) == pytest.approx(1.0, abs=1e-12)

    def test_axes_share_one_evaporation_clock(self):
        scene = make_scene(5.0, 5.0)
        plans = [plan_sweep(SPRAY, Angle.from_degrees(1.0), axis)
                 for axis in ("azimuth", "elevation")]
        result = sweep_and_estimate(scene, plans, NO_NOISE, INTR)
        az, el = result.per_axis
        assert el.samples[0].timestamp == pytest.approx(
            az.samples[0].timestamp + az.time_spent, abs=1e-9)
        assert result.time_spent == pytest.approx(az.time_spent + el.time_spent,
                                                  abs=1e-9)
