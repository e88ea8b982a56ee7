import math

import numpy as np
import pytest

from invtrack.errors import ScenarioError
from invtrack.reporting import scenario_digest
from invtrack.scenario import (
    STANDARD_DT,
    STANDARD_LANDMARKS,
    STANDARD_T_END,
    parse_scenario,
)
from invtrack.trajectories import (
    IntegratedTrajectory,
    PermanentTrajectory,
    PiecewiseTrajectory,
)


class TestDefaults:
    def test_empty_document(self):
        p = parse_scenario({})
        sc = p.scenario
        assert isinstance(sc.trajectory, PermanentTrajectory)
        assert sc.trajectory.u == 1.0
        assert sc.trajectory.v == 0.5
        assert sc.landmarks.coords == STANDARD_LANDMARKS
        assert sc.controller_gains.k1 == sc.controller_gains.k2 == sc.controller_gains.k3 == 1.0
        assert sc.observer_gains.l1 == sc.observer_gains.l2 == sc.observer_gains.l3 == 1.0
        assert sc.t_end == STANDARD_T_END
        assert sc.dt == STANDARD_DT
        assert (sc.initial_pose.x, sc.initial_pose.y, sc.initial_pose.theta) == (0.0, 0.0, 0.0)
        assert sc.initial_estimate == sc.initial_pose

    def test_default_probe_times_quarter_period(self):
        # Standard circle turns at rate u v = 0.5, so a quarter period is pi.
        p = parse_scenario({})
        assert np.allclose(p.probe_times, [0.0, math.pi, 2 * math.pi, 3 * math.pi])

    def test_wobble_probe_times(self):
        p = parse_scenario({"trajectory": {"v_wobble": {}}})
        assert np.allclose(p.probe_times, [0.0, math.pi / 2, math.pi, 1.5 * math.pi])

    def test_ekf_defaults(self):
        p = parse_scenario({})
        assert p.ekf_process_noise == 1e-3
        assert p.ekf_measurement_noise == 1e-2
        assert p.ekf_initial_covariance == 1e-2

    def test_mech_defaults(self):
        m = parse_scenario({}).mech
        assert m.inertia == (1.0, 2.0, 3.0)
        assert m.reference_velocity == (0.4, 1.0, -0.6)
        assert m.damping == (0.5, 0.4, 0.3)
        assert m.force_strength == 1.0
        assert m.force_axis == (0.0, 0.0, 1.0)
        assert m.probe_times == (0.0, 1.0, 2.0)
        assert m.t_end == 10.0
        assert m.dt == 1e-3


class TestTrajectories:
    def test_minimal_constant(self):
        p = parse_scenario({"trajectory": {"u": 2.0, "v": -0.25, "start": [1.0, 2.0, 0.3]}})
        traj = p.scenario.trajectory
        assert isinstance(traj, PermanentTrajectory)
        g = traj.pose(0.0)
        assert (g.x, g.y, g.theta) == (1.0, 2.0, 0.3)

    def test_segments(self):
        doc = {
            "trajectory": {
                "segments": [
                    {"u": 1.0, "duration": 2.0},
                    {"u": -1.0, "v": 0.5, "duration": 1.0},
                ]
            }
        }
        traj = parse_scenario(doc).scenario.trajectory
        assert isinstance(traj, PiecewiseTrajectory)
        assert traj.input(0.5).v == 0.0
        assert traj.input(2.5).u == -1.0

    def test_wobble_input(self):
        doc = {"trajectory": {"v_wobble": {"amplitude": 0.2, "angular_rate": 2.0}}}
        traj = parse_scenario(doc).scenario.trajectory
        assert isinstance(traj, IntegratedTrajectory)
        inp = traj.input(math.pi / 4)
        assert abs(inp.v - (0.5 + 0.2 * math.sin(math.pi / 2))) < 1e-15

    def test_segments_exclude_constant_fields(self):
        doc = {"trajectory": {"u": 1.0, "segments": [{"u": 1.0, "duration": 1.0}]}}
        with pytest.raises(ScenarioError, match="segments"):
            parse_scenario(doc)

    def test_zero_forward_speed_rejected(self):
        with pytest.raises(ScenarioError, match="trajectory.u must be nonzero"):
            parse_scenario({"trajectory": {"u": 0.0}})


class TestValidation:
    def test_unknown_top_level_key(self):
        with pytest.raises(ScenarioError, match="unknown field 'roll'"):
            parse_scenario({"roll": 1})

    def test_non_object_document(self):
        with pytest.raises(ScenarioError, match="JSON object"):
            parse_scenario([1, 2, 3])

    def test_negative_gain_via_alias(self):
        with pytest.raises(ScenarioError) as info:
            parse_scenario({"gains": {"k1": -1}})
        assert "gains.k1" in str(info.value)
        assert "> 0" in str(info.value)

    def test_gains_alias_excludes_split_form(self):
        doc = {"gains": {"k1": 1.0}, "controller_gains": {"k1": 1.0}}
        with pytest.raises(ScenarioError, match="gains excludes"):
            parse_scenario(doc)

    def test_gains_alias_fills_both_triples(self):
        p = parse_scenario({"gains": {"k2": 3.0, "l3": 0.5}})
        sc = p.scenario
        assert sc.controller_gains.k2 == 3.0
        assert sc.controller_gains.k1 == 1.0
        assert sc.observer_gains.l3 == 0.5
        assert sc.observer_gains.l1 == 1.0

    def test_collinear_landmarks(self):
        doc = {"landmarks": [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]}
        with pytest.raises(ScenarioError, match="^landmarks:"):
            parse_scenario(doc)

    def test_landmark_entry_shape(self):
        with pytest.raises(ScenarioError, match=r"landmarks\[1\]"):
            parse_scenario({"landmarks": [[0.0, 0.0], [1.0], [2.0, 0.0]]})

    def test_pose_and_tracking_error_exclusive(self):
        doc = {"initial_pose": [0, 0, 0], "initial_tracking_error": [0, 0, 0]}
        with pytest.raises(ScenarioError, match="initial_pose excludes"):
            parse_scenario(doc)

    def test_estimate_and_estimate_error_exclusive(self):
        doc = {"initial_estimate": [0, 0, 0], "initial_estimate_error": [0, 0, 0]}
        with pytest.raises(ScenarioError, match="initial_estimate excludes"):
            parse_scenario(doc)

    def test_bool_is_not_a_number(self):
        with pytest.raises(ScenarioError, match="t_end must be a number"):
            parse_scenario({"t_end": True})

    def test_nonpositive_dt(self):
        with pytest.raises(ScenarioError, match="dt must be > 0"):
            parse_scenario({"dt": 0.0})

    def test_short_probe_times(self):
        with pytest.raises(ScenarioError, match="probe_times"):
            parse_scenario({"probe_times": [0.0]})

    def test_negative_probe_time(self):
        with pytest.raises(ScenarioError, match=">= 0"):
            parse_scenario({"probe_times": [-1.0, 0.0]})

    def test_ekf_unknown_key(self):
        with pytest.raises(ScenarioError, match="unknown field ekf"):
            parse_scenario({"ekf": {"q": 1.0}})

    def test_mech_nonpositive_inertia(self):
        with pytest.raises(ScenarioError, match="mech.inertia"):
            parse_scenario({"mech": {"inertia": [1.0, 0.0, 1.0]}})


class TestInitialConditions:
    def test_tracking_error_composes_with_reference(self):
        doc = {
            "trajectory": {"start": [1.0, 2.0, math.pi / 2]},
            "initial_tracking_error": [0.1, 0.2, 0.0],
        }
        pose0 = parse_scenario(doc).scenario.initial_pose
        # Offset is applied in the reference frame, rotated by pi/2.
        assert abs(pose0.x - 0.8) < 1e-15
        assert abs(pose0.y - 2.1) < 1e-15
        assert abs(pose0.theta - math.pi / 2) < 1e-15

    def test_estimate_error_composes_with_pose(self):
        doc = {
            "initial_pose": [0.0, 0.0, 0.0],
            "initial_estimate_error": [0.3, -0.1, 0.05],
        }
        est0 = parse_scenario(doc).scenario.initial_estimate
        assert (est0.x, est0.y, est0.theta) == (0.3, -0.1, 0.05)

    def test_absolute_overrides(self):
        doc = {"initial_pose": [5.0, 6.0, 0.1], "initial_estimate": [5.1, 6.1, 0.1]}
        sc = parse_scenario(doc).scenario
        assert sc.initial_pose.x == 5.0
        assert sc.initial_estimate.x == 5.1


class TestCanonical:
    KEYS = (
        "trajectory",
        "landmarks",
        "controller_gains",
        "observer_gains",
        "initial_pose",
        "initial_estimate",
        "t_end",
        "dt",
        "probe_times",
        "ekf",
        "mech",
    )

    def test_key_order(self):
        assert tuple(parse_scenario({}).canonical) == self.KEYS

    def test_defaults_are_materialized(self):
        c = parse_scenario({}).canonical
        assert c["trajectory"] == {"u": 1.0, "v": 0.5, "start": [0.0, 0.0, 0.0]}
        assert c["landmarks"] == [list(p) for p in STANDARD_LANDMARKS]
        assert c["ekf"]["process_noise"] == 1e-3
        assert c["mech"]["t_end"] == 10.0

    def test_digest_is_stable(self):
        doc = {"trajectory": {"u": 1.0, "v": 0.5}, "t_end": 12.0}
        d1 = scenario_digest(parse_scenario(doc).canonical)
        d2 = scenario_digest(parse_scenario(dict(doc)).canonical)
        assert d1 == d2
        assert len(d1) == 64

    def test_digest_separates_scenarios(self):
        d1 = scenario_digest(parse_scenario({}).canonical)
        d2 = scenario_digest(parse_scenario({"t_end": 29.0}).canonical)
        assert d1 != d2

    def test_equivalent_spellings_share_digest(self):
        # Integer 1 and float 1.0 coerce to the same canonical float.
        d1 = scenario_digest(parse_scenario({"trajectory": {"u": 1}}).canonical)
        d2 = scenario_digest(parse_scenario({"trajectory": {"u": 1.0}}).canonical)
        assert d1 == d2
