"""Geodesic right-hand side, adaptive integration with conserved-quantity
monitoring, event termination, the exact radial passthrough, and trajectory
CSV round-tripping."""

import numpy as np
import pytest

from taubnut.errors import AxisError, ConfigError, DegenerateError, DomainError
from taubnut.geometry import ModelParams, Point, christoffel_at
from taubnut.integrator import (
    IntegrationConfig,
    PhaseState,
    Trajectory,
    geodesic_rhs,
    integrate,
    killing_charges,
    norm,
    radial_passthrough,
    trajectory_from_csv,
    trajectory_to_csv,
)

P1 = ModelParams(n=1.0)


def equatorial_state():
    """r0=2, n=1 member of the equatorial family with phi0=1, r1=1; norm 1."""
    return PhaseState(Point(0.0, np.pi / 2, 0.0, 2.0), (0.0, 0.0, 1 / 3, np.sqrt(2) / 3))


class TestPhaseState:
    def test_array_round_trip(self):
        s = PhaseState(Point(0.1, 1.2, 0.3, 2.5), (0.4, -0.5, 0.6, -0.7))
        s2 = PhaseState.from_array(s.as_array())
        assert s2 == s


class TestIntegrationConfig:
    def test_rejects_nonpositive_tolerances(self):
        with pytest.raises(ConfigError):
            IntegrationConfig(abs_tol=0.0)

    def test_rejects_bad_floor_margin(self):
        with pytest.raises(ConfigError):
            IntegrationConfig(r_floor_rel=0.7)

    def test_rejects_nonpositive_horizon(self):
        with pytest.raises(ConfigError):
            IntegrationConfig(t_end=-1.0)

    def test_rejects_unordered_grid(self):
        with pytest.raises(ConfigError):
            IntegrationConfig(sample_grid=(0.0, 2.0, 1.0))


class TestGeodesicRhs:
    def test_radial_acceleration(self):
        # only dr/dt nonzero: d2r/dt2 = n/(r^2-n^2) = 1/3, everything else 0
        s = PhaseState(Point(0.0, np.pi / 3, 0.0, 2.0), (0.0, 0.0, 0.0, 1.0))
        out = geodesic_rhs(P1, s)
        assert out[7] == pytest.approx(1 / 3, abs=1e-15)
        assert np.max(np.abs(out[4:7])) == 0.0

    def test_equator_azimuthal_state(self):
        s = PhaseState(Point(0.0, np.pi / 2, 0.0, 2.0), (0.0, 0.0, 1.0, 0.0))
        out = geodesic_rhs(P1, s)
        assert out[7] == pytest.approx(2 / 3, abs=1e-15)
        # sin*cos vanishes at the equator up to the cos(pi/2) rounding residue
        assert abs(out[5]) < 1e-15
        assert out[4] == 0.0 and out[6] == 0.0

    def test_theta_acceleration_from_charge_coupling(self):
        s = PhaseState(Point(0.0, np.pi / 2, 0.0, 2.0), (1.0, 0.0, 1.0, 0.0))
        assert geodesic_rhs(P1, s)[5] == pytest.approx(-2 / 9, abs=1e-14)

    def test_matches_christoffel_contraction(self):
        params = ModelParams(n=0.7)
        p = Point(0.1, 1.1, 0.4, 1.7)
        v = np.array([0.3, -0.2, 0.4, 0.1])
        G = christoffel_at(params, p).components
        acc = -np.einsum("lmn,m,n->l", G, v, v)
        out = geodesic_rhs(params, PhaseState(p, tuple(v)))
        assert np.allclose(out[:4], v, atol=0)
        assert np.allclose(out[4:], acc, atol=1e-13)

    def test_rejects_r_at_or_below_n(self):
        with pytest.raises(DomainError):
            geodesic_rhs(P1, PhaseState(Point(0.0, 1.0, 0.0, 1.0), (0.0, 0.0, 0.0, 1.0)))

    def test_axis_error_when_singular_term_active(self):
        s = PhaseState(Point(0.0, 0.0, 0.0, 2.0), (1.0, 1.0, 0.0, 0.0))
        with pytest.raises(AxisError):
            geodesic_rhs(P1, s)

    def test_meridional_clean_arbitrarily_near_axis(self):
        # no 1/sin term is activated when dtau/dt = dphi/dt = 0
        s = PhaseState(Point(0.0, 1e-9, 0.0, 2.0), (0.0, 1.0, 0.0, 0.0))
        out = geodesic_rhs(P1, s)
        assert np.all(np.isfinite(out))
        assert out[7] == pytest.approx(2 / 3, abs=1e-15)

    def test_holding_r_fixed_requires_zero_velocity(self):
        # dr/dt = 0 with dphi/dt != 0 gives d2r/dt2 != 0: r cannot stay constant
        s = PhaseState(Point(0.0, np.pi / 2, 0.0, 2.0), (0.0, 0.0, 1.0, 0.0))
        assert geodesic_rhs(P1, s)[7] > 0.1


class TestKillingCharges:
    def test_pure_tau_motion_reduction(self):
        s = PhaseState(Point(0.0, 1.1, 0.0, 3.0), (2.0, 0.0, 0.0, 0.0))
        p_tau, _ = killing_charges(P1, s)
        assert p_tau == pytest.approx((3 - 1) / (3 + 1) * 2.0, abs=1e-15)

    def test_equator_azimuthal_reduction(self):
        s = PhaseState(Point(0.0, np.pi / 2, 0.0, 3.0), (0.0, 0.0, 0.5, 0.0))
        _, p_phi = killing_charges(P1, s)
        assert p_phi == pytest.approx((9 - 1) * 0.5, abs=1e-14)

    def test_mixed_state_value(self):
        s = PhaseState(Point(0.0, np.pi / 3, 0.0, 3.0), (1.0, 0.0, 2.0, 0.0))
        p_tau, _ = killing_charges(P1, s)
        assert p_tau == pytest.approx(1.5, abs=1e-14)


class TestNorm:
    def test_zero_velocity(self):
        s = PhaseState(Point(0.0, 1.0, 0.0, 2.0), (0.0, 0.0, 0.0, 0.0))
        assert norm(P1, s) == 0.0

    def test_unit_norm_state(self):
        assert norm(P1, equatorial_state()) == pytest.approx(1.0, abs=1e-15)

    def test_quadratic_scaling(self):
        s = equatorial_state()
        s2 = PhaseState(s.point, tuple(3.0 * v for v in s.velocity))
        assert norm(P1, s2) == pytest.approx(9.0 * norm(P1, s), rel=1e-14)


class TestIntegrate:
    def test_conserved_quantities_drift(self):
        cfg = IntegrationConfig(abs_tol=1e-12, rel_tol=1e-12, t_end=10.0)
        traj = integrate(P1, equatorial_state(), cfg)
        assert traj.termination == "Horizon"
        assert np.max(np.abs(traj.p_phi - traj.p_phi[0])) <= 1e-10
        assert np.max(np.abs(traj.p_tau - traj.p_tau[0])) <= 1e-10
        assert np.max(np.abs(traj.norm - 1.0)) <= 1e-10

    def test_time_strictly_increasing(self):
        traj = integrate(P1, equatorial_state(), IntegrationConfig(t_end=3.0))
        assert np.all(np.diff(traj.t) > 0)

    def test_inward_radial_stops_at_floor(self):
        s = PhaseState(Point(0.0, np.pi / 2, 0.0, 2.0), (0.0, 0.0, 0.0, -0.5))
        traj = integrate(P1, s, IntegrationConfig(t_end=50.0))
        assert traj.termination == "SingularityApproach"
        assert traj.coords[-1, 3] == pytest.approx(1.0 + 1e-6, rel=1e-9)

    def test_zero_velocity_single_row(self):
        s = PhaseState(Point(0.0, 1.0, 0.0, 2.0), (0.0, 0.0, 0.0, 0.0))
        traj = integrate(P1, s, IntegrationConfig(t_end=5.0))
        assert traj.termination == "Horizon"
        assert len(traj) == 1 and traj.norm[0] == 0.0

    def test_immediate_floor_violation(self):
        s = PhaseState(Point(0.0, np.pi / 2, 0.0, 1.0 + 1e-7), (0.0, 0.0, 0.0, -0.1))
        traj = integrate(P1, s, IntegrationConfig(t_end=5.0))
        assert traj.termination == "SingularityApproach"
        assert len(traj) == 1

    def test_axis_stop_when_charged(self):
        s = PhaseState(Point(0.0, 0.2, 0.0, 3.0), (0.0, -1.0, 1e-3, 0.0))
        traj = integrate(P1, s, IntegrationConfig(t_end=5.0))
        assert traj.termination == "AxisApproach"
        assert traj.coords[-1, 1] == pytest.approx(P1.axis_guard, abs=1e-9)

    def test_upper_axis_stop(self):
        s = PhaseState(Point(0.0, np.pi - 0.2, 0.0, 3.0), (0.0, 1.0, 1e-3, 0.0))
        traj = integrate(P1, s, IntegrationConfig(t_end=5.0))
        assert traj.termination == "AxisApproach"
        assert traj.coords[-1, 1] == pytest.approx(np.pi - P1.axis_guard, abs=1e-9)

    def test_charged_start_inside_band_stops_at_once(self):
        s = PhaseState(Point(0.0, 5e-4, 0.0, 3.0), (0.0, -0.1, 1e-3, 0.0))
        traj = integrate(P1, s, IntegrationConfig(t_end=5.0))
        assert traj.termination == "AxisApproach"
        assert len(traj) == 1

    def test_meridional_passes_through_axis(self):
        s = PhaseState(Point(0.0, 0.5, 0.0, 3.0), (0.0, -0.4, 0.0, 0.0))
        cfg = IntegrationConfig(abs_tol=1e-12, rel_tol=1e-12, t_end=2.0)
        traj = integrate(P1, s, cfg)
        assert traj.termination == "Horizon"
        assert traj.coords[-1, 1] < 0.0  # continued past the pole
        assert np.max(np.abs(traj.norm - traj.norm[0])) <= 1e-10

    def test_equatorial_family_stays_equatorial(self):
        cfg = IntegrationConfig(abs_tol=1e-12, rel_tol=1e-12, t_end=10.0)
        traj = integrate(P1, equatorial_state(), cfg)
        assert np.max(np.abs(traj.coords[:, 1] - np.pi / 2)) <= 1e-8
        assert np.max(np.abs(traj.coords[:, 0])) <= 1e-8

    def test_tau_charged_family_freezes_angles(self):
        s = PhaseState(Point(0.0, np.pi / 3, 0.0, 3.0), (2.0, 0.0, 0.0, np.sqrt(0.5)))
        cfg = IntegrationConfig(abs_tol=1e-12, rel_tol=1e-12, t_end=5.0)
        traj = integrate(P1, s, cfg)
        assert np.all(traj.coords[:, 1] == np.pi / 3)
        assert np.all(traj.coords[:, 2] == 0.0)

    def test_constant_latitude_family_holds(self):
        # dtau = phi0 (r+3n) cos(theta) / (2n (r+n)), dphi = phi0/(r^2-n^2)
        s = PhaseState(Point(0.0, np.pi / 3, 0.0, 2.0), (5 / 12, 0.0, 1 / 3, np.sqrt(5 / 24)))
        cfg = IntegrationConfig(abs_tol=1e-12, rel_tol=1e-12, t_end=10.0)
        traj = integrate(P1, s, cfg)
        assert traj.termination == "Horizon"
        assert np.max(np.abs(traj.coords[:, 1] - np.pi / 3)) <= 1e-8

    def test_sample_grid_rows(self):
        grid = (0.0, 0.5, 1.0, 1.5, 2.0)
        cfg = IntegrationConfig(abs_tol=1e-12, rel_tol=1e-12, t_end=2.0, sample_grid=grid)
        traj = integrate(P1, equatorial_state(), cfg)
        assert len(traj) == 5
        assert np.allclose(traj.t, grid, atol=1e-12)
        assert np.max(np.abs(traj.norm - 1.0)) <= 1e-8

    def test_step_budget(self):
        cfg = IntegrationConfig(abs_tol=1e-12, rel_tol=1e-12, t_end=10.0, max_steps=5)
        traj = integrate(P1, equatorial_state(), cfg)
        assert traj.termination == "StepBudget"
        assert traj.t[-1] < 10.0

    def test_convergence_order_at_least_four(self):
        ref = integrate(P1, equatorial_state(),
                        IntegrationConfig(abs_tol=1e-14, rel_tol=1e-14, t_end=2.0))
        yref = ref.data[-1, 1:9]
        errs, hs = [], []
        for tol in (1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11):
            tr = integrate(P1, equatorial_state(),
                           IntegrationConfig(abs_tol=tol, rel_tol=tol, t_end=2.0))
            errs.append(np.max(np.abs(tr.data[-1, 1:9] - yref)))
            hs.append(2.0 / (len(tr) - 1))
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert slope >= 4.0


class TestRadialPassthrough:
    def test_center_sample_sits_on_the_seam(self):
        traj = radial_passthrough(P1, 1.5, 0.8, +1)
        mid = len(traj) // 2
        assert traj.t[mid] == 1.5
        assert traj.coords[mid, 3] == 1.0 and traj.velocities[mid, 3] == 0.0

    def test_branch_velocity_constant(self):
        traj = radial_passthrough(P1, 0.0, 0.8, +1)
        r = traj.coords[:, 3]
        dr = traj.velocities[:, 3]
        mid = len(traj) // 2
        out = np.sqrt((r[mid + 1:] + 1.0) / (r[mid + 1:] - 1.0)) * dr[mid + 1:]
        inc = np.sqrt((r[:mid] + 1.0) / (r[:mid] - 1.0)) * dr[:mid]
        assert np.max(np.abs(out - 0.8)) <= 1e-12
        assert np.max(np.abs(inc + 0.8)) <= 1e-12

    def test_time_reflection_symmetry(self):
        traj = radial_passthrough(P1, 0.3, 1.1, -1)
        r = traj.coords[:, 3]
        assert np.max(np.abs(r - r[::-1])) <= 1e-12

    def test_outgoing_time_regression(self):
        traj = radial_passthrough(ModelParams(n=0.5), 0.0, 1.0, +1, r_max=1.3)
        mid = len(traj) // 2
        assert traj.coords[-1, 3] == pytest.approx(1.3, abs=1e-10)
        assert traj.t[-1] - traj.t[mid] == pytest.approx(2.00471895621705, abs=1e-12)

    def test_norm_column_constant(self):
        traj = radial_passthrough(P1, 0.0, 0.7, +1)
        assert np.all(traj.norm == pytest.approx(0.49, abs=1e-15))

    def test_rejects_zero_speed_constant(self):
        with pytest.raises(DegenerateError):
            radial_passthrough(P1, 0.0, 0.0, +1)

    def test_rejects_bad_direction(self):
        with pytest.raises(ConfigError):
            radial_passthrough(P1, 0.0, 1.0, 2)


class TestTrajectoryCsv:
    def test_header_and_termination_comment(self):
        traj = integrate(P1, equatorial_state(), IntegrationConfig(t_end=1.0))
        text = trajectory_to_csv(traj)
        lines = text.strip().split("\n")
        assert lines[0] == "t,tau,theta,phi,r,dtau,dtheta,dphi,dr,p_tau,p_phi,norm"
        assert lines[-1] == "# termination=Horizon"

    def test_round_trip_byte_stable(self):
        traj = integrate(P1, equatorial_state(), IntegrationConfig(t_end=1.0))
        text = trajectory_to_csv(traj)
        assert trajectory_to_csv(trajectory_from_csv(text)) == text

    def test_rejects_bad_header(self):
        with pytest.raises(ConfigError):
            trajectory_from_csv("a,b,c\n1,2,3\n# termination=Horizon\n")

    def test_rejects_missing_termination(self):
        text = ",".join(Trajectory.COLUMNS) + "\n" + ",".join(["0"] * 12) + "\n"
        with pytest.raises(ConfigError):
            trajectory_from_csv(text)

    def test_rejects_unknown_cause(self):
        with pytest.raises(ConfigError):
            Trajectory(np.zeros((1, 12)), "Elsewhere")
