"""Tests for kpblab.norms: anisotropic Sobolev, space-time, and dispersive
modulation norms plus the equivalence-gap diagnostic.

Oracles: single-mode closed forms, time-Parseval identities computed
directly from the window samples, and scaling/monotonicity laws of the
weights.  One windowed-resolution consistency value is checked against a
frozen tolerance.
"""

import numpy as np
import pytest

from kpblab.norms import (
    bourgain_norm,
    equivalence_gap,
    sobolev_norm,
    sobolev_weight,
    spacetime_norm,
    time_window,
    windowed_time_transform,
)
from kpblab.semigroup import free_table, semigroup_table
from kpblab.solver import Trajectory
from kpblab.spectral_core import (
    SpectralField,
    forward_transform,
    l2_norm,
    make_grid,
    project_zero_x_mean,
)
from kpblab.verify import free_trajectory, random_field


def idx(grid, kx, ky):
    return kx % grid.nx, ky % grid.ny


def single_mode(grid, kx, ky, value=1.0):
    coeffs = np.zeros((grid.nx, grid.ny), complex)
    coeffs[idx(grid, kx, ky)] = value
    coeffs[idx(grid, -kx, -ky)] = np.conj(value)
    return SpectralField(grid=grid, coeffs=coeffs)


def free_W_trajectory(phi, T, M):
    times = np.linspace(0.0, T, M + 1)
    coeffs = np.array([semigroup_table(phi.grid, float(t)).factors * phi.coeffs
                       for t in times])
    return Trajectory(grid=phi.grid, times=times, coeffs=coeffs)


@pytest.fixture(scope="module")
def grid():
    return make_grid(32, 32, np.pi, np.pi)


@pytest.fixture(scope="module")
def smooth_traj(grid):
    phi = random_field(grid, np.random.default_rng(7), decay=2)
    return free_W_trajectory(phi, 2.0, 32)


class TestSobolevNorm:
    def test_s_zero_equals_l2(self, grid):
        f = project_zero_x_mean(
            forward_transform(np.random.default_rng(0).standard_normal((32, 32)), grid))
        assert sobolev_norm(f, 0.0, 0.0) == pytest.approx(l2_norm(f), rel=1e-14)

    def test_single_mode_closed_form(self, grid):
        f = single_mode(grid, 1, 0, value=3.0)
        base = l2_norm(f)
        # weight (1+xi^2)^{s1}(1+eta^2)^{s2} at (1,0) is 2^{s1}
        assert sobolev_norm(f, 1.0, 0.0) == pytest.approx(np.sqrt(2) * base, rel=1e-14)
        assert sobolev_norm(f, -1.0, 5.0) == pytest.approx(base / np.sqrt(2), rel=1e-14)

    def test_monotone_in_orders(self, grid):
        f = random_field(grid, np.random.default_rng(1), decay=0)
        assert sobolev_norm(f, 0.5, 0.0) >= sobolev_norm(f, 0.0, 0.0)
        assert sobolev_norm(f, 0.0, 0.3) >= sobolev_norm(f, 0.0, 0.0)
        assert sobolev_norm(f, -0.5, 0.0) <= sobolev_norm(f, 0.0, 0.0)

    def test_homogeneous_in_amplitude(self, grid):
        f = random_field(grid, np.random.default_rng(2), decay=1)
        g = SpectralField(grid=grid, coeffs=2.5 * f.coeffs)
        assert sobolev_norm(g, 0.3, -0.2) == pytest.approx(
            2.5 * sobolev_norm(f, 0.3, -0.2), rel=1e-14)

    def test_weight_table_values(self, grid):
        w = sobolev_weight(grid, 1.0, 2.0)
        assert w[idx(grid, 1, 1)] == pytest.approx((1 + 1) ** 1 * (1 + 1) ** 2)
        assert w[idx(grid, 0, 0)] == pytest.approx(1.0)


class TestWindowedTransform:
    def test_too_few_steps_rejected(self, grid):
        times = np.linspace(0.0, 1.0, 9)  # 8 steps < 16
        traj = Trajectory(grid=grid, times=times,
                          coeffs=np.zeros((9, 32, 32), complex))
        with pytest.raises(ValueError):
            spacetime_norm(traj, 0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            bourgain_norm(traj, 0.5, 0.0, 0.0)

    def test_window_shape(self):
        w = time_window(33)
        assert w.shape == (33,)
        assert np.max(w) == pytest.approx(1.0)
        assert w[0] == pytest.approx(0.0, abs=1e-15)
        # interior plateau untouched by the taper
        assert w[16] == pytest.approx(1.0)

    def test_transform_frequencies_and_scaling(self, smooth_traj):
        tau, uhat = windowed_time_transform(smooth_traj)
        n = smooth_traj.n_times
        assert tau.shape == (n,)
        assert uhat.shape == (n, 32, 32)
        dt = smooth_traj.dt
        assert np.max(np.abs(np.sort(tau) - 2 * np.pi * np.sort(
            np.fft.fftfreq(n, d=dt)))) < 1e-12
        # tau = 0 row is dt * sum_k w_k u_k (plain windowed Riemann sum)
        w = time_window(n)
        direct = dt * np.tensordot(w, smooth_traj.coeffs, axes=(0, 0))
        j0 = int(np.argmin(np.abs(tau)))
        assert np.max(np.abs(uhat[j0] - direct)) < 1e-12 * np.max(np.abs(direct))


class TestSpacetimeNorm:
    def test_zero_trajectory(self, grid):
        times = np.linspace(0.0, 1.0, 17)
        traj = Trajectory(grid=grid, times=times,
                          coeffs=np.zeros((17, 32, 32), complex))
        assert spacetime_norm(traj, 0.5, 0.1, 0.2) == 0.0

    def test_b_zero_time_parseval(self, smooth_traj):
        # for b = 0 the norm equals the windowed discrete L^2_t of the
        # spatial Sobolev norm, by Parseval in time
        s1, s2 = -0.3, 0.2
        w = time_window(smooth_traj.n_times)
        vals = np.array([sobolev_norm(smooth_traj.state(k), s1, s2)
                         for k in range(smooth_traj.n_times)])
        oracle = np.sqrt(smooth_traj.dt * np.sum((w * vals) ** 2))
        assert spacetime_norm(smooth_traj, 0.0, s1, s2) == pytest.approx(
            oracle, rel=1e-12)

    def test_monotone_in_b(self, smooth_traj):
        a = spacetime_norm(smooth_traj, 0.0, 0.0, 0.0)
        b = spacetime_norm(smooth_traj, 0.25, 0.0, 0.0)
        c = spacetime_norm(smooth_traj, 0.5, 0.0, 0.0)
        assert a <= b <= c

    def test_constant_single_mode_window_factor(self, grid):
        # time-independent single mode: norm = spatial norm * window mass
        f = single_mode(grid, 1, 0, value=4.0)
        times = np.linspace(0.0, 1.0, 33)
        traj = Trajectory(grid=grid, times=times,
                          coeffs=np.repeat(f.coeffs[None], 33, axis=0))
        w = time_window(33)
        oracle = sobolev_norm(f, 0.7, -0.1) * np.sqrt(traj.dt * np.sum(w ** 2))
        assert spacetime_norm(traj, 0.0, 0.7, -0.1) == pytest.approx(oracle, rel=1e-12)


class TestBourgainNorm:
    def test_zero_trajectory(self, grid):
        times = np.linspace(0.0, 1.0, 17)
        traj = Trajectory(grid=grid, times=times,
                          coeffs=np.zeros((17, 32, 32), complex))
        assert bourgain_norm(traj, 0.5, 0.0, 0.0) == 0.0

    def test_b_zero_collapses_to_spacetime(self, smooth_traj):
        # with b = 0 the modulation weight is 1: the two norms coincide
        a = bourgain_norm(smooth_traj, 0.0, -0.3, 0.2)
        b = spacetime_norm(smooth_traj, 0.0, -0.3, 0.2)
        assert a == pytest.approx(b, rel=1e-12)

    def test_free_flow_concentrates_near_zero_modulation(self, grid):
        # for u = U(t)phi the modulation sigma = tau - P is concentrated at 0,
        # so raising b changes the norm much less than for a static field
        phi = random_field(grid, np.random.default_rng(9), decay=2)
        times = np.linspace(0.0, 2.0, 33)
        free = Trajectory(grid=grid, times=times,
                          coeffs=np.array([free_table(grid, float(t)).factors * phi.coeffs
                                           for t in times]))
        static = Trajectory(grid=grid, times=times,
                            coeffs=np.repeat(phi.coeffs[None], 33, axis=0))

        def lift(traj):
            lo = bourgain_norm(traj, 0.0, 0.0, 0.0)
            hi = bourgain_norm(traj, 0.5, 0.0, 0.0)
            return hi / lo

        # remove the xi^4 elliptic contribution from the comparison by using
        # only low-xi modes
        mask = np.abs(grid.kx_int) <= 2
        phi_low = SpectralField(grid=grid, coeffs=np.where(mask[:, None], phi.coeffs, 0))
        free_low = Trajectory(grid=grid, times=times,
                              coeffs=np.array([free_table(grid, float(t)).factors * phi_low.coeffs
                                               for t in times]))
        static_low = Trajectory(grid=grid, times=times,
                                coeffs=np.repeat(phi_low.coeffs[None], 33, axis=0))
        assert lift(free_low) < lift(static_low)

    def test_windowed_resolution_consistency(self, grid):
        # doubling the time resolution moves the norm by well under 2%
        phi = random_field(grid, np.random.default_rng(7), decay=2)
        vals = [bourgain_norm(free_trajectory(phi, 2.0, M, cutoff=False), 0.5, -0.3, 0.0)
                for M in (32, 64)]
        assert abs(vals[1] - vals[0]) / vals[1] < 0.02

    def test_monotone_in_b(self, smooth_traj):
        a = bourgain_norm(smooth_traj, 0.0, 0.0, 0.0)
        b = bourgain_norm(smooth_traj, 0.5, 0.0, 0.0)
        assert b >= a


class TestEquivalenceGap:
    def test_zero_trajectory_reports_unity(self, grid):
        times = np.linspace(0.0, 1.0, 17)
        traj = Trajectory(grid=grid, times=times,
                          coeffs=np.zeros((17, 32, 32), complex))
        assert equivalence_gap(traj, 0.5, 0.0, 0.0) == 1.0

    def test_gap_within_algebraic_bounds(self, grid):
        # (1 + sigma^2 + xi^4)^b is pointwise comparable to
        # (1 + sigma^2)^b + (1 + xi^2)^{2b}: the ratio lies in [1/3, 3]
        rng = np.random.default_rng(3)
        for k in range(4):
            phi = random_field(grid, rng, decay=k % 3)
            traj = free_W_trajectory(phi, 2.0, 32)
            for b in (0.0, 0.25, 0.5):
                gap = equivalence_gap(traj, b, -0.2, 0.1)
                assert 1.0 / 3.0 <= gap <= 3.0

    def test_free_U_flow_tracks_shifted_sobolev(self, grid):
        # on the free flow the b = 1/2 norm matches H^{s1+2b} up to a
        # bounded factor (the xi^4 elliptic term dominates the weight)
        phi = random_field(grid, np.random.default_rng(5), decay=2)
        times = np.linspace(0.0, 2.0, 33)
        traj = Trajectory(grid=grid, times=times,
                          coeffs=np.array([free_table(grid, float(t)).factors * phi.coeffs
                                           for t in times]))
        bn = bourgain_norm(traj, 0.5, -0.3, 0.0)
        sn = spacetime_norm(traj, 0.0, -0.3 + 1.0, 0.0)
        assert 0.5 <= bn / sn <= 2.0
