import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fvlab.harness import mac_grid_sequence, mac_histories
from fvlab.mac2d import (CENTERED, UPWIND, MacState, build_mac_grid, cell_means, edge_density,
                         lw_functional, mass_residual, project_density,
                         quasi_uniformity_ratio, sample_state, separable_test_function,
                         step_mass, weak_form_value)
from fvlab.mesh import CFLError, TimeGrid, random_mesh
from fvlab.problems import mac_lw_fields


def random_grid(m, seed, ratio=1.5):
    return build_mac_grid(random_mesh(0, 1, m, ratio, seed).faces,
                          random_mesh(0, 1, m, ratio, seed + 1).faces)


def random_state(grid, seed, speed=1.0):
    rng = np.random.default_rng(seed)
    return MacState(rng.uniform(0.5, 2.0, (grid.nx, grid.ny)),
                    rng.uniform(-speed, speed, (grid.nx + 1, grid.ny)),
                    rng.uniform(-speed, speed, (grid.nx, grid.ny + 1)))


class TestGrid:
    def test_two_by_two(self):
        g = build_mac_grid([0, 1, 2], [0, 1, 2])
        assert g.vertical_lengths.size == 6 and g.horizontal_lengths.size == 6
        assert g.vertical_dual_areas.sum() == 4.0
        assert g.horizontal_dual_areas.sum() == 4.0
        np.testing.assert_array_equal(g.vertical_dual_areas[:, 0], [0.5, 1.0, 0.5])

    def test_single_cell_dual_halves(self):
        g = build_mac_grid([0, 1], [0, 1])
        np.testing.assert_array_equal(g.vertical_dual_areas, [[0.5], [0.5]])
        np.testing.assert_array_equal(g.horizontal_dual_areas, [[0.5, 0.5]])

    def test_nonuniform_dual_partition(self):
        g = build_mac_grid([0, 1, 3], [0, 2])
        assert g.area == 6.0
        assert g.cell_areas.sum() == 6.0
        assert g.vertical_dual_areas.sum() == 6.0
        assert g.horizontal_dual_areas.sum() == 6.0
        np.testing.assert_array_equal(g.vertical_dual_areas[:, 0], [1.0, 3.0, 2.0])

    def test_midpoints(self):
        g = build_mac_grid([0, 1, 3], [0, 2])
        xs, ys = g.vertical_midpoints
        np.testing.assert_array_equal(xs[:, 0], [0, 1, 3])
        np.testing.assert_array_equal(ys[:, 0], [1, 1, 1])
        xs, ys = g.horizontal_midpoints
        np.testing.assert_array_equal(xs[:, 0], [0.5, 2.0])

    def test_quasi_uniformity(self):
        assert quasi_uniformity_ratio(build_mac_grid([0, 1, 2], [0, 0.5, 1])) == 2.0
        assert quasi_uniformity_ratio(build_mac_grid([0, 1, 2], [0, 2])) == 2.0
        assert quasi_uniformity_ratio(build_mac_grid([0, 1, 2], [0, 1, 2])) == 1.0

    @pytest.mark.parametrize("xf, yf", [([0], [0, 1]), ([0, 1, 1], [0, 1]),
                                        ([0, np.nan], [0, 1]), ([[0, 1]], [0, 1])])
    def test_rejects(self, xf, yf):
        with pytest.raises(ValueError):
            build_mac_grid(xf, yf)

    @settings(max_examples=30, deadline=None)
    @given(m=st.integers(1, 30), seed=st.integers(0, 10**6))
    def test_dual_meshes_partition_domain(self, m, seed):
        g = random_grid(m, seed)
        assert g.vertical_dual_areas.sum() == pytest.approx(g.area)
        assert g.horizontal_dual_areas.sum() == pytest.approx(g.area)

    def test_json(self):
        g = build_mac_grid([0, 0.5, 1], [0, 1])
        doc = json.loads(g.to_json())
        assert doc == {"x_faces": [0, 0.5, 1], "y_faces": [0, 1]}


class TestProjection:
    def test_constant(self):
        g = random_grid(5, 3)
        np.testing.assert_allclose(project_density(lambda x, y: 0 * x + 3.0, g), 3.0)

    def test_linear(self):
        g = build_mac_grid([0, 1], [0, 1])
        assert project_density(lambda x, y: x, g)[0, 0] == pytest.approx(0.5)

    def test_sine_product(self):
        g = build_mac_grid([0, 1], [0, 1])
        mean = project_density(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y), g)[0, 0]
        assert mean == pytest.approx((2 / np.pi) ** 2, abs=1e-3)

    def test_quintic_exact(self):
        # 3-point Gauss integrates degree 5 exactly in each variable
        g = random_grid(3, 7)
        means = cell_means(lambda x, y: x**5 * y**4, g)
        exact = (np.diff(g.x_faces**6) / 6)[:, None] * (np.diff(g.y_faces**5) / 5)[None, :]
        np.testing.assert_allclose(means * g.cell_areas, exact, rtol=1e-12)


class TestEdgeDensity:
    def test_upwind_picks_donor(self):
        assert edge_density(1.0, 2.0, 0.5) == 1.0
        assert edge_density(1.0, 2.0, -0.5) == 2.0

    def test_zero_velocity_falls_back_to_mean(self):
        assert edge_density(1.0, 2.0, 0.0) == 1.5

    def test_centered(self):
        assert edge_density(1.0, 2.0, 3.0, CENTERED) == 1.5

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            edge_density(1.0, 2.0, 1.0, "downwind")


class TestResidual:
    def test_zero_velocity_constant_density(self):
        g = build_mac_grid([0, 1, 2], [0, 1])
        s = MacState(np.ones((2, 1)), np.zeros((3, 1)), np.zeros((2, 2)))
        np.testing.assert_array_equal(mass_residual(s, s, 0.1, g), 0.0)

    def test_two_cell_example(self):
        # unit flow across the middle edge carries rho_K = 2 out of K into L
        g = build_mac_grid([0, 1, 2], [0, 1])
        s = MacState(np.array([[2.0], [1.0]]), np.array([[0.0], [1.0], [0.0]]),
                     np.zeros((2, 2)))
        np.testing.assert_allclose(mass_residual(s, s, 0.1, g)[:, 0], [2.0, -2.0])

    def test_wall_velocities_ignored(self):
        g = build_mac_grid([0, 1], [0, 1])
        s = MacState(np.ones((1, 1)), np.array([[5.0], [-5.0]]), np.array([[3.0, 3.0]]))
        np.testing.assert_array_equal(mass_residual(s, s, 1.0, g), 0.0)

    def test_time_derivative(self):
        g = build_mac_grid([0, 1], [0, 1])
        a = MacState(np.ones((1, 1)), np.zeros((2, 1)), np.zeros((1, 2)))
        b = MacState(np.full((1, 1), 1.5), a.u, a.v)
        assert mass_residual(a, b, 0.25, g)[0, 0] == 2.0

    def test_taylor_oracle_at_cell_centres(self):
        # rho = 2 + sin(x + t), u = (1, 0): C_K -> d_t rho + d_x rho = 2 cos(x + t),
        # away from the walls where the normal velocity is cut to zero
        def rho(x, y, t):
            return 2 + np.sin(x + t) + 0 * y

        def vel(x, y, t):
            return 1 + 0 * x, 0 * x

        errs = []
        for m in (16, 32, 64):
            g = build_mac_grid(np.linspace(0, 1, m + 1), np.linspace(0, 1, m + 1))
            dt = 0.4 / m
            s0 = sample_state(rho, vel, g, 0.1)
            s1 = sample_state(rho, vel, g, 0.1 + dt)
            C = mass_residual(s0, s1, dt, g)[1:-1]
            xc = g.centers[0][1:-1]
            errs.append(np.abs(C - 2 * np.cos(xc + 0.1)).max())
        assert errs[-1] < 0.05
        assert errs[0] / errs[1] > 1.7 and errs[1] / errs[2] > 1.7

    def test_shape_mismatch(self):
        g = build_mac_grid([0, 1], [0, 1])
        bad = MacState(np.ones((2, 1)), np.zeros((2, 1)), np.zeros((1, 2)))
        with pytest.raises(ValueError):
            mass_residual(bad, bad, 0.1, g)


class TestStep:
    @pytest.mark.parametrize("mode", [UPWIND, CENTERED])
    def test_mass_conserved_over_many_steps(self, mode):
        g = random_grid(12, 5)
        state = random_state(g, 1)
        m0 = state.mass(g)
        dt = 0.2 * g.min_side
        for _ in range(100):
            state = step_mass(state, dt, g, mode)
        # centred forward Euler may grow, so measure drift against the size of rho
        scale = max(m0, float(np.sum(g.cell_areas * np.abs(state.rho))))
        assert abs(state.mass(g) - m0) <= 1e-13 * scale
        assert state.n == 100

    def test_step_zeroes_residual(self):
        g = random_grid(8, 2)
        s0 = random_state(g, 3)
        s1 = step_mass(s0, 0.2 * g.min_side, g)
        assert np.abs(mass_residual(s0, s1, 0.2 * g.min_side, g)).max() < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(m=st.integers(2, 16), seed=st.integers(0, 10**6), frac=st.floats(0.05, 0.25))
    def test_upwind_positivity(self, m, seed, frac):
        g = random_grid(m, seed)
        s = random_state(g, seed)
        s1 = step_mass(s, frac * g.min_side, g)
        assert s1.rho.min() >= 0.0
        assert s1.mass(g) == pytest.approx(s.mass(g), rel=1e-13)

    def test_cfl_refusal(self):
        g = build_mac_grid(np.linspace(0, 1, 5), np.linspace(0, 1, 5))
        s = MacState(np.ones((4, 4)), np.ones((5, 4)), np.ones((4, 5)))
        with pytest.raises(CFLError) as info:
            step_mass(s, 0.2, g)
        assert info.value.ratio == pytest.approx(0.2 * 2 * 0.25 / 0.0625)

    def test_zero_velocity_keeps_density(self):
        g = random_grid(5, 1)
        s = MacState(np.random.default_rng(0).uniform(1, 2, (5, 5)), np.zeros((6, 5)),
                     np.zeros((5, 6)))
        np.testing.assert_array_equal(step_mass(s, 0.1, g).rho, s.rho)

    def test_uniform_flow_changes_only_wall_cells(self):
        # constant rho in a constant vertical stream: interior cells see equal
        # in- and outflow, only the rows against the walls change
        g = build_mac_grid(np.linspace(0, 1, 5), np.linspace(0, 1, 5))
        s = MacState(np.full((4, 4), 1.5), np.zeros((5, 4)), np.ones((4, 5)))
        rho = step_mass(s, 0.1, g).rho
        np.testing.assert_allclose(rho[:, 1:-1], 1.5, rtol=1e-15)
        np.testing.assert_allclose(rho[:, 0], 0.9)
        np.testing.assert_allclose(rho[:, -1], 2.1)

    def test_wall_velocities_leave_density_unchanged(self):
        g = build_mac_grid(np.linspace(0, 1, 5), np.linspace(0, 1, 5))
        u = np.zeros((5, 4))
        v = np.zeros((4, 5))
        u[[0, -1]] = 3.0
        v[:, [0, -1]] = -2.0
        s = MacState(np.full((4, 4), 1.5), u, v)
        np.testing.assert_array_equal(step_mass(s, 0.1, g).rho, 1.5)

    def test_velocity_override(self):
        g = build_mac_grid([0, 1], [0, 1])
        s = MacState(np.ones((1, 1)), np.zeros((2, 1)), np.zeros((1, 2)))
        new_u = np.ones((2, 1))
        assert step_mass(s, 0.1, g, velocity=(new_u, s.v)).u is new_u

    def test_state_json(self):
        g = build_mac_grid([0, 1], [0, 1])
        s = MacState(np.ones((1, 1)), np.zeros((2, 1)), np.zeros((1, 2)))
        assert json.loads(s.to_json(g))["rho"] == [1.0]


class TestTestFunction:
    def test_derivatives_match_finite_differences(self):
        phi = separable_test_function((0.5, 0.5), 0.3, 0.4)
        x, y, t, e = 0.6, 0.45, 0.1, 1e-6
        assert phi.dx_phi(x, y, t) == pytest.approx(
            (phi.phi(x + e, y, t) - phi.phi(x - e, y, t)) / (2 * e), rel=1e-6)
        assert phi.dy_phi(x, y, t) == pytest.approx(
            (phi.phi(x, y + e, t) - phi.phi(x, y - e, t)) / (2 * e), rel=1e-6)
        assert phi.dt_phi(x, y, t) == pytest.approx(
            (phi.phi(x, y, t + e) - phi.phi(x, y, t - e)) / (2 * e), rel=1e-6)

    def test_support(self):
        phi = separable_test_function((0.5, 0.5), 0.3, 0.4)
        assert phi.phi(0.85, 0.5, 0.0) == 0.0
        assert phi.phi(0.5, 0.5, 0.45) == 0.0
        assert phi.phi(0.5, 0.5, 0.0) == 1.0


class TestWeakForm:
    def test_zero_for_exact_transport(self):
        # rho(x, y, t) = g(x - c t, y) solves the mass equation for u = (c, 0)
        c = 0.5

        def rho(x, y, t):
            return 1 + np.sin(2 * np.pi * (x - c * t)) * np.cos(np.pi * y)

        def vel(x, y, t):
            return c + 0 * x, 0 * x

        phi = separable_test_function((0.5, 0.5), 0.3, 0.4)
        g = build_mac_grid(np.linspace(0, 1, 41), np.linspace(0, 1, 41))
        val = weak_form_value(rho, vel, phi, lambda x, y: rho(x, y, 0.0), g,
                              TimeGrid(0.5, 40))
        assert abs(val) < 1e-7

    def test_rest_state_gives_zero(self):
        phi = separable_test_function((0.5, 0.5), 0.3, 0.4)
        g = build_mac_grid(np.linspace(0, 1, 21), np.linspace(0, 1, 21))
        val = weak_form_value(lambda x, y, t: 1 + 0 * x, lambda x, y, t: (0 * x, 0 * x),
                              phi, lambda x, y: 1 + 0 * x, g, TimeGrid(0.5, 20))
        assert abs(val) < 1e-10

    def test_constant_fields_lw_small(self):
        phi = separable_test_function((0.5, 0.5), 0.3, 0.4)
        g = random_grid(16, 2)
        tg = TimeGrid(0.5, 40)
        rho = np.full((tg.N + 1, 16, 16), 2.0)
        vel = [(np.full((17, 16), 0.3), np.full((16, 17), -0.2))] * tg.N
        assert abs(lw_functional(rho, vel, phi, g, tg)) < 1e-12

    def test_scheme_history_has_zero_lw(self):
        rho, velocity, rho0, phi = mac_lw_fields()
        g = random_grid(16, 9)
        tg = TimeGrid.from_max_step(0.5, 0.4 * g.min_side)
        _, vel, scheme = mac_histories(g, tg, rho, velocity, rho0)
        assert abs(lw_functional(scheme, vel, phi, g, tg)) <= 1e-12

    def test_zero_test_function_gives_zero(self):
        rho, velocity, rho0, _ = mac_lw_fields()
        phi = separable_test_function((0.5, 0.5), 0.3, 0.4)
        zero = type(phi)(*(lambda x, y, t: 0 * x for _ in range(4)))
        g = random_grid(8, 1)
        tg = TimeGrid(0.5, 10)
        sampled, vel, _ = mac_histories(g, tg, rho, velocity, rho0)
        assert lw_functional(sampled, vel, zero, g, tg) == 0.0

    def test_history_length_checked(self):
        g = build_mac_grid([0, 1], [0, 1])
        phi = separable_test_function((0.5, 0.5), 0.3, 0.4)
        with pytest.raises(ValueError):
            lw_functional(np.ones((2, 1, 1)), [], phi, g, TimeGrid(1.0, 4))

    def test_lw_gap_shrinks_under_refinement(self):
        rho, velocity, rho0, phi = mac_lw_fields()
        ref = build_mac_grid(np.linspace(0, 1, 49), np.linspace(0, 1, 49))
        weak = weak_form_value(rho, velocity, phi, rho0, ref, TimeGrid(0.5, 30))
        gaps = []
        for g in mac_grid_sequence(2, 0):
            tg = TimeGrid.from_max_step(0.5, 0.4 * g.min_side)
            sampled, vel, _ = mac_histories(g, tg, rho, velocity, rho0)
            gaps.append(abs(lw_functional(sampled, vel, phi, g, tg) - weak))
        assert gaps[1] < 0.7 * gaps[0]


def test_sample_state_shapes():
    rho, velocity, _, _ = mac_lw_fields()
    g = random_grid(6, 4)
    s = sample_state(rho, velocity, g, 0.1, 3)
    s.check(g)
    assert s.n == 3
    assert math.isfinite(s.mass(g))
