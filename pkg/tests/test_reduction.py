"""Tests for the triangular cascade solver."""

import numpy as np
import pytest

from depca import signals as sig
from depca.depca_engine import DepcaSystem, solve_bounded_depca
from depca.errors import EigenConditionFailError, NoDichotomyError
from depca.reduction import (
    build_cascade,
    scalar_companion,
    solve_by_reduction,
    solve_scalar_depca,
)

A_TRI = np.array([[-1.0, 1.0], [0.0, -2.0]])
B_TRI = np.array([[-0.5, 0.0], [0.0, -0.25]])


def forcing_2d():
    return sig.Sum.of(
        sig.TrigPolynomial.cosine([1.0, 0.0], 2 * np.pi),
        sig.TrigPolynomial.constant([0.0, 1.0]),
    )


class TestScalarCompanion:
    def test_zero_alpha_limit(self):
        assert scalar_companion(0.0, -0.5) == pytest.approx(0.5)

    def test_pure_alpha(self):
        assert scalar_companion(np.log(2.0), 0.0) == pytest.approx(2.0)

    def test_general(self):
        alpha, beta = -1.0, -0.5
        expected = np.exp(alpha) + beta * (np.exp(alpha) - 1.0) / alpha
        assert scalar_companion(alpha, beta) == pytest.approx(expected)


class TestBuildCascade:
    def test_diagonal_pair_decouples(self):
        system = DepcaSystem.build(np.diag([-1.0, -2.0]), np.diag([-0.5, -0.25]),
                                   forcing_2d())
        cascade = build_cascade(system)
        np.testing.assert_allclose(cascade.transform, np.eye(2))
        assert cascade.diagonal_pairs == ((-1 + 0j, -0.5 + 0j), (-2 + 0j, -0.25 + 0j))

    def test_triangular_pair_read_off(self):
        system = DepcaSystem.build(A_TRI, B_TRI, forcing_2d())
        cascade = build_cascade(system)
        np.testing.assert_allclose(cascade.transform, np.eye(2))
        np.testing.assert_allclose(cascade.a_upper, A_TRI)
        np.testing.assert_allclose(cascade.b_upper, B_TRI)
        # transformed forcing components are the originals
        for i in range(2):
            comp = cascade.forcing_components[i]
            for t in (-0.4, 0.9):
                np.testing.assert_allclose(comp.evaluate(t),
                                           [forcing_2d().evaluate(t)[i]],
                                           atol=1e-14)

    def test_eigen_condition_failure_surfaces(self):
        system = DepcaSystem.build(np.array([[0.0]]), np.array([[-1.0]]),
                                   sig.TrigPolynomial.constant([1.0]))
        with pytest.raises(EigenConditionFailError) as err:
            build_cascade(system)
        assert err.value.index == 0
        assert err.value.u_star == pytest.approx(1.0, abs=1e-10)


class TestSolveScalar:
    def test_fixed_point_with_zero_alpha(self):
        # c = 0.5, h = 1: discrete fixed point 2 = 0.5 * 2 + 1, and the
        # segment formula keeps x(t) = 2 between integers as well
        z = sig.TrigPolynomial.constant([1.0])
        traj = solve_scalar_depca(0.0, -0.5, z, -8, 8, 1e-10)
        for n in range(-8, 9):
            np.testing.assert_allclose(traj.integer_samples[n], [2.0], atol=1e-9)
        for t in (-3.3, 0.25, 4.75):
            np.testing.assert_allclose(traj.evaluate(t), [2.0], atol=1e-9)

    def test_zero_forcing(self):
        z = sig.TrigPolynomial.constant([0.0])
        traj = solve_scalar_depca(0.0, -0.5, z, -5, 5, 1e-10)
        assert traj.sup_samples() <= 1e-12

    def test_unstable_anticausal_value(self):
        # c = 2, h = int_0^1 e^{ln2 (1-s)} ds = 1/ln 2; x = -h/(c-1) = -1/ln 2
        z = sig.TrigPolynomial.constant([1.0])
        traj = solve_scalar_depca(np.log(2.0), 0.0, z, -5, 5, 1e-10)
        expected = -1.0 / np.log(2.0)
        for n in range(-5, 6):
            np.testing.assert_allclose(traj.integer_samples[n], [expected],
                                       atol=1e-9)

    def test_unit_circle_refused(self):
        z = sig.TrigPolynomial.constant([1.0])
        with pytest.raises(NoDichotomyError):
            solve_scalar_depca(0.0, 0.0, z, -3, 3, 1e-9)


class TestSolveByReduction:
    def test_zero_forcing_diagonal(self):
        system = DepcaSystem.build(np.diag([-1.0, -2.0]), np.diag([-0.5, -0.25]),
                                   sig.TrigPolynomial.constant([0.0, 0.0]))
        traj = solve_by_reduction(system, None, -4, 4, 1e-9)
        assert traj.sup_samples() <= 1e-10

    def test_matches_direct_solver(self):
        tol = 1e-9
        system = DepcaSystem.build(A_TRI, B_TRI, forcing_2d())
        direct = solve_bounded_depca(system, -6, 6, tol)
        red = solve_by_reduction(system, None, -6, 6, tol)
        for n in range(-6, 7):
            np.testing.assert_allclose(red.integer_samples[n],
                                       direct.integer_samples[n], atol=10 * tol)
        ts = np.linspace(-5.9, 5.9, 119)
        np.testing.assert_allclose(red.evaluate_grid(ts),
                                   direct.evaluate_grid(ts), atol=10 * tol)

    def test_scalar_reduction_equals_direct_exactly(self):
        tol = 1e-9
        system = DepcaSystem.build(np.array([[0.0]]), np.array([[-0.5]]),
                                   sig.TrigPolynomial.cosine([1.0], 2 * np.pi))
        direct = solve_bounded_depca(system, -4, 4, tol)
        red = solve_by_reduction(system, None, -4, 4, tol)
        for n in range(-4, 5):
            np.testing.assert_allclose(red.integer_samples[n],
                                       direct.integer_samples[n], atol=1e-14)

    def test_basis_rescaling_invariance(self):
        tol = 1e-9
        system = DepcaSystem.build(A_TRI, B_TRI, forcing_2d())
        base = solve_by_reduction(system, None, -5, 5, tol)
        scaled = solve_by_reduction(system, np.diag([2.0, 0.5]), -5, 5, tol)
        for n in range(-5, 6):
            np.testing.assert_allclose(scaled.integer_samples[n],
                                       base.integer_samples[n], atol=5 * tol)

    def test_cascade_trace_contents(self):
        system = DepcaSystem.build(A_TRI, B_TRI, forcing_2d())
        traj = solve_by_reduction(system, None, -5, 5, 1e-9)
        trace = traj.cascade
        assert len(trace.levels) == 2
        c0 = scalar_companion(-1.0, -0.5)
        c1 = scalar_companion(-2.0, -0.25)
        assert trace.levels[0].companion == pytest.approx(c0)
        assert trace.levels[1].companion == pytest.approx(c1)
        # lower level solved on a strictly wider window
        assert trace.levels[1].window[0] < trace.levels[0].window[0]

    def test_levels_pass_residual_checks(self):
        system = DepcaSystem.build(A_TRI, B_TRI, forcing_2d())
        traj = solve_by_reduction(system, None, -5, 5, 1e-9)
        d = traj.diagnostics
        assert d.residual_max <= d.residual_tol
        assert d.continuity_max <= d.continuity_tol


class TestAggregatedInhomogeneity:
    def test_jump_only_at_integers(self):
        # B-coupling plus non-integer-periodic forcing: the trajectory stays
        # continuous but its derivative jumps at integers by B (x(n) - x(n-1))
        b_coupled = np.array([[-0.5, 0.3], [0.0, -0.25]])
        f = sig.Sum.of(sig.TrigPolynomial.cosine([1.0, 0.0], 1.0),
                       sig.TrigPolynomial.constant([0.0, 1.0]))
        system = DepcaSystem.build(A_TRI, b_coupled, f)
        traj = solve_by_reduction(system, None, -4, 4, 1e-9)
        assert traj.diagnostics.residual_max <= traj.diagnostics.residual_tol
        eps = 1e-9
        for n in (-1, 0, 2):
            jump = np.max(np.abs(traj.evaluate(n + eps) - traj.evaluate(n - eps)))
            interior = np.max(np.abs(traj.evaluate(n + 0.5 + eps)
                                     - traj.evaluate(n + 0.5 - eps)))
            assert jump <= 1e-6
            assert interior <= 1e-6

        def slope(t):
            return (traj.evaluate(t + 1e-6) - traj.evaluate(t - 1e-6)) / 2e-6

        expected_jump = system.b @ (traj.integer_samples[1]
                                    - traj.integer_samples[0])
        got_jump = slope(1.0 + 1e-5) - slope(1.0 - 1e-5)
        assert np.max(np.abs(expected_jump)) > 1e-3
        np.testing.assert_allclose(got_jump, expected_jump, atol=1e-3)
