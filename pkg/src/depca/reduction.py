"""Triangular cascade solver.

When A and B triangularize simultaneously, the transformed system decouples
from the bottom row up: each level is a scalar hybrid equation whose
inhomogeneity aggregates the already-solved levels (their continuous values
and their integer samples), so the cascade is solved from the last row to
the first and mapped back through the basis change.  Levels are solved on
nested windows sized so every truncated series only reads data where the
lower level is valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import signals as sig
from .depca_engine import (
    DepcaSystem,
    HybridTrajectory,
    TrajectoryDiagnostics,
    ode_residual_check,
    solve_bounded_depca,
)
from .difference_engine import truncation_radius
from .errors import EigenConditionFailError, ResidualCheckError
from .matrix_core import (
    EigenConditionCheck,
    _phi1,
    as_square_matrix,
    check_eigenvalue_condition,
    mat_norm,
    simultaneous_triangularize,
)
from .tolerances import DEFAULT, Tolerances


def scalar_companion(alpha: complex, beta: complex) -> complex:
    """c = e^alpha + beta (e^alpha - 1)/alpha, continuously 1 + beta at 0."""
    return complex(np.exp(alpha) + beta * _phi1(complex(alpha)))


@dataclass(frozen=True)
class TriangularCascade:
    """Joint triangularization plus the per-level scalar data."""

    transform: np.ndarray
    a_upper: np.ndarray
    b_upper: np.ndarray
    forcing_components: tuple[sig.Signal, ...]
    diagonal_pairs: tuple[tuple[complex, complex], ...]
    eigen_checks: tuple[EigenConditionCheck, ...]

    @property
    def dimension(self) -> int:
        return self.transform.shape[0]


def build_cascade(system: DepcaSystem, user_t=None,
                  tols: Tolerances = DEFAULT) -> TriangularCascade:
    """Triangularize (A, B), transform the forcing, and vet every
    diagonal eigenvalue pair against the invertibility condition."""
    t, a_upper, b_upper = simultaneous_triangularize(system.a, system.b,
                                                     user_t, tols)
    t_inv = np.linalg.inv(t)
    transformed = sig.linear_map(t_inv, system.forcing)
    components = tuple(sig.component(transformed, i)
                       for i in range(system.dimension))

    pairs = []
    checks = []
    for i in range(system.dimension):
        alpha = complex(a_upper[i, i])
        beta = complex(b_upper[i, i])
        check = check_eigenvalue_condition(alpha, beta, tols)
        if not check.passed:
            raise EigenConditionFailError(i, float(check.u_star))
        pairs.append((alpha, beta))
        checks.append(check)

    return TriangularCascade(t, a_upper, b_upper, components,
                             tuple(pairs), tuple(checks))


def solve_scalar_depca(alpha: complex, beta: complex, z: sig.Signal,
                       n0: int, n1: int, tol: float,
                       tols: Tolerances = DEFAULT) -> HybridTrajectory:
    """Bounded solution of y' = alpha y + beta y([t]) + z(t).

    Delegates to the hybrid solver with 1x1 matrices; the companion
    coefficient must stay off the unit circle (NoDichotomyError otherwise).
    """
    system = DepcaSystem.build(np.array([[alpha]]), np.array([[beta]]), z)
    return solve_bounded_depca(system, n0, n1, tol, tols=tols)


@dataclass(frozen=True)
class LevelTrace:
    index: int
    alpha: complex
    beta: complex
    companion: complex
    window: tuple[int, int]
    sup_samples: float


@dataclass(frozen=True)
class CascadeTrace:
    transform: np.ndarray
    levels: tuple[LevelTrace, ...]


def _window_margins(cascade: TriangularCascade, sup_h: list[float],
                    tol: float, tols: Tolerances) -> list[int]:
    """Per-level window padding, from a-priori sup and truncation estimates.

    Level i's series reaches ``radius_i`` beyond its own window into the
    aggregated inhomogeneity, which reads level j > i; the margins therefore
    accumulate upward.  All sups here are conservative overestimates (they
    only enter logarithmically).
    """
    p = cascade.dimension
    sup_z = [0.0] * p
    sup_y = [0.0] * p
    radius = [1] * p
    for i in range(p - 1, -1, -1):
        agg = sup_h[i]
        for j in range(i + 1, p):
            agg += (abs(cascade.a_upper[i, j]) + abs(cascade.b_upper[i, j])) * sup_y[j]
        sup_z[i] = agg
        alpha, beta = cascade.diagonal_pairs[i]
        c = scalar_companion(alpha, beta)
        rate = tols.alpha_safety * abs(math.log(abs(c)))
        k_est = tols.k_headroom
        # max(sup, 1) also covers the zero-forcing probe inside solve_bounded
        radius[i] = truncation_radius(rate, k_est, max(sup_z[i], 1.0), tol)
        factor = k_est * (1.0 + math.exp(-rate)) / (1.0 - math.exp(-rate))
        disc = factor * sup_z[i]
        amp = math.exp(abs(alpha.real)) * (1.0 + abs(beta))
        sup_y[i] = disc * amp + sup_z[i] * math.exp(abs(alpha.real))

    margins = [0] * p
    acc = 0
    for i in range(1, p):
        acc += radius[i - 1] + 2
        margins[i] = acc
    return margins


def solve_by_reduction(system: DepcaSystem, user_t=None, n0: int = 0,
                       n1: int = 1, tol: float = 1e-9,
                       tols: Tolerances = DEFAULT) -> HybridTrajectory:
    """Solve the hybrid system through its triangular cascade.

    Builds the cascade, solves the bottom scalar level on the widest window,
    forms each aggregated inhomogeneity from the solved levels (continuous
    part from segment evaluators, [t]-part from integer samples), solves
    upward, and maps back x = T y.  The result carries a cascade trace and
    passes the same continuity/residual verification as the direct solver.
    """
    if n0 >= n1:
        raise ValueError("need n0 < n1")
    cascade = build_cascade(system, user_t, tols)
    p = cascade.dimension
    t_mat = cascade.transform

    sup_h = [max(comp.sup_bound(), 1e-30) for comp in cascade.forcing_components]
    margins = _window_margins(cascade, sup_h, tol, tols)

    solved: dict[int, HybridTrajectory] = {}
    for i in range(p - 1, -1, -1):
        lo, hi = n0 - margins[i], n1 + margins[i]
        z_i = _aggregate_inhomogeneity(cascade, i, solved)
        alpha, beta = cascade.diagonal_pairs[i]
        solved[i] = solve_scalar_depca(alpha, beta, z_i, lo, hi, tol, tols)

    samples = {
        n: t_mat @ np.array([solved[i].integer_samples[n][0] for i in range(p)])
        for n in range(n0, n1 + 1)
    }

    def segment(n: int, t: float) -> np.ndarray:
        y = np.array([solved[i].evaluate(t)[0] for i in range(p)])
        return t_mat @ y

    traj = HybridTrajectory(n0, n1, p, samples, segment)
    traj.cascade = CascadeTrace(
        t_mat,
        tuple(
            LevelTrace(i, *cascade.diagonal_pairs[i],
                       scalar_companion(*cascade.diagonal_pairs[i]),
                       solved[i].window, solved[i].sup_samples())
            for i in range(p)
        ),
    )

    level_cont = max(solved[i].diagnostics.continuity_max for i in range(p))
    continuity = mat_norm(t_mat) * level_cont
    residual_max, residual_tol = ode_residual_check(traj, system, 7, tols)
    if residual_max > residual_tol:
        raise ResidualCheckError(
            f"cascade trajectory residual {residual_max:.3e} exceeds "
            f"{residual_tol:.3e}"
        )
    traj.diagnostics = TrajectoryDiagnostics(
        continuity_max=continuity,
        continuity_tol=10.0 * tol * mat_norm(t_mat),
        recursion_residual=max(solved[i].diagnostics.recursion_residual
                               for i in range(p)),
        residual_max=residual_max,
        residual_tol=residual_tol,
        certificate=None,
        sup_samples=traj.sup_samples(),
    )
    return traj


def _aggregate_inhomogeneity(cascade: TriangularCascade, i: int,
                             solved: dict[int, HybridTrajectory]) -> sig.Signal:
    """z_i(t) = sum_{j>i} (a_ij y_j(t) + b_ij y_j([t])) + h_i(t).

    Solved components enter as evaluator-backed signals: z_i jumps exactly
    where y_j([t]) does (the integers), so it stays piecewise continuous
    with lateral limits, which is all the scalar solver needs.
    """
    h_i = cascade.forcing_components[i]
    p = cascade.dimension
    upper = [(j, complex(cascade.a_upper[i, j]), complex(cascade.b_upper[i, j]))
             for j in range(i + 1, p)
             if abs(cascade.a_upper[i, j]) + abs(cascade.b_upper[i, j]) > 0.0]
    if not upper:
        return h_i

    def fn(t: float) -> np.ndarray:
        val = h_i.evaluate(t).astype(complex)
        n = math.floor(t)
        for j, a_ij, b_ij in upper:
            y_j = solved[j]
            val = val + a_ij * y_j.evaluate(t) + b_ij * y_j.integer_samples[min(n, y_j.n1)]
        return val

    sup_hint = h_i.sup_bound() + sum(
        (abs(a_ij) + abs(b_ij)) * solved[j].sup_samples() * 10.0
        for j, a_ij, b_ij in upper
    )
    return sig.CallableSignal(fn, 1, sup_hint, h_i.breakpoints_in)
