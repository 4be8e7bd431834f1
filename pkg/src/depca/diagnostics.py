"""Finite-window numeric screens for periodicity and almost periodicity.

None of these certify a function class: they sample deviations on explicit
windows and grids (recorded in every report) and straddle the integers,
where the objects of interest are allowed to jump.  Random sampling uses a
fixed default seed, also recorded, so reports reproduce exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import WindowTooSmallError

DEFAULT_SEED = 1729
_STRADDLE = 1e-9


def _window_of(target, window) -> tuple[float, float]:
    if window is not None:
        a, b = window
        return float(a), float(b)
    if hasattr(target, "n0"):
        return float(target.n0), float(target.n1)
    raise ValueError("a (a, b) window is required for signal targets")


def _grid_with_straddles(a: float, b: float, step: float) -> np.ndarray:
    ts = list(np.arange(a, b, step))
    ts.append(b)
    for n in range(math.ceil(a), math.floor(b) + 1):
        for t in (n - _STRADDLE, n + _STRADDLE):
            if a <= t <= b:
                ts.append(t)
    return np.unique(np.asarray(ts, dtype=float))


@dataclass(frozen=True)
class PeriodicityVerdict:
    passed: bool
    deviation: float
    period: tuple[int, int]
    period_value: float
    tol: float
    window: tuple[float, float]
    grid_points: int

    def __str__(self) -> str:
        state = "pass" if self.passed else "fail"
        return (f"periodicity at {self.period[0]}/{self.period[1]}: {state} "
                f"(sup deviation {self.deviation:.3e}, tol {self.tol:.1e})")


def periodicity_check(target, period: tuple[int, int], tol: float,
                      window: tuple[float, float] | None = None,
                      grid_step: float = 1e-3) -> PeriodicityVerdict:
    """sup over a straddled grid of |x(t + p0/q0) - x(t)| versus tol.

    The grid also straddles the integers shifted by the period so both
    lateral limits of x(t + period) are probed.
    """
    p0, q0 = int(period[0]), int(period[1])
    if q0 <= 0 or p0 <= 0:
        raise ValueError("period must be a pair of positive integers")
    omega = p0 / q0
    a, b = _window_of(target, window)
    if b - a < 2.0 * omega:
        raise WindowTooSmallError(
            f"window [{a}, {b}] does not cover two periods of {omega:.6g}"
        )

    ts = list(_grid_with_straddles(a, b - omega, grid_step))
    # straddles of t + period back-shifted onto the base grid
    for n in range(math.ceil(a + omega), math.floor(b) + 1):
        for t in (n - omega - _STRADDLE, n - omega + _STRADDLE):
            if a <= t <= b - omega:
                ts.append(t)
    grid = np.unique(np.asarray(ts))

    base = target.evaluate_grid(grid)
    shifted = target.evaluate_grid(grid + omega)
    deviation = float(np.max(np.abs(shifted - base))) if grid.size else 0.0
    return PeriodicityVerdict(deviation < tol, deviation, (p0, q0), omega,
                              tol, (a, b), int(grid.size))


@dataclass(frozen=True)
class AlmostPeriodReport:
    epsilon: float
    tested_shifts: tuple[float, ...]
    passing_shifts: tuple[float, ...]
    deviations: tuple[float, ...]
    window_radius: float
    grid_step: float
    relative_density: float

    def __str__(self) -> str:
        return (f"{len(self.passing_shifts)}/{len(self.tested_shifts)} shifts "
                f"pass at eps = {self.epsilon:.3g} "
                f"(density {self.relative_density:.3f}, window "
                f"{self.window_radius}, grid {self.grid_step})")


def almost_period_scan(target, epsilon: float, shift_range: int,
                       integer_shifts_only: bool = True,
                       window: tuple[float, float] | None = None,
                       grid_step: float = 1e-2,
                       real_shift_step: float = 0.1) -> AlmostPeriodReport:
    """Scan candidate shifts for eps-almost-periods on a finite window.

    Integer shifts honor the integer-restricted shift structure of the
    signal classes at play; the real grid is available for comparison.
    Trajectory targets shrink the sampled window so t and t + s both stay
    inside the solved range.
    """
    if shift_range < 1:
        raise ValueError("shift_range must be at least 1")
    a, b = _window_of(target, window)
    if integer_shifts_only:
        shifts = [float(s) for s in range(-shift_range, shift_range + 1)]
    else:
        shifts = list(np.arange(-shift_range, shift_range + real_shift_step / 2,
                                real_shift_step))

    tested: list[float] = []
    passing: list[float] = []
    deviations: list[float] = []
    bounded_target = hasattr(target, "n0")
    for s in shifts:
        lo, hi = a, b
        if bounded_target:
            lo, hi = max(a, a - s), min(b, b - s)
            if hi - lo < 1.0:
                continue
        ts = _grid_with_straddles(lo, hi, grid_step)
        dev = float(np.max(np.abs(target.evaluate_grid(ts + s)
                                  - target.evaluate_grid(ts))))
        tested.append(s)
        deviations.append(dev)
        if dev < epsilon:
            passing.append(s)

    density = len(passing) / len(tested) if tested else 0.0
    return AlmostPeriodReport(epsilon, tuple(tested), tuple(passing),
                              tuple(deviations), float(max(abs(a), abs(b))),
                              grid_step, density)


@dataclass(frozen=True)
class ShiftLimitReport:
    probe_points: tuple[float, ...]
    deviations: tuple[float, ...]
    tail_start: int
    max_deviation: float

    def __str__(self) -> str:
        return (f"shift-limit Cauchy screen: max deviation "
                f"{self.max_deviation:.3e} over tail from index {self.tail_start}")


def shift_limit_probe(f, shifts, probe_points) -> ShiftLimitReport:
    """Cauchy screen for pointwise shift limits along a shift sequence.

    For each probe t, reports the largest pairwise deviation of f(t + s)
    over the last half of the shift list; small values are consistent with
    the pointwise limits existing along the sequence.
    """
    shifts = [int(s) for s in shifts]
    if not shifts:
        raise ValueError("need a nonempty shift sequence")
    tail_start = len(shifts) // 2
    tail = shifts[tail_start:]
    devs = []
    for t in probe_points:
        vals = [f.evaluate(float(t) + s) for s in tail]
        worst = 0.0
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                worst = max(worst, float(np.max(np.abs(vals[i] - vals[j]))))
        devs.append(worst)
    return ShiftLimitReport(tuple(float(t) for t in probe_points), tuple(devs),
                            tail_start, max(devs) if devs else 0.0)


@dataclass(frozen=True)
class LipschitzVerdict:
    passed: bool
    claim: float
    worst_violation: float
    samples: int
    seed: int

    def __str__(self) -> str:
        state = "pass" if self.passed else "fail"
        return (f"Lipschitz claim {self.claim:.6g}: {state} (worst violation "
                f"{self.worst_violation:.3e}, {self.samples} pairs, seed {self.seed})")


def lipschitz_probe(traj, m0_claim: float, samples: int = 10000,
                    seed: int = DEFAULT_SEED) -> LipschitzVerdict:
    """Random-pair screen of |x(t) - x(s)| <= M0 |t - s| on the window."""
    if samples < 100:
        raise ValueError("need at least 100 sample pairs")
    rng = np.random.default_rng(seed)
    a, b = float(traj.n0), float(traj.n1)
    ts = rng.uniform(a, b, samples)
    ss = rng.uniform(a, b, samples)
    xt = traj.evaluate_grid(ts)
    xs = traj.evaluate_grid(ss)
    gaps = np.max(np.abs(xt - xs), axis=1)
    allowed = m0_claim * np.abs(ts - ss) + 1e-9
    violations = gaps - allowed
    worst = float(np.max(violations))
    return LipschitzVerdict(worst <= 0.0, m0_claim, max(worst, 0.0),
                            samples, seed)
