"""Command-line front end.

Reads a JSON config describing the system, forcing, and solve window; runs
one of the solve / verify / reduce / dichotomy / scan workflows; writes the
trajectory as CSV and a report with a machine-parsable ``KEY = value``
section.  Exit codes: 0 pass, 2 ran-and-refuted, 1 could-not-run.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from . import signals as sig
from .depca_engine import (
    DepcaSystem,
    check_propagator_invertibility,
    reduce_to_difference,
    solve_bounded_depca,
)
from .difference_engine import (
    DichotomyCertificate,
    DifferenceSystem,
    bound_check,
    build_fundamental,
    certify_constant,
    verify_certificate,
)
from .errors import (
    ConfigError,
    ContinuityBreachError,
    DepcaError,
    ParseError,
    ResidualCheckError,
    ValidationError,
)
from .matrix_core import mat_norm
from .reduction import solve_by_reduction

MODES = ("solve", "verify", "reduce", "dichotomy", "scan")


# ---------------------------------------------------------------------------
# config parsing


def _require(block: dict, key: str, path: str):
    if key not in block:
        raise ValidationError(f"{path}.{key}", "missing required field")
    return block[key]


def _as_int(x, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or x != int(x):
        raise ValidationError(path, f"expected an integer, got {x!r}")
    return int(x)


def _as_number(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValidationError(path, f"expected a number, got {x!r}")
    return float(x)


def _as_complex(x, path: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2:
        return complex(_as_number(x[0], path), _as_number(x[1], path))
    raise ValidationError(path, "expected a number or a [re, im] pair")


def _as_matrix(x, path: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        raise ValidationError(path, "expected an array of row arrays")
    rows = len(x)
    if any(len(r) != rows for r in x):
        raise ValidationError(path, "matrix must be square")
    if dim is not None and rows != dim:
        raise ValidationError(path, f"expected dimension {dim}, got {rows}")
    try:
        return np.array([[_as_number(v, path) for v in r] for r in x])
    except ValidationError:
        raise
    except Exception as exc:
        raise ValidationError(path, str(exc)) from exc


def _as_vector(x, path: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(x, list):
        raise ValidationError(path, "expected an array")
    vec = np.array([_as_complex(v, f"{path}[{i}]") for i, v in enumerate(x)])
    if dim is not None and vec.shape[0] != dim:
        raise ValidationError(path, f"expected length {dim}, got {vec.shape[0]}")
    return vec


def build_signal(spec, dimension: int, path: str = "forcing") -> sig.Signal:
    """Construct a signal from its config tree."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError(path, "expected an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "constant":
        return sig.TrigPolynomial.constant(
            _as_vector(_require(spec, "value", path), f"{path}.value", dimension))
    if kind in ("cos", "sin", "exponential"):
        coef = _as_vector(_require(spec, "coefficient", path),
                          f"{path}.coefficient", dimension)
        omega = _as_number(_require(spec, "omega", path), f"{path}.omega")
        maker = {"cos": sig.TrigPolynomial.cosine, "sin": sig.TrigPolynomial.sine,
                 "exponential": sig.TrigPolynomial.exponential}[kind]
        return maker(coef, omega)
    if kind == "trig":
        terms = _require(spec, "terms", path)
        if not isinstance(terms, list) or not terms:
            raise ValidationError(f"{path}.terms", "expected a nonempty array")
        built = []
        for i, term in enumerate(terms):
            coef = _as_vector(_require(term, "coefficient", f"{path}.terms[{i}]"),
                              f"{path}.terms[{i}].coefficient", dimension)
            freq = _as_number(_require(term, "frequency", f"{path}.terms[{i}]"),
                              f"{path}.terms[{i}].frequency")
            built.append((coef, freq))
        return sig.TrigPolynomial.from_terms(built, dimension)
    if kind == "step":
        values = _require(spec, "values", path)
        if not isinstance(values, list) or not values:
            raise ValidationError(f"{path}.values", "expected a nonempty array")
        vecs = [_as_vector(v, f"{path}.values[{i}]", dimension)
                for i, v in enumerate(values)]
        return sig.StepOfSequence.from_periodic_values(vecs)
    if kind == "rational_periodic":
        p0 = _as_int(_require(spec, "p0", path), f"{path}.p0")
        q0 = _as_int(_require(spec, "q0", path), f"{path}.q0")
        if p0 <= 0 or q0 <= 0:
            raise ValidationError(path, "p0 and q0 must be positive")
        samples = _require(spec, "samples", path)
        vecs = [_as_vector(v, f"{path}.samples[{i}]", dimension)
                for i, v in enumerate(samples)]
        return sig.RationalPeriodic.from_samples(p0, q0, vecs)
    if kind == "aa_test":
        return sig.AATest.from_amplitude(
            _as_vector(_require(spec, "amplitude", path), f"{path}.amplitude",
                       dimension))
    if kind == "sum":
        parts = _require(spec, "parts", path)
        if not isinstance(parts, list) or not parts:
            raise ValidationError(f"{path}.parts", "expected a nonempty array")
        return sig.Sum.of(*(build_signal(p, dimension, f"{path}.parts[{i}]")
                            for i, p in enumerate(parts)))
    if kind == "composite":
        outer = _require(spec, "outer", path)
        inner = build_signal(_require(spec, "inner", path), dimension,
                             f"{path}.inner")
        try:
            if isinstance(outer, str):
                return sig.compose(outer, inner)
            if isinstance(outer, dict):
                tag = _require(outer, "kind", f"{path}.outer")
                if tag == "affine":
                    return sig.compose(("affine",
                                        _as_number(_require(outer, "scale", f"{path}.outer"), f"{path}.outer.scale"),
                                        _as_number(_require(outer, "offset", f"{path}.outer"), f"{path}.outer.offset")),
                                       inner)
                if tag == "poly":
                    coeffs = _require(outer, "coeffs", f"{path}.outer")
                    return sig.compose(("poly", *coeffs), inner)
                raise ValidationError(f"{path}.outer", f"unsupported outer map {tag!r}")
        except ValueError as exc:
            raise ValidationError(f"{path}.outer", str(exc)) from exc
        raise ValidationError(f"{path}.outer", "expected a tag or an object")
    raise ValidationError(f"{path}.kind", f"unknown signal kind {kind!r}")


@dataclass
class RunConfig:
    """Validated run configuration (the forcing tree is kept verbatim so
    configs round-trip exactly)."""

    dimension: int
    a: np.ndarray
    b: np.ndarray
    forcing_spec: dict
    n0: int
    n1: int
    tol: float
    dt: float
    mode: str
    seed: int = diag.DEFAULT_SEED
    user_t: np.ndarray | None = None
    certificate: dict | None = None
    scan: dict | None = None
    period: tuple[int, int] | None = None
    output: dict = field(default_factory=dict)

    def forcing_signal(self) -> sig.Signal:
        return build_signal(self.forcing_spec, self.dimension)

    def system(self) -> DepcaSystem:
        return DepcaSystem.build(self.a, self.b, self.forcing_signal())

    def to_dict(self) -> dict:
        out = {
            "system": {
                "dimension": self.dimension,
                "A": [[float(v) for v in row] for row in self.a],
                "B": [[float(v) for v in row] for row in self.b],
            },
            "forcing": self.forcing_spec,
            "solve": {"n0": self.n0, "n1": self.n1, "tol": self.tol, "dt": self.dt},
            "mode": self.mode,
            "seed": self.seed,
            "output": dict(self.output),
        }
        if self.user_t is not None:
            out["userT"] = [[float(v) for v in row] for row in self.user_t]
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.scan is not None:
            out["scan"] = self.scan
        if self.period is not None:
            out["period"] = [self.period[0], self.period[1]]
        return out


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ValidationError("", "top level must be an object")
    system = _require(raw, "system", "")
    dim = _as_int(_require(system, "dimension", "system"), "system.dimension")
    if not 1 <= dim <= 16:
        raise ValidationError("system.dimension", "must be between 1 and 16")
    a = _as_matrix(_require(system, "A", "system"), "system.A", dim)
    b = _as_matrix(_require(system, "B", "system"), "system.B", dim)

    forcing_spec = _require(raw, "forcing", "")
    built = build_signal(forcing_spec, dim)
    if built.dimension != dim:
        raise ValidationError("forcing", f"signal dimension {built.dimension} "
                                         f"does not match system dimension {dim}")

    solve = _require(raw, "solve", "")
    n0 = _as_int(_require(solve, "n0", "solve"), "solve.n0")
    n1 = _as_int(_require(solve, "n1", "solve"), "solve.n1")
    if n0 >= n1:
        raise ValidationError("solve.n1", "need n0 < n1")
    tol = _as_number(_require(solve, "tol", "solve"), "solve.tol")
    if not 0.0 < tol < 1.0:
        raise ValidationError("solve.tol", "tol must lie in (0, 1)")
    dt = _as_number(solve.get("dt", 0.01), "solve.dt")
    if not 0.0 < dt <= 1.0:
        raise ValidationError("solve.dt", "dt must lie in (0, 1]")

    mode = raw.get("mode", "solve")
    if mode not in MODES:
        raise ValidationError("mode", f"must be one of {MODES}")

    seed = _as_int(raw.get("seed", diag.DEFAULT_SEED), "seed")
    user_t = None
    if "userT" in raw:
        user_t = _as_matrix(raw["userT"], "userT", dim)

    certificate = raw.get("certificate")
    if certificate is not None:
        _as_number(_require(certificate, "alpha", "certificate"), "certificate.alpha")
        _as_number(_require(certificate, "K", "certificate"), "certificate.K")
        _as_matrix(_require(certificate, "P", "certificate"), "certificate.P", dim)
        if "coefficients" in certificate:
            for i, c in enumerate(certificate["coefficients"]):
                _as_matrix(c, f"certificate.coefficients[{i}]", dim)

    scan = raw.get("scan")
    if scan is not None:
        _as_number(_require(scan, "epsilon", "scan"), "scan.epsilon")
        _as_int(_require(scan, "shift_range", "scan"), "scan.shift_range")

    period = None
    if "period" in raw:
        pr = raw["period"]
        if not isinstance(pr, list) or len(pr) != 2:
            raise ValidationError("period", "expected [p0, q0]")
        period = (_as_int(pr[0], "period[0]"), _as_int(pr[1], "period[1]"))
        if period[0] <= 0 or period[1] <= 0:
            raise ValidationError("period", "p0 and q0 must be positive")

    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ValidationError("output", "expected an object")

    return RunConfig(dim, a, b, forcing_spec, n0, n1, tol, dt, mode, seed,
                     user_t, certificate, scan, period, dict(output))


def parse_config(path) -> RunConfig:
    """Load and validate a config file."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    return config_from_dict(raw)


def emit_config(config: RunConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# artifacts


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return str(x)


def write_trajectory_csv(path: Path, traj, dt: float) -> None:
    """CSV with rows at step dt plus both-sided straddles of every integer."""
    ts = list(np.arange(traj.n0, traj.n1, dt))
    ts.append(float(traj.n1))
    for n in range(traj.n0, traj.n1 + 1):
        for t in (n - 1e-9, n + 1e-9):
            if traj.n0 <= t <= traj.n1:
                ts.append(t)
    grid = np.unique(np.asarray(ts))
    values = traj.evaluate_grid(grid)

    header = ["t"]
    for i in range(traj.dimension):
        header += [f"re_x{i + 1}", f"im_x{i + 1}"]
    lines = [",".join(header)]
    for t, row in zip(grid, values):
        cells = [_fmt(float(t))]
        for v in row:
            cells += [_fmt(float(v.real)), _fmt(float(v.imag))]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


class Report:
    """Human-readable report with a machine-parsable KEY = value section."""

    def __init__(self, title: str):
        self.title = title
        self.notes: list[str] = []
        self.entries: list[tuple[str, object]] = []

    def note(self, text: str) -> None:
        self.notes.append(text)

    def set(self, key: str, value) -> None:
        self.entries.append((key, value))

    def render(self) -> str:
        lines = [f"# {self.title}", ""]
        lines += self.notes
        if self.notes:
            lines.append("")
        lines += [f"{k} = {_fmt(v)}" for k, v in self.entries]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# workflows


def _solve_common(config: RunConfig, report: Report, reduce_mode: bool):
    system = config.system()
    if reduce_mode:
        traj = solve_by_reduction(system, config.user_t, config.n0, config.n1,
                                  config.tol)
    else:
        traj = solve_bounded_depca(system, config.n0, config.n1, config.tol)

    d = traj.diagnostics
    dense = traj.evaluate_grid(np.linspace(traj.n0, traj.n1,
                                           32 * (traj.n1 - traj.n0) + 1))
    report.set("sup_norm", float(np.max(np.abs(dense))))
    report.set("sup_integer_samples", traj.sup_samples())
    report.set("continuity_max", d.continuity_max)
    report.set("continuity_tol", d.continuity_tol)
    report.set("recursion_residual", d.recursion_residual)
    if d.residual_max is not None:
        report.set("residual_max", d.residual_max)
        report.set("residual_tol", d.residual_tol)
    if d.certificate is not None:
        cert = d.certificate
        report.set("alpha", cert.alpha)
        report.set("K", cert.K)
        bc = bound_check(
            np.stack([traj.integer_samples[n] for n in range(traj.n0, traj.n1 + 1)]),
            cert, _sup_discrete_forcing(system, config), slack=3 * config.tol)
        report.set("bound_certified", bc.certified_bound)
        report.set("bound_holds", bc.passed)
    return system, traj


def _sup_discrete_forcing(system: DepcaSystem, config: RunConfig) -> float:
    dsys = reduce_to_difference(system, min(0.05 * config.tol, 1e-11))
    sup = max(float(np.max(np.abs(dsys.h(n))))
              for n in range(config.n0 - 1, config.n1 + 1))
    return sup


def run(config: RunConfig, out_dir=".", quiet: bool = False) -> int:
    """Execute the configured workflow; returns the process exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = Report(f"depca {config.mode} report")
    report.set("mode", config.mode)
    report.set("dimension", config.dimension)
    report.set("window_n0", config.n0)
    report.set("window_n1", config.n1)
    report.set("tol", config.tol)
    report.set("seed", config.seed)
    exit_code = 0

    try:
        if config.mode in ("solve", "reduce"):
            system, traj = _solve_common(config, report, config.mode == "reduce")
            if config.mode == "reduce" and traj.cascade is not None:
                trace = traj.cascade
                report.note("cascade transform rows:")
                for i, row in enumerate(trace.transform):
                    report.note("  T[" + str(i) + "] = "
                                + " ".join(_fmt(complex(v)) for v in row))
                report.set("cascade_levels", len(trace.levels))
                for lv in trace.levels:
                    report.set(f"level_{lv.index}_c", lv.companion)
                    report.set(f"level_{lv.index}_sup", lv.sup_samples)
                    report.set(f"level_{lv.index}_window",
                               f"[{lv.window[0]},{lv.window[1]}]")
            if config.period is not None:
                verdict = diag.periodicity_check(traj, config.period,
                                                 tol=max(1e-6, 10 * config.tol))
                report.set("periodicity_pass", verdict.passed)
                report.set("periodicity_deviation", verdict.deviation)
                if not verdict.passed:
                    report.set("failed_invariant", "diagnostics.periodicity")
                    exit_code = 2
            csv_path = out / config.output.get("trajectory_csv",
                                               f"{config.mode}_trajectory.csv")
            write_trajectory_csv(csv_path, traj, config.dt)
            report.set("trajectory_csv", str(csv_path))

        elif config.mode == "verify":
            exit_code = _run_verify(config, report)

        elif config.mode == "dichotomy":
            exit_code = _run_dichotomy(config, report)

        elif config.mode == "scan":
            exit_code = _run_scan(config, report)

    except (ContinuityBreachError, ResidualCheckError) as exc:
        report.note(f"verification failure: {exc}")
        report.set("failed_invariant", "trajectory.verification")
        exit_code = 2

    report.set("exit", exit_code)
    report_path = out / config.output.get("report", f"{config.mode}_report.txt")
    report_path.write_text(report.render())
    if not quiet:
        sys.stdout.write(report.render())
    return exit_code


def _certificate_from_config(config: RunConfig, system: DepcaSystem):
    """(difference system, certificate) from the config's certificate block,
    deriving C from the hybrid reduction when no coefficients are given."""
    block = config.certificate
    alpha = float(block["alpha"])
    k_const = float(block["K"])
    proj = _as_matrix(block["P"], "certificate.P", config.dimension)

    def zero_h(n: int) -> np.ndarray:
        return np.zeros(config.dimension, dtype=complex)

    if "coefficients" in block:
        mats = [_as_matrix(c, "certificate.coefficients", config.dimension)
                for c in block["coefficients"]]
        dsys = DifferenceSystem.periodic(mats, zero_h)
        constant = None
    else:
        dsys = reduce_to_difference(system, min(0.05 * config.tol, 1e-11))
        constant = dsys.constant_coefficient
    cert = DichotomyCertificate(alpha, k_const, proj, build_fundamental(dsys),
                                constant)
    return dsys, cert


def _run_verify(config: RunConfig, report: Report) -> int:
    system = config.system()
    exit_code = 0
    if config.certificate is not None:
        dsys, cert = _certificate_from_config(config, system)
        window = int(config.certificate.get("window", 20))
        cert_report = verify_certificate(dsys, cert, window)
        report.note(str(cert_report))
        report.set("certificate_pass", cert_report.passed)
        report.set("worst_decay_margin", cert_report.worst_decay_margin)
        report.set("projection_defect", cert_report.projection_defect)
        if not cert_report.passed:
            report.set("failed_invariant", cert_report.failed_invariant)
            exit_code = 2
    else:
        zrep = check_propagator_invertibility(system)
        report.note(str(zrep))
        report.set("det_z_min", zrep.min_det)
        if not zrep.passed:
            report.set("failed_invariant", "propagator.invertibility")
            return 2
        _, traj = _solve_common(config, report, False)
        d = traj.diagnostics
        checks = {
            "trajectory.continuity": d.continuity_max <= d.continuity_tol,
            "trajectory.residual": (d.residual_max is None
                                    or d.residual_max <= d.residual_tol),
        }
        for name, ok in checks.items():
            if not ok:
                report.set("failed_invariant", name)
                exit_code = 2
        report.set("verify_pass", exit_code == 0)
    return exit_code


def _run_dichotomy(config: RunConfig, report: Report) -> int:
    system = config.system()
    if config.certificate is not None:
        dsys, cert = _certificate_from_config(config, system)
        window = int(config.certificate.get("window", 20))
        cert_report = verify_certificate(dsys, cert, window)
        passed = cert_report.passed
    else:
        dsys = reduce_to_difference(system, min(0.05 * config.tol, 1e-11))
        cert = certify_constant(dsys.constant_coefficient)
        cert_report = verify_certificate(dsys, cert, 20)
        passed = cert_report.passed

    green = cert.green_function()
    report.note("decay table: d, |G(d,0)|, K e^{-alpha|d|}")
    for d in range(-20, 21):
        actual = mat_norm(green(d, 0))
        bound = cert.K * math.exp(-cert.alpha * abs(d))
        report.note(f"  {d:4d}  {actual:.6e}  {bound:.6e}")
    report.set("alpha", cert.alpha)
    report.set("K", cert.K)
    report.set("projection_rank", int(round(float(np.trace(cert.projection).real))))
    report.set("worst_decay_margin", cert_report.worst_decay_margin)
    report.set("certificate_pass", passed)
    if not passed:
        report.set("failed_invariant", cert_report.failed_invariant)
        return 2
    return 0


def _run_scan(config: RunConfig, report: Report) -> int:
    block = config.scan or {}
    epsilon = float(block.get("epsilon", 0.1))
    shift_range = int(block.get("shift_range", 20))
    integer_only = bool(block.get("integer_shifts_only", True))
    radius = float(block.get("window", 10.0))
    target_name = block.get("target", "forcing")
    if target_name == "solution":
        system = config.system()
        target = solve_bounded_depca(system, config.n0, config.n1, config.tol)
        window = None
    else:
        target = config.forcing_signal()
        window = (-radius, radius)
    scan_report = diag.almost_period_scan(
        target, epsilon, shift_range, integer_only, window,
        grid_step=float(block.get("grid_step", 1e-2)))
    report.note(str(scan_report))
    for s, dev in zip(scan_report.tested_shifts, scan_report.deviations):
        report.note(f"  shift {s:+g}: deviation {dev:.6e}")
    report.set("epsilon", epsilon)
    report.set("shifts_tested", len(scan_report.tested_shifts))
    report.set("shifts_passing", len(scan_report.passing_shifts))
    report.set("relative_density", scan_report.relative_density)
    return 0


# ---------------------------------------------------------------------------
# entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="depca",
        description="Bounded/periodic solutions of x'(t) = A x(t) + B x([t]) + f(t)",
    )
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--mode", choices=MODES, help="override the config mode")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--tol", type=float, help="override solve.tol")
    parser.add_argument("--seed", type=int, help="override the sampling seed")
    parser.add_argument("--quiet", action="store_true", help="suppress stdout report")
    args = parser.parse_args(argv)

    try:
        config = parse_config(args.config)
        if args.mode:
            config.mode = args.mode
        if args.tol is not None:
            if not 0.0 < args.tol < 1.0:
                raise ValidationError("solve.tol", "tol must lie in (0, 1)")
            config.tol = args.tol
        if args.seed is not None:
            config.seed = args.seed
        return run(config, args.out, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DepcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
