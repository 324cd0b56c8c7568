"""Command-line batch runner.

Each invocation prints one record per result, as JSON lines (default) or CSV.
Every record embeds the run configuration.  Output is a pure function of the
arguments; a wall-clock ``timestamp`` field is added only with ``--timestamp``.

Exit status: 0 success, 1 a requested check failed, 2 malformed input,
3 numerical failure (non-convergence, lost mass, unexpected atoms).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from typing import Sequence, TextIO

import numpy as np

from . import classical, cumulants, entropy, inequalities, measure, rmt_oracle
from .errors import AtomDetected, FreeLabError, MassLoss, NoConvergence
from .free_conv import SubordinationConfig, semicircular_smooth, weighted_free_sum
from .serialize import csv_rows, dumps

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
#: Absolute allowance for floating-point rounding in Monte Carlo comparisons.
RMT_ROUNDING_FLOOR = 1e-9
RMT_SIGMAS = 3.0


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    n_points: int
    t_cut: float
    n_t: int
    sub_tol: float
    max_iter: int
    damping: float
    phi_tol: float
    chi_tol: float
    format: str
    seed: int

    @property
    def subordination(self) -> SubordinationConfig:
        return SubordinationConfig(self.max_iter, self.sub_tol, self.damping, self.n_points)

    @property
    def flow(self) -> entropy.FlowQuadratureConfig:
        return entropy.FlowQuadratureConfig(self.t_cut, self.n_t, subordination=self.subordination)


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("measures")
    g.add_argument("--spec", action="append", default=[], metavar="FILE", help="JSON measure spec (repeatable)")
    g.add_argument("--named", action="append", default=[], metavar="NAME",
                   help=f"named law, one of {sorted(measure.NAMED)} (repeatable)")
    g.add_argument("--variance", type=float, default=1.0, help="variance for --named laws")
    g.add_argument("--smooth", type=float, default=None, metavar="T",
                   help="replace every input by its free sum with a semicircle of variance T")
    g.add_argument("--copies", type=int, default=1, help="repeat the input list this many times")
    c = p.add_argument_group("configuration")
    c.add_argument("--n-points", type=int, default=measure.DEFAULT_N_POINTS)
    c.add_argument("--t-cut", type=float, default=entropy.FlowQuadratureConfig.t_cut)
    c.add_argument("--n-t", type=int, default=entropy.FlowQuadratureConfig.n_t)
    c.add_argument("--sub-tol", type=float, default=SubordinationConfig.tol)
    c.add_argument("--max-iter", type=int, default=SubordinationConfig.max_iter)
    c.add_argument("--damping", type=float, default=SubordinationConfig.damping)
    c.add_argument("--phi-tol", type=float, default=inequalities.PHI_TOL,
                   help="allowed violation for Fisher checks; negative values demand a margin")
    c.add_argument("--chi-tol", type=float, default=inequalities.CHI_TOL,
                   help="allowed violation for entropy checks (relative for epi)")
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--timestamp", action="store_true", help="add a wall-clock field to every record")
    c.add_argument("--dump-density", action="store_true", help="include grids and densities of results")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="freelab", description="Free entropy and Fisher information laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    e = sub.add_parser("entropy", parents=[common], help="free entropy of each input")
    e.add_argument("--method", choices=("log-energy", "flow", "both"), default="log-energy")
    sub.add_parser("fisher", parents=[common], help="free Fisher information of each input")
    cv = sub.add_parser("convolve", parents=[common], help="law of a weighted free sum of the inputs")
    cv.add_argument("--weights", type=float, nargs="+", default=None)
    m = sub.add_parser("monotonicity", parents=[common], help="entropy along normalised free sums")
    m.add_argument("--n-max", type=int, default=8)
    sub.add_parser("stam", parents=[common], help="many-summand free Stam inequality")
    sa = sub.add_parser("superadd", parents=[common], help="entropy superadditivity for a unit vector")
    sa.add_argument("--weights", type=float, nargs="+", default=None)
    fi = sub.add_parser("fisher-ineq", parents=[common], help="Fisher information inequality for weighted sums")
    fi.add_argument("--weights", type=float, nargs="+", default=None)
    fi.add_argument("--b", type=float, nargs="+", default=None)
    sub.add_parser("epi", parents=[common], help="free entropy power inequality")
    cm = sub.add_parser("classical-monotonicity", parents=[common], help="Shannon entropy along normalised sums")
    cm.add_argument("--n-max", type=int, default=6)
    r = sub.add_parser("rmt-check", parents=[common], help="random-matrix moments against the cumulant oracle")
    r.add_argument("--weights", type=float, nargs="+", default=None)
    r.add_argument("--dim", type=int, default=512)
    r.add_argument("--trials", type=int, default=32)
    r.add_argument("--max-order", type=int, default=6)
    return parser


def _load_spec(path: str, n_points: int) -> measure.Measure:
    try:
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from None
    try:
        return measure.measure_from_spec(spec, n_points=n_points)
    except (FreeLabError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: invalid measure spec ({exc})") from None


def _load_measures(args, cfg: RunConfig) -> tuple[list[measure.Measure], list[str]]:
    mus, labels = [], []
    for path in args.spec:
        mus.append(_load_spec(path, cfg.n_points))
        labels.append(f"spec:{path}")
    for name in args.named:
        try:
            mus.append(measure.named(name, args.variance, cfg.n_points))
        except FreeLabError as exc:
            raise InputError(f"--named {name}: {exc}") from None
        labels.append(f"named:{name}:{args.variance:g}")
    if not mus:
        raise InputError("no input measures; use --spec FILE or --named NAME")
    if args.copies < 1:
        raise InputError("--copies must be at least 1")
    if args.smooth is not None:
        if not args.smooth > 0:
            raise InputError("--smooth must be positive")
        mus = [semicircular_smooth(mu, args.smooth, cfg.subordination) for mu in mus]
        labels = [f"{lab}+semicircle:{args.smooth:g}" for lab in labels]
    return mus * args.copies, labels * args.copies


def _need(mus, count: int, what: str):
    if len(mus) < count:
        raise InputError(f"{what} needs at least {count} input measures, got {len(mus)}")


def _unit_weights(args, count: int) -> list[float]:
    if args.weights is None:
        return [1.0 / math.sqrt(count)] * count
    if len(args.weights) != count:
        raise InputError(f"--weights has {len(args.weights)} entries for {count} measures")
    return list(args.weights)


def _density_payload(mu: measure.Measure) -> dict:
    if mu.is_atomic:
        return {"atoms": [[float(x), float(p)] for x, p in zip(mu.locations, mu.masses)]}
    return {"lo": mu.lo, "hi": mu.hi, "x": mu.x, "density": mu.density}


def _measure_summary(mu: measure.Measure) -> dict:
    out = {"digest": mu.digest(), "kind": mu.kind.value, "mean": mu.mean, "variance": mu.variance,
           "moments": measure.moments(mu, 6)}
    if mu.is_grid:
        out.update(lo=mu.lo, hi=mu.hi, n_points=mu.n_points)
    return out


def _cmd_entropy(args, cfg, mus, labels):
    records = []
    for mu, label in zip(mus, labels):
        methods = ["log-energy", "flow"] if args.method == "both" else [args.method]
        for method in methods:
            chi = entropy.chi_log_energy(mu) if method == "log-energy" else entropy.chi_via_fisher_flow(mu, cfg.flow)
            rec = {"command": "entropy", "input": label, "measure": mu.digest(), "method": chi.method,
                   "chi": chi.value, "estimated_error": chi.estimated_error}
            if args.dump_density:
                rec["density"] = _density_payload(mu)
            records.append(rec)
    return records, True


def _cmd_fisher(args, cfg, mus, labels):
    records = []
    for mu, label in zip(mus, labels):
        rec = {"command": "fisher", "input": label, "measure": mu.digest(),
               "phi": entropy.fisher_from_density(mu)}
        if mu.is_grid:
            rec["phi_conjugate"] = entropy.fisher_from_conjugate(mu)
        if args.dump_density:
            rec["density"] = _density_payload(mu)
        records.append(rec)
    return records, True


def _cmd_convolve(args, cfg, mus, labels):
    weights = [1.0] * len(mus) if args.weights is None else list(args.weights)
    if len(weights) != len(mus):
        raise InputError(f"--weights has {len(weights)} entries for {len(mus)} measures")
    out = weighted_free_sum(mus, weights, cfg.subordination)
    rec = {"command": "convolve", "inputs": labels, "weights": weights, "result": _measure_summary(out),
           "diagnostics": out.diagnostics}
    if args.dump_density:
        rec["density"] = _density_payload(out)
    return [rec], True


def _report_record(command, labels, report) -> dict:
    return {"command": command, "inputs": labels, "report": report}


def _cmd_monotonicity(args, cfg, mus, labels):
    _need(mus, 1, "monotonicity")
    seq, report = inequalities.check_clt_monotonicity(mus[0], args.n_max, cfg.subordination, cfg.chi_tol)
    rec = _report_record("monotonicity", labels[:1], report)
    rec["sequence"] = [{"n": n, "chi": c.value, "estimated_error": c.estimated_error} for n, c in seq]
    return [rec], report.passed


def _cmd_stam(args, cfg, mus, labels):
    _need(mus, 2, "stam")
    report = inequalities.check_free_stam(mus, cfg.subordination, cfg.phi_tol)
    return [_report_record("stam", labels, report)], report.passed


def _cmd_superadd(args, cfg, mus, labels):
    _need(mus, 2, "superadd")
    a = _unit_weights(args, len(mus))
    try:
        inequalities.CoefficientVector(tuple(a))
    except ValueError as exc:
        raise InputError(f"--weights: {exc}") from None
    report = inequalities.check_chi_superadditivity(mus, a, cfg.subordination, cfg.chi_tol)
    return [_report_record("superadd", labels, report)], report.passed


def _cmd_fisher_ineq(args, cfg, mus, labels):
    _need(mus, 2, "fisher-ineq")
    a = _unit_weights(args, len(mus))
    try:
        coeffs = inequalities.CoefficientVector(tuple(a), None if args.b is None else tuple(args.b))
    except ValueError as exc:
        raise InputError(f"--weights/--b: {exc}") from None
    report = inequalities.check_fisher_inequality(mus, coeffs, cfg.subordination, cfg.phi_tol)
    return [_report_record("fisher-ineq", labels, report)], report.passed


def _cmd_epi(args, cfg, mus, labels):
    _need(mus, 2, "epi")
    report = inequalities.check_entropy_power(mus, cfg.subordination, cfg.chi_tol)
    return [_report_record("epi", labels, report)], report.passed


def _cmd_classical(args, cfg, mus, labels):
    _need(mus, 1, "classical-monotonicity")
    if not mus[0].is_grid:
        raise InputError("classical-monotonicity needs a density input")
    seq, report = classical.check_classical_monotonicity(mus[0], args.n_max, cfg.chi_tol)
    rec = _report_record("classical-monotonicity", labels[:1], report)
    rec["sequence"] = [{"n": n, "entropy": h} for n, h in seq]
    return [rec], report.passed


def _cmd_rmt(args, cfg, mus, labels):
    weights = [1.0] * len(mus) if args.weights is None else list(args.weights)
    if len(weights) != len(mus):
        raise InputError(f"--weights has {len(weights)} entries for {len(mus)} measures")
    est = rmt_oracle.sample_free_sum_moments(mus, weights, args.dim, args.trials, args.max_order, cfg.seed)
    oracle = cumulants.weighted_sum_moments_oracle([measure.moments(mu, args.max_order) for mu in mus],
                                                   weights, args.max_order)
    rows, ok = [], True
    for e, o in zip(est, oracle):
        allowed = RMT_SIGMAS * e.std_error + RMT_ROUNDING_FLOOR * (1.0 + abs(o))
        passed = abs(e.mean - o) <= allowed
        ok &= passed
        rows.append({"k": e.k, "mean": e.mean, "std_error": e.std_error, "oracle": float(o),
                     "allowed": allowed, "pass": passed})
    rec = {"command": "rmt-check", "inputs": labels, "weights": weights, "dim": args.dim,
           "trials": args.trials, "orders": rows, "pass": ok}
    return [rec], ok


COMMANDS = {
    "entropy": _cmd_entropy, "fisher": _cmd_fisher, "convolve": _cmd_convolve,
    "monotonicity": _cmd_monotonicity, "stam": _cmd_stam, "superadd": _cmd_superadd,
    "fisher-ineq": _cmd_fisher_ineq, "epi": _cmd_epi,
    "classical-monotonicity": _cmd_classical, "rmt-check": _cmd_rmt,
}


def _flatten(record: dict) -> dict:
    flat = {}
    for key, value in record.items():
        if key == "report":
            flat.update(value.to_dict())
            flat.pop("inputs_digest", None)
        elif isinstance(value, (str, int, float, bool, np.floating, np.integer)) or value is None:
            flat[key] = value
        else:
            flat[key] = dumps(value)
    return flat


def _emit(records: list[dict], fmt: str, out: TextIO):
    if fmt == "json":
        for rec in records:
            out.write(dumps(rec) + "\n")
        return
    flat = [_flatten(r) for r in records]
    columns = []
    for row in flat:
        for key in row:
            if key not in columns:
                columns.append(key)
    lead = [c for c in ("command", "name") if c in columns]
    out.write(csv_rows(flat, lead + sorted(c for c in columns if c not in lead)))


def run_cli(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = RunConfig(args.n_points, args.t_cut, args.n_t, args.sub_tol, args.max_iter, args.damping,
                        args.phi_tol, args.chi_tol, args.format, args.seed)
        cfg.flow  # validates the nested configs
    except ValueError as exc:
        err.write(f"freelab: invalid configuration: {exc}\n")
        return EXIT_INPUT
    try:
        mus, labels = _load_measures(args, cfg)
        records, ok = COMMANDS[args.command](args, cfg, mus, labels)
    except InputError as exc:
        err.write(f"freelab: {exc}\n")
        return EXIT_INPUT
    except (NoConvergence, MassLoss, AtomDetected) as exc:
        err.write(f"freelab: numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except (FreeLabError, ValueError) as exc:
        err.write(f"freelab: invalid input: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT
    config = asdict(cfg)
    config["command"] = args.command
    stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()) if args.timestamp else None
    for rec in records:
        rec["config"] = config
        if stamp is not None:
            rec["timestamp"] = stamp
    _emit(records, cfg.format, out)
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
