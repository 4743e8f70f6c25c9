"""Command-line front end.

Subcommands: validate, simulate, classify, prevalence, probe-line,
probe-omega, symmetry. Each takes a config file and writes data files
(JSON reports, orbit CSV, two-column plot data); there is no interactive
mode and no figure rendering.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical or
validation failure. The environment variable MONOTONE_LAB_THREADS
overrides any --threads flag.
"""

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .errors import ConfigError, NumericalError
from .config import _resolve_vector, _vector, build_experiment, load_config
from . import asymptotics, order, prevalence, symmetry, systems


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract here is 1
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(
        prog="monotone-lab",
        description="experiments on strongly monotone discrete-time systems",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("validate", help="run the standing-assumption checks")
    p.add_argument("config")
    p.add_argument("--json", dest="json_out", metavar="PATH")
    p.add_argument(
        "--report-only",
        action="store_true",
        help="exit 0 even when checks fail; the report still lists failures",
    )
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="iterate an orbit and export CSV")
    p.add_argument("config")
    p.add_argument("--x0", required=True, help="zero | smooth:K | @file | v1,v2,...")
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--out", metavar="PATH", help="orbit CSV (default stdout)")
    p.add_argument(
        "--norm-out", metavar="PATH", help="two-column (iter, sup-norm) plot data"
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="classify the orbit of one state")
    p.add_argument("config")
    p.add_argument("--x0", required=True, help="zero | smooth:K | @file | v1,v2,...")
    p.add_argument("--json", dest="json_out", metavar="PATH")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("prevalence", help="ensemble classification statistics")
    p.add_argument("config")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", metavar="PATH", help="JSON report path")
    p.add_argument("--csv", dest="csv_out", metavar="PATH", help="CSV summary path")
    p.set_defaults(func=cmd_prevalence)

    p = sub.add_parser("probe-line", help="classify points along a straight line")
    p.add_argument("config")
    p.add_argument("--base", help="zero | ones | v1,v2,...")
    p.add_argument("--direction", help="zero | ones | v1,v2,...")
    p.add_argument("--range", dest="s_range", metavar="A:B")
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_probe_line)

    p = sub.add_parser(
        "probe-omega", help="one-sided omega limits under small pushes"
    )
    p.add_argument("config")
    p.add_argument("--x0", required=True, help="zero | smooth:K | @file | v1,v2,...")
    p.add_argument("--eps", default="1e-2,1e-3,1e-4", help="comma list of epsilons")
    p.add_argument("--direction", help="ones | v1,v2,...")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_probe_omega)

    p = sub.add_parser("symmetry", help="symmetric-limit survey under an action")
    p.add_argument("config")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_symmetry)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if getattr(ns, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return ns.func(ns)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


# ---------------------------------------------------------------------------
# shared helpers

def _load(path):
    return build_experiment(load_config(path))


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _emit_json(path, payload, label):
    text = json.dumps(payload, indent=2) + "\n"
    if path:
        _write_text(path, text)
        print(f"{label} written to {path}")
    else:
        print(text, end="")


def _default_smooth(exp):
    sampler = exp.sampler
    if sampler is not None and sampler.strategy == "smooth_field":
        return sampler
    kappa = exp.system.kappa
    return prevalence.smooth_field(amplitude=min(1.0, 0.9 * kappa), modes=6, seed=0)


def _parse_x0(spec, exp):
    system = exp.system
    if spec == "zero":
        return system.zero_state()
    if spec.startswith("smooth:"):
        try:
            index = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad smooth sample index in {spec!r}") from exc
        return prevalence.sample_initial(_default_smooth(exp), index, system.grid)
    if spec.startswith("@"):
        path = spec[1:]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                tokens = fh.read().replace(",", " ").split()
            values = [float(tok) for tok in tokens]
        except OSError as exc:
            raise ConfigError(f"cannot read x0 file {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"x0 file {path} is not a list of numbers") from exc
        return system.state(values)
    try:
        values = [float(tok) for tok in spec.split(",")]
    except ValueError as exc:
        raise ConfigError(
            f"cannot parse x0 {spec!r}; expected zero, smooth:K, @file, "
            f"or a comma list"
        ) from exc
    return system.state(values)


def _flag_vector(name, text, n):
    return _resolve_vector(_vector("cli", name, text), n, f"--{name}")


# ---------------------------------------------------------------------------
# subcommands

def cmd_validate(ns):
    exp = _load(ns.config)
    system = exp.system
    checks = {}
    all_pass = True

    def record(name, report):
        nonlocal all_pass
        checks[name] = report.to_json()
        all_pass = all_pass and report.passed
        print(
            f"{name}: {'PASS' if report.passed else 'FAIL'} "
            f"(violations {report.violations}/{report.pairs_tested}, "
            f"worst margin {report.worst_margin:.3g})"
        )

    record("check_monotone", order.check_monotone(system))
    record("check_strong_monotone", order.check_strong_monotone(system))
    record("check_strong_positivity", systems.check_strong_positivity(system))
    try:
        record("validate_dissipativity", systems.validate_dissipativity(system))
    except ValueError as exc:
        checks["validate_dissipativity"] = {"skipped": True, "reason": str(exc)}
        print(f"validate_dissipativity: SKIPPED ({exc})")
    record("trapping_check", systems.trapping_check(system))
    if exp.action is not None:
        record("check_equivariance", symmetry.check_equivariance(system, exp.action))

    if not system.monotone_expected:
        print("note: system is declared non-monotone; failures above are expected")
    payload = {
        "schema_version": 1,
        "kind": "validate",
        "system_name": system.name,
        "all_pass": all_pass,
        "checks": checks,
    }
    if ns.json_out:
        _emit_json(ns.json_out, payload, "validation report")
    print(f"overall: {'PASS' if all_pass else 'FAIL'}")
    if all_pass or ns.report_only:
        return 0
    return 2


def cmd_simulate(ns):
    exp = _load(ns.config)
    x0 = _parse_x0(ns.x0, exp)
    orbit = asymptotics.iterate_orbit(exp.system, x0, ns.iters, thinning=ns.thin)
    csv_text = orbit.to_csv()
    if ns.iters == 0:
        # a zero-length run emits the schema header alone
        csv_text = csv_text.splitlines()[0] + "\n"
    if ns.out:
        _write_text(ns.out, csv_text)
        print(f"orbit CSV written to {ns.out}")
    else:
        print(csv_text, end="")
    if ns.norm_out:
        lines = ["# iter sup_norm"]
        for idx, row in zip(orbit.indices, orbit.samples):
            lines.append(f"{int(idx)} {np.max(np.abs(row)):.17g}")
        _write_text(ns.norm_out, "\n".join(lines) + "\n")
        print(f"sup-norm trace written to {ns.norm_out}")
    final = orbit.samples[-1]
    print(
        f"final iterate {int(orbit.indices[-1])}, sup norm "
        f"{np.max(np.abs(final)):.6g}, escaped: {orbit.escaped}"
    )
    return 0


def cmd_classify(ns):
    exp = _load(ns.config)
    x0 = _parse_x0(ns.x0, exp)
    if exp.action is not None:
        cls, verdicts = symmetry.classify_symmetric_limit(
            exp.system, exp.action, x0, exp.budget, exp.tol_sym
        )
    else:
        cls = asymptotics.classify_orbit(exp.system, x0, exp.budget)
        verdicts = None
    payload = {
        "schema_version": 1,
        "kind": "classification",
        "system_name": exp.system.name,
    }
    payload.update(cls.to_json())
    if verdicts is not None:
        payload["symmetry"] = [v.to_json() for v in verdicts]
    print(f"verdict: {cls.verdict} ({cls.diagnostics})")
    if ns.json_out:
        _emit_json(ns.json_out, payload, "classification report")
    return 0


def cmd_prevalence(ns):
    exp = _load(ns.config)
    sampler = exp.sampler
    if sampler is None:
        sampler = prevalence.box_uniform(amplitude=0.9 * exp.system.kappa)
    if ns.seed is not None:
        sampler = replace(sampler, seed=ns.seed)
    count = ns.samples if ns.samples is not None else exp.count
    report = prevalence.estimate_prevalence(
        exp.system, sampler, count=count, budget=exp.budget, threads=ns.threads
    )
    for name in prevalence.VERDICT_ORDER:
        print(f"{name}: {report.counts[name]}")
    if report.stable_fraction is None:
        print("stable fraction undefined (no samples)")
    else:
        lo, hi = report.wilson_95
        print(
            f"stable fraction {report.stable_fraction:.4f} "
            f"(Wilson 95% [{lo:.4f}, {hi:.4f}])"
        )
    print(f"note: {report.caveat}")
    if ns.out:
        _emit_json(ns.out, report.to_json(), "prevalence report")
    if ns.csv_out:
        _write_text(ns.csv_out, report.to_csv())
        print(f"prevalence CSV written to {ns.csv_out}")
    return 0


def cmd_probe_line(ns):
    exp = _load(ns.config)
    system = exp.system
    sampler = exp.sampler if (
        exp.sampler is not None and exp.sampler.strategy == "line_scan"
    ) else None
    base = sampler.base if sampler else None
    direction = sampler.direction if sampler else None
    s_min = sampler.s_min if sampler else 0.0
    s_max = sampler.s_max if sampler else 1.0
    resolution = sampler.resolution if sampler else 101
    if ns.base is not None:
        base = _flag_vector("base", ns.base, system.n)
    if ns.direction is not None:
        direction = _flag_vector("direction", ns.direction, system.n)
    if ns.s_range is not None:
        try:
            lo, hi = ns.s_range.split(":", 1)
            s_min, s_max = float(lo), float(hi)
        except ValueError as exc:
            raise ConfigError(f"bad --range {ns.s_range!r}, expected A:B") from exc
    if ns.resolution is not None:
        resolution = ns.resolution
    if base is None or direction is None:
        raise ConfigError(
            "probe-line needs a line: give --base/--direction or a "
            "[sampling] line_scan section"
        )
    sampler = prevalence.line_scan(base, direction, s_min, s_max, resolution)
    report = prevalence.line_probe(
        system, sampler, budget=exp.budget, threads=ns.threads
    )
    print(
        f"{report.stable_count}/{len(report.s_values)} stable, "
        f"{len(report.bad)} exceptional"
    )
    for entry in report.bad:
        print(f"  s = {entry['s']:.6g}: {entry['verdict']}")
    if ns.out:
        _emit_json(ns.out, report.to_json(), "line report")
    return 0


def cmd_probe_omega(ns):
    exp = _load(ns.config)
    x0 = _parse_x0(ns.x0, exp)
    try:
        eps_values = tuple(float(tok) for tok in ns.eps.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --eps {ns.eps!r}") from exc
    direction = None
    if ns.direction is not None:
        direction = _flag_vector("direction", ns.direction, exp.system.n)
    report = asymptotics.omega_plus_probe(
        exp.system, x0, direction=direction, eps_values=eps_values,
        budget=exp.budget,
    )
    print(f"base verdict: {report.base_verdict}")
    for side, name in ((report.upper, "upper"), (report.lower, "lower")):
        limit = "-" if side.limit is None else np.array2string(
            np.asarray(side.limit).ravel(), precision=6
        )
        print(
            f"{name}: {side.membership} (consistent: {side.consistent}, "
            f"limit {limit})"
        )
    if report.notes:
        print(f"note: {report.notes}")
    if ns.out:
        payload = {"schema_version": 1, "kind": "omega_probe"}
        payload.update(report.to_json())
        _emit_json(ns.out, payload, "omega probe report")
    return 0


def cmd_symmetry(ns):
    exp = _load(ns.config)
    if exp.action is None:
        raise ConfigError("symmetry command needs a [symmetry] section")
    system = exp.system
    gate = symmetry.check_equivariance(system, exp.action)
    if not gate.passed:
        print(
            f"equivariance check failed (worst violation "
            f"{gate.worst_margin:.3g}); refusing to survey a non-equivariant "
            f"pair",
            file=sys.stderr,
        )
        return 2
    sampler = exp.sampler if exp.sampler is not None else _default_smooth(exp)
    if ns.seed is not None:
        sampler = replace(sampler, seed=ns.seed)
    count = ns.samples if ns.samples is not None else exp.count
    states = [
        prevalence.sample_initial(sampler, i, system.grid) for i in range(count)
    ]
    survey = symmetry.symmetric_limit_survey(
        system, exp.action, states, exp.budget, exp.tol_sym
    )
    print(
        f"symmetric limits: {survey.symmetric_count}/{survey.count} "
        f"(fraction {survey.symmetric_fraction:.4f}), max deviation "
        f"{survey.max_deviation:.3g}"
    )
    payload = survey.to_json()
    payload["system_name"] = system.name
    payload["sampler"] = sampler.describe()
    if ns.out:
        _emit_json(ns.out, payload, "symmetry survey")
    return 0


if __name__ == "__main__":
    sys.exit(main())
