"""Command-line front end.

Subcommands::

    svmart check    MODEL [policy]            standing conditions
    svmart report   MODEL [policy] [--strict] all verdicts, with the closed-form column for built-in models
    svmart table    [--family F] [--measure M] [--kind classification|summary|all]
    svmart mc       MODEL [mc options] --task ez|exit|phi
    svmart compare  MODEL [policy] [mc options] [--strict]

``MODEL`` is either ``--model ID`` with one flag per parameter (for example
``--model heston --kappa 1 --theta 1 --xi 2 --rho 0``) or ``--config FILE``.
Every subcommand accepts ``--format text|structured``.

Exit status: 0 on success, 1 when ``compare`` finds a definite numeric verdict
that contradicts the closed form, 2 on input errors, 3 when ``--strict`` is
given and some verdict is Inconclusive.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from typing import Sequence, TextIO

from .classify import VERDICTS, MartingaleReport, Tri, full_report
from .config import ConfigError, load_config
from .mc import McConfig, Scheme, collect, dump_paths, estimate_EZ, estimate_exit, estimate_phi, simulate_paths
from .model import MODEL_IDS, DiffusionSpec, builtin, check_conditions, model_parameters
from .quad import DEFAULT_POLICY, ProbePolicy
from .scale import BoundaryProfile, Measure
from .serialize import emit_conditions, emit_estimate, emit_phi, emit_report
from . import tables

EXIT_OK = 0
EXIT_DISAGREE = 1
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3

TABLE_HEADER = "# svmart-table v1"
COMPARE_HEADER = "# svmart-compare v1"

VERDICT_LABELS = {
    "true_martingale": "martingale",
    "ui_martingale": "UI martingale",
    "positive_finite_T": "positive at finite T",
    "positive_at_infinity": "positive at infinity",
    "absorbed_at_zero": "absorbed at zero",
}

ALL_PARAMS = sorted({p for m in MODEL_IDS for p in model_parameters(m)})


class InputError(Exception):
    """Invalid command-line input (exit status 2)."""


# ---------------------------------------------------------------------------
# Argument grammar
# ---------------------------------------------------------------------------


def _add_model_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model (exactly one of --model or --config)")
    g.add_argument("--model", choices=MODEL_IDS, help="built-in model id")
    g.add_argument("--config", metavar="FILE", help="model configuration file")
    for name in ALL_PARAMS:
        g.add_argument(f"--{name}", type=float, metavar="X", help=f"parameter {name} of a built-in model")
    g.add_argument("--x0", type=float, help="initial volatility state (default 1, or the config value)")
    g.add_argument("--c", type=float, dest="c", help="interior reference point of the scale function")
    g.add_argument("--state-space", choices=("real_line", "half_line"),
                   help="Schobel-Zhu state space (default real_line)")


def _add_policy_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("probe policy")
    g.add_argument("--probe-count", type=int, help=f"probe windows per boundary (default {DEFAULT_POLICY.probe_count})")
    g.add_argument("--probe-ratio", type=float, help=f"geometric probe ratio (default {DEFAULT_POLICY.ratio})")
    g.add_argument("--tol", type=float, help=f"relative tolerance of finite estimates (default {DEFAULT_POLICY.tol})")
    g.add_argument("--ceiling", type=float, help=f"growth ceiling for divergence (default {DEFAULT_POLICY.ceiling:g})")
    g.add_argument("--max-panels", type=int, help=f"panel budget per window (default {DEFAULT_POLICY.max_panels})")


def _add_mc_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("Monte Carlo")
    g.add_argument("--paths", type=int, default=10_000, help="number of paths (default 10000)")
    g.add_argument("--dt", type=float, default=1e-3, help="time step (default 1e-3)")
    g.add_argument("--horizon", type=float, default=1.0, help="horizon T (default 1)")
    g.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    g.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    g.add_argument("--block-size", type=int, default=10_000, help="paths per seeded block (default 10000)")
    g.add_argument("--scheme", choices=[s.value for s in Scheme], default="euler")
    g.add_argument("--measure", choices=[m.value for m in Measure], default="original",
                   help="law of Y for exit and phi tasks (default original)")
    g.add_argument("--barriers", type=float, nargs=2, metavar=("LO", "HI"), help="absorbing barriers")
    g.add_argument("--y-cap", type=float, default=1e9, help="|Y| level treated as explosion (default 1e9)")
    g.add_argument("--phi-cap", type=float, default=1e9, help="phi level treated as divergence (default 1e9)")
    g.add_argument("--no-bridge", action="store_true", help="disable the Brownian-bridge exit correction")
    g.add_argument("--plain", action="store_true",
                   help="average Z_T itself instead of E[Z_T | volatility path]")


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "structured"), default="text", help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svmart",
        description="Martingale, integrability and positivity verdicts for stochastic-volatility price processes.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("check", help="check the standing conditions on the coefficients")
    _add_model_args(p)
    _add_policy_args(p)
    _add_format(p)

    p = sub.add_parser("report", help="classify boundaries and report all verdicts")
    _add_model_args(p)
    _add_policy_args(p)
    p.add_argument("--no-conditions", action="store_true", help="skip the standing-condition checks")
    p.add_argument("--strict", action="store_true", help="exit 3 if any verdict is Inconclusive")
    _add_format(p)

    p = sub.add_parser("table", help="print classification and summary tables of the built-in families")
    p.add_argument("--family", choices=tables.FAMILIES, help="restrict to one family")
    p.add_argument("--measure", choices=[m.value for m in Measure], help="restrict classification tables")
    p.add_argument("--kind", choices=("classification", "summary", "all"), default="all")
    _add_format(p)

    p = sub.add_parser("mc", help="Monte Carlo estimates")
    _add_model_args(p)
    _add_mc_args(p)
    p.add_argument("--task", choices=("ez", "exit", "phi"), default="ez",
                   help="E[Z_T], exit frequencies between barriers, or the distribution of phi")
    p.add_argument("--dump", metavar="FILE", help="also write terminal path columns to an .npz file")
    _add_format(p)

    p = sub.add_parser("compare", help="numeric vs closed-form verdicts, with a Monte Carlo cross-check")
    _add_model_args(p)
    _add_policy_args(p)
    _add_mc_args(p)
    p.add_argument("--no-mc", action="store_true", help="skip the Monte Carlo cross-check")
    p.add_argument("--strict", action="store_true", help="exit 3 if any verdict is Inconclusive")
    _add_format(p)
    return parser


# ---------------------------------------------------------------------------
# Argument resolution
# ---------------------------------------------------------------------------


def resolve_spec(args: argparse.Namespace) -> DiffusionSpec:
    given = [n for n in ALL_PARAMS if getattr(args, n) is not None]
    if (args.model is None) == (args.config is None):
        raise InputError("give exactly one model source: --model ID or --config FILE")
    if args.config is not None:
        if given:
            raise InputError(f"parameter flags ({', '.join('--' + n for n in given)}) cannot be combined with --config")
        cfg = load_config(args.config)
        spec = cfg.spec
        if args.state_space is not None:
            raise InputError("--state-space cannot be combined with --config; set state_space in the file")
        if args.x0 is not None:
            spec = replace(spec, start=args.x0)
        if args.c is not None:
            spec = spec.with_reference(args.c)
        return spec
    names = model_parameters(args.model)
    extra = [n for n in given if n not in names]
    if extra:
        raise InputError(f"model {args.model} takes {', '.join(names)}; unexpected {', '.join('--' + n for n in extra)}")
    missing = [n for n in names if n not in given]
    if missing:
        raise InputError(f"model {args.model} is missing {', '.join('--' + n for n in missing)}")
    params = {n: getattr(args, n) for n in names}
    x0 = 1.0 if args.x0 is None else args.x0
    return builtin(args.model, params, x0=x0, reference_point=args.c, state_space=args.state_space)


def resolve_policy(args: argparse.Namespace) -> ProbePolicy:
    overrides = {}
    for flag, field in (("probe_count", "probe_count"), ("probe_ratio", "ratio"), ("tol", "tol"),
                        ("ceiling", "ceiling"), ("max_panels", "max_panels")):
        v = getattr(args, flag, None)
        if v is not None:
            overrides[field] = v
    return replace(DEFAULT_POLICY, **overrides)


def resolve_mc(args: argparse.Namespace) -> McConfig:
    return McConfig(
        path_count=args.paths, dt=args.dt, horizon=args.horizon, seed=args.seed, workers=args.workers,
        block_size=args.block_size, scheme=Scheme(args.scheme), measure=Measure(args.measure),
        barriers=tuple(args.barriers) if args.barriers else None, y_cap=args.y_cap, phi_cap=args.phi_cap,
        bridge=not args.no_bridge, conditional=not args.plain,
    )


# ---------------------------------------------------------------------------
# Text rendering
# ---------------------------------------------------------------------------


def describe_spec(spec: DiffusionSpec) -> str:
    if spec.descriptor is not None:
        d = spec.descriptor
        params = ", ".join(f"{k}={v:g}" for k, v in d.params)
        space = f", {d.state_space}" if d.state_space else ""
        head = f"{d.model_id} ({params}{space})"
    else:
        head = f"custom diffusion on ({spec.left:g}, {spec.right:g}), rho={spec.correlation:g}"
    return f"model: {head}, x0={spec.start:g}, c={spec.c:g}"


def _exponent_line(report: MartingaleReport) -> str | None:
    if not report.exponents:
        return None
    return "exponents: " + ", ".join(f"{k}={v:.6g}" for k, v in report.exponents)


def _profile_line(p: BoundaryProfile) -> str:
    cells = []
    for f in BoundaryProfile.FIELDS:
        v = getattr(p, f)
        cells.append(f"{f}={tables.cell(f, v)}")
    return " ".join(cells)


def format_report_text(spec: DiffusionSpec, report: MartingaleReport) -> str:
    out = [describe_spec(spec)]
    line = _exponent_line(report)
    if line:
        out.append(line)
    out.append(f"conditions: {report.conditions_ok.value}    b nontrivial: {report.b_nontrivial.value}")
    width = max(len(v) for v in VERDICT_LABELS.values())
    for name in VERDICTS:
        v = getattr(report, name).value
        extra = ""
        if report.analytic is not None:
            extra = f"    [closed form: {getattr(report.analytic, name).value}]"
        out.append(f"{VERDICT_LABELS[name].ljust(width)} : {v.ljust(12)}{extra}".rstrip())
    for label in ("original", "tilde"):
        e = getattr(report, f"exit_{label}")
        prob = "" if e.exit_prob_right is None else f", P(exit right)={e.exit_prob_right:.6g}"
        out.append(f"exit ({label}): case {e.case.value}{prob}; phi: {getattr(report, f'phi_{label}').value}")
    out.append(f"profile (original): {_profile_line(report.profile_original)}")
    out.append(f"profile (tilde):    {_profile_line(report.profile_tilde)}")
    for name, fields in report.blocking:
        out.append(f"blocking {VERDICT_LABELS[name]}: {', '.join(fields)}")
    bad = [k for k, ok in report.agreement if not ok]
    if report.analytic is not None:
        out.append("agreement with closed form: " + ("all" if not bad else "differs on " + ", ".join(bad)))
    return "\n".join(out)


def format_conditions_text(spec: DiffusionSpec, cond) -> str:
    out = [describe_spec(spec),
           f"Engelbert-Schmidt condition : {cond.es_condition.value}",
           f"b^2/sigma^2 integrability   : {cond.b_local_integrability.value}",
           f"b nontrivial                : {cond.b_nontrivial.value}"]
    for w in cond.witnesses:
        out.append(f"  {w.integrand} on [{w.lower:.6g}, {w.upper:.6g}]: {w.estimate:.6g}")
    return "\n".join(out)


def format_estimate_text(e) -> str:
    out = [f"{e.label} = {e.mean:.6g} +/- {e.stderr:.3g} (1 SE, {e.path_count} paths)"]
    if e.reference is not None:
        gap = (e.mean - e.reference) / e.stderr if e.stderr > 0 else math.inf
        out.append(f"scale-function reference = {e.reference:.6g} ({gap:+.2f} SE)")
    t = e.tallies
    out.append(f"paths: absorbed left {t.absorbed_left}, absorbed right {t.absorbed_right}, "
               f"capped {t.capped}, survived {t.survived}")
    if e.low_confidence:
        out.append("low confidence")
    out += [f"note: {n}" for n in e.notes]
    return "\n".join(out)


def format_phi_text(s) -> str:
    out = [f"phi at min(exit time, T={s.horizon:g}) over {s.path_count} paths"]
    out += [f"  q{q:g}: {v:.6g}" for q, v in s.quantiles]
    out.append(f"fraction reaching the cap: {s.cap_fraction:.4g} +/- {s.cap_stderr:.2g}")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _inconclusive(report: MartingaleReport) -> bool:
    return any(not getattr(report, n).definite for n in VERDICTS)


def contradictions(report: MartingaleReport) -> list[str]:
    """Definite numeric answers that differ from the closed form (Inconclusive ones are not counted)."""
    oracle = report.analytic
    if oracle is None:
        return []
    out = [n for n in VERDICTS if getattr(report, n).definite and getattr(report, n) != getattr(oracle, n)]
    for label in ("original", "tilde"):
        num, ana = getattr(report, f"profile_{label}"), getattr(oracle, f"profile_{label}")
        out += [f"{label}.{f}" for f in BoundaryProfile.FIELDS
                if getattr(num, f).definite and getattr(num, f).kind != getattr(ana, f).kind]
        e_num, e_ana = getattr(report, f"exit_{label}"), getattr(oracle, f"exit_{label}")
        if e_num.case.value != "inconclusive" and e_num.case != e_ana.case:
            out.append(f"exit_{label}")
    out += [k for k, ok in report.agreement if k.endswith(".prob") and not ok]
    return out


def cmd_check(args, out: TextIO) -> int:
    spec = resolve_spec(args)
    cond = check_conditions(spec, resolve_policy(args))
    out.write(emit_conditions(cond) if args.format == "structured" else format_conditions_text(spec, cond) + "\n")
    return EXIT_OK


def cmd_report(args, out: TextIO) -> int:
    spec = resolve_spec(args)
    report = full_report(spec, resolve_policy(args), conditions=not args.no_conditions)
    out.write(emit_report(report) if args.format == "structured" else format_report_text(spec, report) + "\n")
    return EXIT_INCONCLUSIVE if args.strict and _inconclusive(report) else EXIT_OK


def cmd_table(args, out: TextIO) -> int:
    measure = Measure(args.measure) if args.measure else None
    families = [args.family] if args.family else list(tables.FAMILIES)
    blocks: list[str] = []
    lines: list[str] = [TABLE_HEADER]
    if args.kind in ("classification", "all"):
        for spec in tables.select(args.family, measure):
            if args.format == "structured":
                lines += tables.format_structured(spec)
            else:
                blocks.append(tables.format_text(spec))
    if args.kind in ("summary", "all"):
        for fam in families:
            if args.format == "structured":
                lines += tables.format_summary_structured(fam)
            else:
                blocks.append(tables.format_summary_text(fam))
    out.write("\n".join(lines) + "\n" if args.format == "structured" else "\n\n".join(blocks) + "\n")
    return EXIT_OK


def cmd_mc(args, out: TextIO) -> int:
    spec = resolve_spec(args)
    cfg = resolve_mc(args)
    structured = args.format == "structured"
    if args.task == "ez":
        est = estimate_EZ(spec, cfg.horizon, cfg)
        out.write(emit_estimate(est) if structured else format_estimate_text(est) + "\n")
    elif args.task == "exit":
        if cfg.barriers is None:
            raise InputError("--task exit needs --barriers LO HI")
        est = estimate_exit(spec, cfg.barriers, cfg)
        out.write(emit_estimate(est) if structured else format_estimate_text(est) + "\n")
    else:
        summary = estimate_phi(spec, cfg)
        out.write(emit_phi(summary) if structured else format_phi_text(summary) + "\n")
    if args.dump:
        dump_cfg = replace(cfg, measure=Measure.ORIGINAL) if args.task == "ez" else cfg
        dump_paths(collect(simulate_paths(spec, dump_cfg)), args.dump, dump_cfg)
    return EXIT_OK


def cmd_compare(args, out: TextIO) -> int:
    spec = resolve_spec(args)
    report = full_report(spec, resolve_policy(args), conditions=False)
    wrong = contradictions(report)
    est = None
    if not args.no_mc:
        cfg = resolve_mc(args)
        est = estimate_EZ(spec, cfg.horizon, cfg)
    # a martingale has E[Z_T] = 1; the Monte Carlo line is a cross-check and
    # does not change the exit status
    mc_consistent = None
    if est is not None and report.true_martingale.definite:
        near_one = abs(est.mean - 1.0) <= 3.0 * est.stderr
        mc_consistent = near_one if report.true_martingale is Tri.YES else est.mean < 1.0
    if args.format == "structured":
        out.write(emit_report(report))
        if est is not None:
            out.write(emit_estimate(est))
        rows = [COMPARE_HEADER, f"closed_form={'present' if report.analytic is not None else 'none'}",
                f"contradictions={','.join(wrong)}",
                f"mc_consistent={'none' if mc_consistent is None else str(mc_consistent).lower()}"]
        out.write("\n".join(rows) + "\n")
    else:
        text = [format_report_text(spec, report)]
        if est is not None:
            text.append(format_estimate_text(est))
            if mc_consistent is not None:
                text.append(f"Monte Carlo {'consistent' if mc_consistent else 'not consistent'} "
                            f"with martingale verdict {report.true_martingale.value}")
        if report.analytic is None:
            text.append("no closed form for this model; numeric verdicts only")
        elif wrong:
            text.append("CONTRADICTION with closed form: " + ", ".join(wrong))
        else:
            text.append("numeric verdicts agree with the closed form")
        out.write("\n".join(text) + "\n")
    if wrong:
        return EXIT_DISAGREE
    return EXIT_INCONCLUSIVE if args.strict and _inconclusive(report) else EXIT_OK


COMMANDS = {"check": cmd_check, "report": cmd_report, "table": cmd_table, "mc": cmd_mc, "compare": cmd_compare}


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except (ConfigError, InputError, ValueError) as exc:
        err.write(f"svmart: error: {exc}\n")
    return EXIT_INPUT


def main() -> None:
    sys.exit(run())
