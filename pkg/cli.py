#!/usr/bin/env python3
"""
matconc command line: verification suites, example instances and single bounds

    python cli.py verify --suite khintchine --seed 7 --out reports/khintchine.jsonl
    python cli.py example example2 --n 4 --d 4 --export out/example2
    python cli.py bound theorem --kernel out/example2 --q 2 --variant refined

Exit status: 0 success, 1 at least one violated bound, 2 an error.
"""

import argparse
import logging
import sys
from pathlib import Path

# Add src directory to path
sys.path.append(str(Path(__file__).parent / "src"))
sys.path.append(str(Path(__file__).parent))

from rich.console import Console
from rich.table import Table

from config.settings import apply_overrides, load_settings, parse_override_args
from core.errors import MatConcError
from logging_setup import setup_logging

logger = logging.getLogger("matconc")
console = Console()

BOUND_NAMES = ("theorem", "lower", "adamczak", "decoupling", "symmetrization", "expectation")
VERDICT_STYLES = {"verified": "green", "estimated": "cyan", "violated": "bold red", "recorded": "white",
                  "error": "yellow"}


def parse_arguments(argv=None):
    parser = argparse.ArgumentParser(prog="matconc", description="Matrix chaos and U-statistic bound verification")
    parser.add_argument('--config', default=None, help="Configuration file (default: config.yaml)")
    parser.add_argument('--set', dest='overrides', action='append', default=[], metavar="KEY=VALUE",
                        help="Override a configuration value, e.g. tail_to_moment_c=3 or sphere.restarts=8")
    parser.add_argument('--log-level', default=None, help="Logging level (default from configuration)")
    sub = parser.add_subparsers(dest='command', required=True)

    verify = sub.add_parser('verify', help="Run a verification suite")
    verify.add_argument('--suite', required=True, choices=["khintchine", "theorem", "adamczak", "examples", "tools", "all"])
    verify.add_argument('--seed', type=int, default=None, help="Master seed (64-bit)")
    verify.add_argument('--out', default=None, help="Report path")
    verify.add_argument('--n', type=int, nargs=2, metavar=("LOW", "HIGH"), default=None)
    verify.add_argument('--d', type=int, nargs=2, metavar=("LOW", "HIGH"), default=None)
    verify.add_argument('--q', type=float, nargs='+', default=None)
    verify.add_argument('--instances', type=int, default=None, help="Instances per cell")
    verify.add_argument('--replicas', type=int, default=None, help="Monte Carlo replicas")
    verify.add_argument('--threads', type=int, default=None, help="Worker processes (default: MATCONC_THREADS)")

    example = sub.add_parser('example', help="Build a closed-form example")
    example.add_argument('name', choices=["example1", "example2", "polynomial-chaos"])
    example.add_argument('--n', type=int, required=True)
    example.add_argument('--d', type=int, required=True)
    example.add_argument('--export', default=None, help="Directory for the coefficient or kernel files")

    bound = sub.add_parser('bound', help="Evaluate one bound on a kernel directory")
    bound.add_argument('name', choices=BOUND_NAMES)
    bound.add_argument('--kernel', required=True, help="Kernel directory (manifest.yaml + kernel_i_j/)")
    bound.add_argument('--q', type=float, default=1.0)
    bound.add_argument('--variant', default=None, help="theorem: full|corollary|refined; adamczak: full|simplified")
    bound.add_argument('--out', default=None, help="Write the report here as well")
    return parser.parse_args(argv)


def constant_overrides(settings):
    """Configured constants that are set; unset ones keep the BoundConstants defaults"""
    return {k: v for k, v in vars(settings.constants).items() if v is not None}


def build_suite_config(settings, args):
    """SuiteConfig from configuration defaults plus command-line flags"""
    from verification_suite import SuiteConfig

    suite = settings.suite
    out = args.out or str(Path(settings.output.reports_dir) / f"{args.suite}.jsonl")
    return SuiteConfig(
        suite=args.suite,
        n_range=tuple(args.n) if args.n else suite.n_range,
        d_range=tuple(args.d) if args.d else suite.d_range,
        q_list=tuple(args.q) if args.q is not None else suite.q_list,
        support_sizes=suite.support_sizes,
        instances_per_cell=args.instances if args.instances is not None else suite.instances_per_cell,
        master_seed=args.seed if args.seed is not None else suite.master_seed,
        mc_replicas=args.replicas if args.replicas is not None else settings.monte_carlo.replicas,
        tail_replicas=suite.tail_replicas,
        constants_overrides=constant_overrides(settings),
        output_path=out,
        chaos_n_cap=settings.enumeration.chaos_n_cap,
        configuration_cap=settings.enumeration.ustat_configuration_cap,
        product_cap=settings.enumeration.product_support_cap,
        symmetrization_cap=settings.enumeration.symmetrization_cap,
        degeneracy_tol=settings.tolerances.degeneracy,
        ratio_slack=settings.tolerances.ratio_slack,
        identity_tol=settings.tolerances.identity,
        sphere_restarts=settings.sphere.restarts,
        gradient_tol=settings.sphere.gradient_tol,
        max_iter=settings.sphere.max_iter,
    )


def _fmt(value):
    if value is None:
        return "-"
    return f"{value:.6g}" if isinstance(value, float) else str(value)


def print_reports(reports, title):
    table = Table(title=title)
    table.add_column("Bound", style="cyan")
    table.add_column("q / t", justify="right")
    table.add_column("Variant")
    table.add_column("Value", justify="right")
    table.add_column("Oracle", justify="right")
    table.add_column("Ratio", justify="right")
    table.add_column("Verdict")
    for r in reports:
        style = VERDICT_STYLES.get(r.verdict, "white")
        table.add_row(r.bound_name, _fmt(r.q_or_t), r.variant or "-", _fmt(r.value), _fmt(r.oracle_value),
                      _fmt(r.ratio), f"[{style}]{r.verdict}[/{style}]")
    console.print(table)


def run_verify(settings, args):
    """Phase: verification suite"""
    from verification_suite import run_verification_suite

    cfg = build_suite_config(settings, args)
    console.print(f"\n[green]Running suite '{cfg.suite}'[/green] (seed {cfg.master_seed})")
    summary = run_verification_suite(cfg, threads=args.threads)

    table = Table(title=f"Suite {cfg.suite}: verdicts")
    table.add_column("Verdict", style="cyan")
    table.add_column("Records", justify="right")
    for verdict, count in summary.counts.items():
        table.add_row(verdict, str(count))
    console.print(table)

    if summary.worst_ratios:
        worst = Table(title="Worst ratio per upper bound")
        worst.add_column("Bound", style="cyan")
        worst.add_column("min value/oracle", justify="right")
        for name, ratio in summary.worst_ratios.items():
            worst.add_row(name, _fmt(ratio))
        console.print(worst)
    for name, c in summary.calibrated_constants.items():
        console.print(f"Calibrated constant for {name}: [bold]{_fmt(c)}[/bold]")
    if summary.report_path:
        console.print(f"Report written to {summary.report_path}")
    if summary.violations:
        console.print(f"[bold red]{summary.violations} violated bound(s)[/bold red]")
    return summary.exit_code


def run_example(settings, args):
    """Phase: build (and optionally export) an example"""
    from example_instances import build_example

    instance = build_example(args.name, args.n, args.d)
    table = Table(title=f"{instance.name} (n={instance.n}, d={instance.d})")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    for key, value in instance.expected.items():
        table.add_row(key, _fmt(float(value)))
    console.print(table)
    if args.export:
        path = instance.export(args.export)
        console.print(f"Exported to {path}")
    return 0


def run_bound(settings, args):
    """Phase: one bound against its exact oracle"""
    import adamczak
    import bounds
    import inequality_tools
    from report_writer import write_report
    from ustat import COUPLED, KernelExpectations, KernelTable, exact_U_moment

    H, P = KernelTable.from_directory(args.kernel)
    constants = bounds.BoundConstants(**constant_overrides(settings))
    cap = settings.enumeration.ustat_configuration_cap
    tol = settings.tolerances.degeneracy
    ex = KernelExpectations(H, P, cap=cap, replicas=settings.monte_carlo.replicas)

    if args.name in ("theorem", "lower", "adamczak"):
        oracle = exact_U_moment(H, P, args.q, COUPLED, cap)
    if args.name == "theorem":
        report = bounds.theorem_moment_bound(H, P, args.q, args.variant or bounds.FULL, ex, tol)
        reports = [report.with_moment_oracle(oracle)]
    elif args.name == "lower":
        reports = [bounds.lower_bound_terms(H, P, args.q, constants, ex, tol).with_moment_oracle(oracle)]
    elif args.name == "adamczak":
        terms = adamczak.adamczak_terms(H, P, args.q, args.variant or adamczak.FULL, expectations=ex,
                                        mom1_c=constants.mom1_c, restarts=settings.sphere.restarts,
                                        gradient_tol=settings.sphere.gradient_tol,
                                        max_iter=settings.sphere.max_iter, degeneracy_tol=tol)
        reports = [adamczak.adamczak_moment_tail(terms, None, args.q, C=constants.adamczak_c).with_moment_oracle(oracle)]
    elif args.name == "decoupling":
        reports = [inequality_tools.decoupling_check(H, P, args.q, constants, cap, tol)]
    elif args.name == "symmetrization":
        reports = [inequality_tools.symmetrization_check(H, P, args.q, constants,
                                                         settings.enumeration.symmetrization_cap, tol)]
    else:
        comparison = bounds.expectation_bounds_comparison(H, P, constants.mom1_c, ex)
        first = inequality_tools.coupled_norm_moment(H, P, 1.0, cap)
        reports = [
            bounds.BoundReport(bound_name=name, q_or_t=1.0, value=value, constituent_terms=comparison.terms,
                               direction=bounds.CALIBRATED, exact=comparison.exact).with_oracle(first)
            for name, value in (("mom1_assembly", comparison.mom1), ("mom3_assembly", comparison.mom3))
        ]

    print_reports(reports, f"{args.name} on {args.kernel}")
    if args.out:
        write_report(reports, args.out)
    return 1 if any(r.verdict == bounds.VIOLATED for r in reports) else 0


COMMANDS = {'verify': run_verify, 'example': run_example, 'bound': run_bound}


def main(argv=None):
    args = parse_arguments(argv)
    try:
        settings = load_settings(args.config)
        settings = apply_overrides(settings, parse_override_args(args.overrides))
        setup_logging(args.log_level or settings.logging.level, settings.logging.file)
        return COMMANDS[args.command](settings, args)
    except (MatConcError, OSError) as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        logger.debug("command failed", exc_info=True)
        return 2


if __name__ == '__main__':
    sys.exit(main())
