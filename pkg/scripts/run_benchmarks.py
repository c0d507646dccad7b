#!/usr/bin/env python3
"""
Runtime benchmark for the verification suites.

Runs every suite with the configured defaults and compares the wall time
against its target.  Usage:

    python scripts/run_benchmarks.py [--seed 7] [--suite examples --suite khintchine] [--instances 50]
"""

import argparse
import sys
import time
from pathlib import Path
from typing import Dict, List

ROOT = Path(__file__).resolve().parent.parent
sys.path.append(str(ROOT / "src"))
sys.path.append(str(ROOT))

from rich.console import Console
from rich.table import Table

from config.settings import load_settings
from logging_setup import setup_logging
from verification_suite import SUITE_ORDER, SuiteConfig, run_verification_suite

# seconds
RUNTIME_TARGETS: Dict[str, float] = {
    "examples": 10.0,
    "khintchine": 120.0,
    "theorem": 600.0,
    "adamczak": 600.0,
    "tools": 300.0,
}


class SuiteBenchmark:
    """Times suites and collects verdict counts next to the runtime"""

    def __init__(self, settings, seed: int = None, instances: int = None):
        self.console = Console()
        self.settings = settings
        self.seed = seed
        self.instances = instances
        self.results: List[Dict] = []

    def config_for(self, suite: str) -> SuiteConfig:
        s = self.settings
        return SuiteConfig(
            suite=suite,
            n_range=s.suite.n_range,
            d_range=s.suite.d_range,
            q_list=s.suite.q_list,
            support_sizes=s.suite.support_sizes,
            instances_per_cell=self.instances or s.suite.instances_per_cell,
            master_seed=s.suite.master_seed if self.seed is None else self.seed,
            mc_replicas=s.monte_carlo.replicas,
            tail_replicas=s.suite.tail_replicas,
            chaos_n_cap=s.enumeration.chaos_n_cap,
            configuration_cap=s.enumeration.ustat_configuration_cap,
            product_cap=s.enumeration.product_support_cap,
            symmetrization_cap=s.enumeration.symmetrization_cap,
            sphere_restarts=s.sphere.restarts,
        )

    def run(self, suite: str) -> Dict:
        self.console.print(f"\n[blue]Benchmarking suite {suite}...[/blue]")
        start = time.perf_counter()
        summary = run_verification_suite(self.config_for(suite))
        elapsed = time.perf_counter() - start
        result = {
            "suite": suite,
            "seconds": elapsed,
            "target": RUNTIME_TARGETS[suite],
            "records": len(summary.records),
            "violations": summary.violations,
        }
        self.results.append(result)
        return result

    def print_results(self):
        table = Table(title="Suite runtimes")
        table.add_column("Suite", style="cyan")
        table.add_column("Seconds", justify="right")
        table.add_column("Target", justify="right")
        table.add_column("Records", justify="right")
        table.add_column("Violations", justify="right")
        table.add_column("Status")
        for r in self.results:
            ok = r["seconds"] <= r["target"]
            status = "[green]within target[/green]" if ok else "[red]over target[/red]"
            table.add_row(r["suite"], f"{r['seconds']:.2f}", f"{r['target']:.0f}", str(r["records"]),
                          str(r["violations"]), status)
        self.console.print(table)

    def all_within_target(self) -> bool:
        return all(r["seconds"] <= r["target"] and r["violations"] == 0 for r in self.results)


def main():
    parser = argparse.ArgumentParser(description="Time the verification suites")
    parser.add_argument('--suite', action='append', choices=SUITE_ORDER, default=None)
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--instances', type=int, default=None)
    parser.add_argument('--config', default=None)
    args = parser.parse_args()

    settings = load_settings(args.config)
    setup_logging("WARNING")
    bench = SuiteBenchmark(settings, seed=args.seed, instances=args.instances)
    for suite in args.suite or SUITE_ORDER:
        bench.run(suite)
    bench.print_results()
    return 0 if bench.all_within_target() else 1


if __name__ == '__main__':
    sys.exit(main())
