#!/usr/bin/env python3
"""
Batch verification: random and closed-form corpora, every bound evaluated next
to its enumeration oracle, one BoundReport per comparison.

Suites
    khintchine  chaos sandwich, naive log(nd) variant, n = 2 tightness and the
                chaos / decoupled U-statistic cross-oracle
    theorem     degenerate-kernel moment bounds, Rosenthal and Bernstein forms,
                tail conversions, sum-max and the E||U_n|| assemblies
    adamczak    Adamczak moment and tail assemblies with calibrated C
    examples    closed forms of the two chaos examples and the polynomial chaos
    tools       Khintchine series, decoupling, symmetrization, block lemma,
                block-diagonal relaxations and structural identities
    all         everything above, with a coverage check over the bound operations

Every instance draws from its own generator keyed by (master_seed, suite, index),
so reports do not depend on MATCONC_THREADS.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from adamczak import (
    DEFAULT_GRADIENT_TOL,
    DEFAULT_MAX_ITER,
    DEFAULT_RESTARTS,
    FULL as ADAMCZAK_FULL,
    SIMPLIFIED,
    adamczak_moment_tail,
    adamczak_terms,
    calibrate_constant,
)
from bounds import (
    CALIBRATED,
    COROLLARY,
    ERROR,
    ESTIMATED,
    FLOOR,
    FULL,
    IDENTITY,
    R_LOG_D,
    R_LOG_ND,
    RATIO_SLACK,
    RECORDED,
    REFINED,
    TAIL,
    UPPER,
    VERIFIED,
    VIOLATED,
    BoundConstants,
    BoundReport,
    SummandLaw,
    bernstein_moment_bound,
    bernstein_parameters,
    bernstein_tail_bound,
    concentration_tail,
    expectation_bounds_comparison,
    lower_bound_terms,
    moment_to_tail,
    rosenthal_moment_bound,
    rosenthal_psd_bound,
    sum_max_bound,
    tail_to_moment,
    theorem_moment_bound,
)
from chaos import KHINTCHINE_CONSTANT, column_blocks, eigen_compare_check, exact_chaos_moment, khintchine_bounds
from core.errors import CapacityError, ConfigError, ContractError
from core.linalg import (
    ChaosCoefficients,
    assemble_block_G,
    hermitian_dilation,
    spectral_norm,
    variance_proxies,
)
from example_instances import build_example1, build_example2, build_polynomial_chaos
from inequality_tools import (
    block_matrix_check,
    coupled_norm_law,
    coupled_norm_moment,
    decoupling_check,
    e2_bound_check,
    matrix_khintchine_series,
    schatten_khintchine_chaos,
    schatten_khintchine_series,
    symmetrization_check,
    useful_bound_check,
)
from report_writer import write_report
from ustat import (
    COUPLED,
    DECOUPLED,
    DiscreteDistribution,
    KernelExpectations,
    conditional_expectation_norm,
    exact_U_moment,
    pi_project,
    product_kernel,
    random_degenerate_kernel,
    random_distribution,
    random_symmetric_kernel,
)
from utils.helpers import (
    configuration_weights,
    inputs_digest,
    mixed_radix_configurations,
    power_mean,
    product_support,
    run_blocks,
)

logger = logging.getLogger(__name__)

KHINTCHINE = "khintchine"
THEOREM = "theorem"
ADAMCZAK = "adamczak"
EXAMPLES = "examples"
TOOLS = "tools"
ALL = "all"
SUITE_ORDER = (KHINTCHINE, THEOREM, ADAMCZAK, EXAMPLES, TOOLS)
SUITES = SUITE_ORDER + (ALL,)

EXAMPLE1_SIZES = (3, 4, 5, 6, 7, 8)
EXAMPLE2_SIZES = (4, 6, 8)
SEPARATION_SIZES = (4, 8, 16)
# larger separation instances estimate their n-point expectations by Monte Carlo
SEPARATION_EXACT_MAX_N = 8
SEPARATION_REPLICAS = 2000
ADAMCZAK_VS_THEOREM_Q = 1.0
TAIL_LEVELS = (1.0, 2.0, 3.0)
ADAMCZAK_TAIL_LEVELS = (2.0, 3.0)
TAIL_TO_MOMENT_ORDERS = (1.0, 2.0, 4.0)
THREE_POINT_LAW = DiscreteDistribution.from_values([-math.sqrt(2.0), 0.0, math.sqrt(2.0)], [0.25, 0.5, 0.25])

# report name -> bound / adamczak operations the report exercises
OP_COVERAGE: Dict[str, Tuple[str, ...]] = {
    "rosenthal_moment": ("rosenthal_moment_bound",),
    "rosenthal_psd": ("rosenthal_psd_bound",),
    "bernstein_moment": ("bernstein_parameters", "bernstein_moment_bound"),
    "bernstein_tail": ("bernstein_parameters", "bernstein_tail_bound"),
    "theorem_moment": ("theorem_moment_bound",),
    "lower_bound": ("lower_bound_terms",),
    "concentration_tail": ("concentration_tail",),
    "moment_to_tail": ("moment_to_tail",),
    "tail_to_moment": ("tail_to_moment",),
    "sum_max": ("sum_max_bound",),
    "mom1_assembly": ("expectation_bounds_comparison",),
    "mom3_assembly": ("expectation_bounds_comparison",),
    "sphere_sup": ("sphere_sup_estimate",),
    "adamczak_moment": ("adamczak_terms", "adamczak_moment_tail"),
    "adamczak_tail": ("adamczak_terms", "adamczak_moment_tail"),
    "mean_norm_estimate": ("mean_norm_estimate",),
    "adamczak_calibration": ("calibrate_constant",),
}
REQUIRED_OPS = frozenset(op for ops in OP_COVERAGE.values() for op in ops)


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    n_range: Tuple[int, int] = (2, 4)
    d_range: Tuple[int, int] = (1, 3)
    q_list: Tuple[float, ...] = (1.0, 2.0)
    support_sizes: Tuple[int, ...] = (2, 3)
    instances_per_cell: int = 50
    master_seed: int = 20240101
    mc_replicas: int = 100000
    tail_replicas: int = 100000
    constants_overrides: Mapping[str, float] = field(default_factory=dict)
    output_path: Optional[str] = None
    chaos_n_cap: int = 7
    configuration_cap: int = 65536
    product_cap: int = 65536
    symmetrization_cap: int = 262144
    degeneracy_tol: float = 1e-9
    ratio_slack: float = RATIO_SLACK
    identity_tol: float = 1e-9
    sphere_restarts: int = DEFAULT_RESTARTS
    gradient_tol: float = DEFAULT_GRADIENT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {SUITES}")
        if not self.q_list:
            raise ConfigError("q_list must not be empty")
        if any(float(q) < 1 for q in self.q_list):
            raise ConfigError(f"every q must be >= 1, got {list(self.q_list)}")
        for name, low in (("n_range", 2), ("d_range", 1)):
            lo, hi = getattr(self, name)
            if lo < low or hi < lo:
                raise ConfigError(f"{name} must satisfy {low} <= low <= high, got {(lo, hi)}")
        if not self.support_sizes or min(self.support_sizes) < 1:
            raise ConfigError("support_sizes must list positive sizes")
        if self.instances_per_cell < 1:
            raise ConfigError("instances_per_cell must be >= 1")
        if self.mc_replicas < 1 or self.tail_replicas < 1:
            raise ConfigError("replica counts must be positive")
        self.bound_constants()
        object.__setattr__(self, "q_list", tuple(float(q) for q in self.q_list))
        object.__setattr__(self, "constants_overrides", dict(self.constants_overrides))

    def bound_constants(self) -> BoundConstants:
        known = set(BoundConstants.__dataclass_fields__)
        unknown = set(self.constants_overrides) - known
        if unknown:
            raise ConfigError(f"unknown constants {sorted(unknown)}; known: {sorted(known)}")
        return replace(BoundConstants(), **self.constants_overrides)

    def ns(self) -> range:
        return range(self.n_range[0], self.n_range[1] + 1)

    def ds(self) -> range:
        return range(self.d_range[0], self.d_range[1] + 1)


class Task(NamedTuple):
    suite: str
    index: int
    params: Dict


@dataclass(frozen=True)
class SuiteSummary:
    suite: str
    counts: Dict[str, int]
    worst_ratios: Dict[str, float]
    calibrated_constants: Dict[str, float]
    records: Tuple[BoundReport, ...]
    report_path: Optional[Path] = None

    @property
    def violations(self) -> int:
        return self.counts.get(VIOLATED, 0)

    @property
    def exit_code(self) -> int:
        return 1 if self.violations else 0


def instance_rng(master_seed: int, suite: str, index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF,
                                 spawn_key=(SUITE_ORDER.index(suite), int(index)))
    return np.random.default_rng(seq)


def _seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2 ** 63 - 1))


def error_report(name: str, q_or_t: float, err: Exception) -> BoundReport:
    return BoundReport(bound_name=name, q_or_t=float(q_or_t), value=0.0, verdict=ERROR, exact=False,
                       notes=(f"{type(err).__name__}: {err}",))


def _attempt(name: str, q_or_t: float, fn: Callable[[], object]) -> List[BoundReport]:
    """Run one group of evaluations; capacity and contract failures become an error record"""
    try:
        result = fn()
    except (CapacityError, ContractError) as e:
        logger.warning("%s at %g: %s", name, q_or_t, e)
        return [error_report(name, q_or_t, e)]
    return list(result) if isinstance(result, (list, tuple)) else [result]


def _comparison(name: str, q_or_t: float, value: float, oracle: float, direction: str, slack: float,
                terms: Dict[str, float] = None, exact: bool = True, notes: Tuple[str, ...] = (),
                digest: str = "") -> BoundReport:
    report = BoundReport(bound_name=name, q_or_t=float(q_or_t), value=float(value), direction=direction,
                         constituent_terms=dict(terms or {}), notes=notes, inputs_digest=digest)
    return report.with_oracle(oracle, exact=exact, slack=slack)


# corpus generators

def random_hermitian(rng: np.random.Generator, shape: Tuple[int, ...], d: int) -> np.ndarray:
    base = rng.standard_normal(tuple(shape) + (d, d))
    return 0.5 * (base + np.swapaxes(base, -1, -2))


def random_coefficients(rng: np.random.Generator, n: int, d: int) -> ChaosCoefficients:
    """Index-symmetric Gaussian coefficients with zero diagonal"""
    blocks = random_hermitian(rng, (n, n), d)
    blocks = 0.5 * (blocks + blocks.transpose(1, 0, 2, 3))
    blocks[np.arange(n), np.arange(n)] = 0.0
    return ChaosCoefficients(blocks)


def random_summands(rng: np.random.Generator, m: int, s: int, d: int, psd: bool = False) -> List[SummandLaw]:
    out = []
    for _ in range(m):
        if psd:
            B = rng.standard_normal((s, d, d))
            values = B @ np.swapaxes(B, -1, -2)
        else:
            values = random_hermitian(rng, (s,), d)
        out.append(SummandLaw(values, random_distribution(s, rng).probs))
    return out


def identical_product_kernel(rng: np.random.Generator, n: int, d: int):
    """H_{i1,i2}(x, y) = x y A with one symmetric A for every pair, Rademacher law"""
    A = random_hermitian(rng, (), d)
    blocks = np.broadcast_to(A, (n, n, d, d)).copy()
    blocks[np.arange(n), np.arange(n)] = 0.0
    P = DiscreteDistribution.rademacher()
    return product_kernel(ChaosCoefficients(blocks), P), P, spectral_norm(A)


def centered_sum_law(Y: Sequence[SummandLaw], cap: int, rng: np.random.Generator, replicas: int):
    """(norms, weights, exact) for ||sum (Y_i - E Y_i)||; Monte Carlo above the product cap"""
    Z = [y.centered() for y in Y]
    size = int(np.prod([z.size for z in Z], dtype=np.int64))
    if size <= cap:
        configs = product_support([z.size for z in Z])
        weights = np.prod([Z[i].probs[configs[:, i]] for i in range(len(Z))], axis=0)
        exact = True
    else:
        logger.info("product support %d above cap %d; sampling %d replicas", size, cap, replicas)
        configs = np.stack([rng.choice(z.size, size=replicas, p=z.probs) for z in Z], axis=1)
        weights = np.full(replicas, 1.0 / replicas)
        exact = False
    total = sum(Z[i].values[configs[:, i]] for i in range(len(Z)))
    return np.linalg.norm(total, ord=2, axis=(-2, -1)), weights, exact


def exceedance(norms: np.ndarray, weights: np.ndarray, threshold: float) -> float:
    return float(weights[norms >= threshold].sum())


def minimal_tail_threshold(norms: np.ndarray, weights: np.ndarray, level: float) -> float:
    """Smallest support point x with P(X > x) <= level"""
    order = np.argsort(norms)
    values, probs = norms[order], weights[order]
    above = 1.0 - np.cumsum(probs)
    ok = np.nonzero(above <= level + 1e-15)[0]
    return float(values[ok[0]]) if ok.size else float(values[-1])


def fit_tail_coefficients(norms: np.ndarray, weights: np.ndarray) -> Tuple[float, float]:
    """(a0, a2) with P(X >= a0 + a2 t) <= e^{-t} for every t > 0"""
    levels = np.unique(norms)
    tails = np.array([weights[norms >= v].sum() for v in levels])
    certain = levels[tails >= 1.0 - 1e-15]
    a0 = float(certain.max()) if certain.size else 0.0
    a2 = 0.0
    for v, p in zip(levels, tails):
        if 0.0 < p < 1.0 - 1e-15 and v > a0:
            a2 = max(a2, (v - a0) / -math.log(p))
    return a0, a2


def fit_moment_growth(norms: np.ndarray, weights: np.ndarray, orders: Sequence[float]) -> float:
    """sup over p >= 1 of (E X^p)^{1/p} / p, on a grid that includes `orders`"""
    first = power_mean(norms, weights, 1.0)
    top = float(norms.max())
    p_max = max(1.0, top / first) if first > 0 else 1.0
    grid = np.union1d(np.linspace(1.0, p_max, 200), np.asarray(orders, dtype=float))
    return max(power_mean(norms, weights, p) / p for p in grid)


# suite checks; each returns the reports for one instance

def khintchine_check(cfg: SuiteConfig, rng: np.random.Generator, n: int, d: int, q: float) -> List[BoundReport]:
    A = random_coefficients(rng, n, d)
    digest = inputs_digest(A.blocks, q=q)

    def sandwich():
        exact = exact_chaos_moment(A, q, cfg.chaos_n_cap)
        kb = khintchine_bounds(A, q)
        r, r_naive = max(q, math.log(d)), max(q, math.log(n * d))
        reports = [
            BoundReport(bound_name="khintchine_upper", q_or_t=q, value=kb.upper,
                        constituent_terms={"lower": kb.lower, "r": r}, r_convention=R_LOG_D,
                        constants={"khintchine": KHINTCHINE_CONSTANT}, inputs_digest=digest),
            BoundReport(bound_name="khintchine_naive_upper", q_or_t=q, value=kb.naive_upper,
                        constituent_terms={"lower": kb.lower, "r": r_naive}, r_convention=R_LOG_ND,
                        constants={"khintchine": KHINTCHINE_CONSTANT}, inputs_digest=digest),
            BoundReport(bound_name="khintchine_lower", q_or_t=q, value=kb.lower, direction=FLOOR,
                        inputs_digest=digest),
        ]
        reports = [rep.with_moment_oracle(exact, slack=cfg.ratio_slack) for rep in reports]
        if n == 2 and q == 1.0:
            closed = math.sqrt(2.0) * spectral_norm(A.blocks[0, 1])
            reports.append(_comparison("khintchine_tightness", q, kb.lower, exact.value, IDENTITY, 1e-12,
                                       terms={"sqrt2_norm": closed}, digest=digest))
            reports.append(_comparison("khintchine_tightness", q, closed, exact.value, IDENTITY, 1e-12,
                                       notes=("closed form sqrt(2) ||A||",), digest=digest))
        return reports

    def cross_oracle():
        P = DiscreteDistribution.rademacher()
        decoupled = exact_U_moment(product_kernel(A, P), P, q, DECOUPLED, cfg.configuration_cap)
        chaos = exact_chaos_moment(A, q, cfg.chaos_n_cap)
        return _comparison("cross_oracle", q, decoupled.value, chaos.value, IDENTITY, 1e-12, digest=digest)

    return _attempt("khintchine_upper", q, sandwich) + _attempt("cross_oracle", q, cross_oracle)


def theorem_check(cfg: SuiteConfig, rng: np.random.Generator, n: int, d: int, s: int, q: float) -> List[BoundReport]:
    constants = cfg.bound_constants()
    H, P = random_degenerate_kernel(n, d, s, rng)
    ex = KernelExpectations(H, P, cap=cfg.configuration_cap, replicas=cfg.mc_replicas, seed=_seed(rng))
    digest = inputs_digest(H.values, P.probs, q=q)
    out: List[BoundReport] = []

    def moment_bounds():
        coupled = exact_U_moment(H, P, q, COUPLED, cfg.configuration_cap)
        decoupled = exact_U_moment(H, P, q, DECOUPLED, cfg.configuration_cap)
        reports = []
        for variant in (FULL, COROLLARY, REFINED):
            bound = theorem_moment_bound(H, P, q, variant, ex, cfg.degeneracy_tol)
            reports.append(bound.with_moment_oracle(coupled, slack=cfg.ratio_slack).with_note("oracle: coupled"))
            reports.append(bound.with_moment_oracle(decoupled, slack=cfg.ratio_slack).with_note("oracle: decoupled"))
        lower = lower_bound_terms(H, P, q, constants, ex, cfg.degeneracy_tol)
        reports.append(lower.with_moment_oracle(coupled, slack=cfg.ratio_slack))
        return reports

    def hoeffding():
        raw = random_symmetric_kernel(n, d, s, rng)
        decomposition = pi_project(raw, P)
        scale = max(1.0, raw.max_norm())
        residual = float(np.max(np.abs(decomposition.reconstruct() - np.asarray(raw.values)))) / scale
        return [
            _comparison("hoeffding_reconstruction", 1.0, residual, 0.0, IDENTITY, 1e-12),
            _comparison("degeneracy", 1.0, conditional_expectation_norm(decomposition.pi2, P) / scale, 0.0,
                        IDENTITY, cfg.degeneracy_tol),
        ]

    def assemblies():
        comparison = expectation_bounds_comparison(H, P, constants.mom1_c, ex)
        first = coupled_norm_moment(H, P, 1.0, cfg.configuration_cap)
        terms = dict(comparison.terms, separation=comparison.separation)
        return [
            BoundReport(bound_name="mom1_assembly", q_or_t=1.0, value=comparison.mom1, constituent_terms=terms,
                        direction=CALIBRATED, exact=comparison.exact, constants={"mom1_c": constants.mom1_c},
                        r_convention="log(ed)", inputs_digest=digest).with_oracle(first),
            BoundReport(bound_name="mom3_assembly", q_or_t=1.0, value=comparison.mom3, constituent_terms=terms,
                        direction=CALIBRATED, constants={"mom1_c": constants.mom1_c},
                        r_convention="log(ed)", inputs_digest=digest).with_oracle(first),
        ]

    def tail_conversions():
        norms, weights = coupled_norm_law(H, P, cfg.configuration_cap)
        reports = []
        a0, a2 = fit_tail_coefficients(norms, weights)
        for p in TAIL_TO_MOMENT_ORDERS:
            value = tail_to_moment(a0, 0.0, a2, p, constants.tail_to_moment_c)
            reports.append(_comparison("tail_to_moment", p, value, power_mean(norms, weights, p), UPPER,
                                       cfg.ratio_slack, terms={"a0": a0, "a2": a2}, digest=digest))
        growth = fit_moment_growth(norms, weights, (2.0, 3.0))
        for u in (2.0, 3.0):
            threshold = moment_to_tail(0.0, 0.0, growth, 0.0, 0.0, u)
            reports.append(_comparison("moment_to_tail", u, math.exp(-u), exceedance(norms, weights, threshold),
                                       TAIL, cfg.ratio_slack, terms={"threshold": threshold, "a2": growth},
                                       digest=digest))
        return reports

    out += _attempt("theorem_moment", q, moment_bounds)
    out += _attempt("hoeffding_reconstruction", 1.0, hoeffding)
    out += _attempt("mom1_assembly", 1.0, assemblies)
    out += _attempt("tail_to_moment", 1.0, tail_conversions)
    out += summand_checks(cfg, rng, n, d, s, q)
    out += concentration_check(cfg, rng, n, d)
    return out


def summand_checks(cfg: SuiteConfig, rng: np.random.Generator, n: int, d: int, s: int,
                   q: float) -> List[BoundReport]:
    constants = cfg.bound_constants()
    Y = random_summands(rng, n, s, d)
    Y_psd = random_summands(rng, n, s, d, psd=True)
    xi = [DiscreteDistribution.from_values(rng.standard_normal(s), random_distribution(s, rng).probs)
          for _ in range(n)]

    def bernstein():
        sigma2, B, dim = bernstein_parameters(Y)
        reports = [bernstein_moment_bound(sigma2, B, dim, q, constants, summands=Y, cap=cfg.product_cap)]
        norms, weights, exact = centered_sum_law(Y, cfg.product_cap, rng, cfg.tail_replicas)
        for u in TAIL_LEVELS:
            tail = bernstein_tail_bound(sigma2, B, dim, u)
            freq = exceedance(norms, weights, tail.threshold)
            stderr = 0.0 if exact else math.sqrt(tail.prob * (1 - tail.prob) / len(norms))
            report = BoundReport(bound_name="bernstein_tail", q_or_t=u, value=tail.prob, direction=TAIL,
                                 constituent_terms={"threshold": tail.threshold, "sigma2": sigma2, "B": B},
                                 inputs_digest=inputs_digest(*[y.values for y in Y], u=u))
            reports.append(report.with_oracle(freq, exact=exact, stderr=stderr, slack=cfg.ratio_slack))
        return reports

    # sum_max needs q > 1
    q_sm = q if q > 1 else q + 1.0
    return (
        _attempt("rosenthal_moment", q, lambda: rosenthal_moment_bound(Y, q, cap=cfg.product_cap))
        + _attempt("rosenthal_psd", q, lambda: rosenthal_psd_bound(Y_psd, q, cap=cfg.product_cap))
        + _attempt("bernstein_moment", q, bernstein)
        + _attempt("sum_max", q_sm, lambda: [sum_max_bound(xi, q_sm, alpha) for alpha in (0.0, 1.0)])
    )


def concentration_check(cfg: SuiteConfig, rng: np.random.Generator, n: int, d: int) -> List[BoundReport]:
    H, P, M = identical_product_kernel(rng, n, d)

    def tails():
        norms, weights = coupled_norm_law(H, P, cfg.configuration_cap)
        reports = []
        for t in TAIL_LEVELS:
            tail = concentration_tail(H, P, M, t, cfg.degeneracy_tol)
            reports.append(_comparison("concentration_tail", t, tail.prob, exceedance(norms, weights, tail.threshold),
                                       TAIL, cfg.ratio_slack, terms={"threshold": tail.threshold, "M": M},
                                       digest=inputs_digest(H.values, t=t)))
        return reports

    return _attempt("concentration_tail", 1.0, tails)


def adamczak_check(cfg: SuiteConfig, rng: np.random.Generator, n: int, d: int, s: int, q: float) -> List[BoundReport]:
    constants = cfg.bound_constants()
    H, P = random_degenerate_kernel(n, d, s, rng)
    ex = KernelExpectations(H, P, cap=cfg.configuration_cap, replicas=cfg.mc_replicas, seed=_seed(rng))
    sphere_seed = _seed(rng)
    digest = inputs_digest(H.values, P.probs, q=q)

    def assemble():
        coupled = exact_U_moment(H, P, q, COUPLED, cfg.configuration_cap)
        norms, weights = coupled_norm_law(H, P, cfg.configuration_cap)
        reports = []
        for variant in (ADAMCZAK_FULL, SIMPLIFIED):
            terms = adamczak_terms(H, P, q, variant, ex, constants.mom1_c, cfg.sphere_restarts, sphere_seed,
                                   cfg.gradient_tol, cfg.max_iter, cfg.degeneracy_tol, threads=1)
            moment = adamczak_moment_tail(terms, None, q, C=constants.adamczak_c)
            reports.append(moment.with_moment_oracle(coupled, slack=cfg.ratio_slack))
            for t in ADAMCZAK_TAIL_LEVELS:
                tail = adamczak_moment_tail(terms, None, t, C=constants.adamczak_c, tail=True)
                reports.append(tail.with_oracle(minimal_tail_threshold(norms, weights, math.exp(-t))))
            if variant == ADAMCZAK_FULL:
                reports.append(_comparison("sphere_sup", q, terms.B_relaxation, terms.B, UPPER, cfg.ratio_slack,
                                           notes=("relaxation ||sum E H^2||^{1/2} against the ascent estimate",),
                                           digest=digest))
                reports.append(_comparison("mean_norm_estimate", 1.0, terms.mean_norm_estimate,
                                           power_mean(norms, weights, 1.0), CALIBRATED, cfg.ratio_slack,
                                           exact=terms.exact, digest=digest))
        return reports

    return _attempt("adamczak_moment", q, assemble)


def calibration_records(records: Sequence[BoundReport]) -> Tuple[List[BoundReport], Dict[str, float]]:
    """Minimal Adamczak constant per assembly, as records and as a header map"""
    out, constants = [], {}
    for name in ("adamczak_moment", "adamczak_tail"):
        judged = [r for r in records if r.bound_name == name and r.oracle_value is not None]
        if not judged:
            continue
        c_min = calibrate_constant(judged)
        constants[name] = c_min
        report = BoundReport(bound_name="adamczak_calibration", q_or_t=1.0, value=c_min if math.isfinite(c_min) else 0.0,
                             direction=CALIBRATED, variant=name.split("_")[1],
                             constituent_terms={"instances": float(len(judged))},
                             notes=(f"smallest C with ratio >= 1 over {len(judged)} {name} records",))
        if not math.isfinite(c_min):
            report = replace(report, verdict=VIOLATED).with_note("no finite constant: a zero assembly met a positive oracle")
        out.append(report)
    return out, constants


def example_check(cfg: SuiteConfig, rng: np.random.Generator, name: str, n: int) -> List[BoundReport]:
    tol = cfg.identity_tol
    if name == "example1":
        def closed_forms():
            inst = build_example1(n, n)
            proxies = variance_proxies(inst.coefficients)
            basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
            rotated = variance_proxies(build_example1(n, n, basis=basis.T).coefficients)
            return [
                _comparison("example1_sum_sq_norm", 1.0, proxies.sum_sq_norm, inst.expected["sum_sq_norm"],
                            IDENTITY, tol),
                _comparison("example1_gg_star_norm", 1.0, inst.expected["gg_star_norm_lower"], proxies.gg_star_norm,
                            FLOOR, tol),
                _comparison("example1_rotation", 1.0, rotated.sum_sq_norm, proxies.sum_sq_norm, IDENTITY, tol),
                _comparison("example1_rotation", 1.0, rotated.gg_star_norm, proxies.gg_star_norm, IDENTITY, tol),
            ]
        return _attempt("example1_sum_sq_norm", 1.0, closed_forms)

    if name == "example2":
        def closed_forms():
            inst = build_example2(n, n)
            proxies = variance_proxies(inst.coefficients)
            off_diagonal = example2_off_diagonal(inst.coefficients)
            return [
                _comparison("example2_gg_star_norm", 1.0, proxies.gg_star_norm, inst.expected["gg_star_norm"],
                            IDENTITY, tol),
                _comparison("example2_sum_sq_norm", 1.0, proxies.sum_sq_norm, inst.expected["sum_sq_norm"],
                            IDENTITY, tol),
                _comparison("example2_row_sum", 1.0, proxies.row_sum_total, inst.expected["row_sum_total"],
                            IDENTITY, tol),
                _comparison("example2_block_diagonal", 1.0, off_diagonal, 0.0, IDENTITY, 1e-12),
            ]
        return _attempt("example2_gg_star_norm", 1.0, closed_forms)

    if name == "separation":
        def separation():
            inst = build_example2(n, n)
            H, P = inst.kernel(), inst.distribution()
            if n <= SEPARATION_EXACT_MAX_N:
                ex = KernelExpectations(H, P, cap=cfg.configuration_cap, replicas=cfg.mc_replicas, seed=_seed(rng))
            else:
                ex = KernelExpectations(H, P, cap=0, replicas=min(cfg.mc_replicas, SEPARATION_REPLICAS),
                                        seed=_seed(rng))
            comparison = expectation_bounds_comparison(H, P, cfg.bound_constants().mom1_c, ex)
            return [
                _comparison("example2_separation", 1.0, comparison.separation, inst.expected["separation"],
                            IDENTITY, 1e-6, terms=comparison.terms, exact=comparison.exact),
                # the row-sum assembly must stay above the T_G assembly
                _comparison("mom1_vs_mom3", 1.0, comparison.mom3, comparison.mom1, UPPER, cfg.ratio_slack,
                            terms=comparison.terms, exact=comparison.exact),
            ]
        return _attempt("example2_separation", 1.0, separation)

    if name == "polynomial-chaos":
        def polynomial():
            A = build_example1(n, n).coefficients
            reports = []
            for q in cfg.q_list:
                for law in (DiscreteDistribution.rademacher(), THREE_POINT_LAW):
                    inst = build_polynomial_chaos(A, law, q)
                    oracle = exact_U_moment(inst.kernel(), law, q, COUPLED, cfg.configuration_cap)
                    reports.append(BoundReport(
                        bound_name="polynomial_chaos", q_or_t=q, value=inst.expected["bound_at_unit_constant"],
                        constituent_terms=dict(inst.expected), direction=CALIBRATED, r_convention="max(q,log(ed))",
                        inputs_digest=inputs_digest(A.blocks, law.probs, q=q),
                    ).with_moment_oracle(oracle))
                    reports.append(_comparison("polynomial_chaos_max_moment", q, inst.expected["max_power_moment"],
                                               brute_max_power(law, n, q), IDENTITY, 1e-12))
            return reports
        return _attempt("polynomial_chaos", 1.0, polynomial)

    if name == "adamczak-vs-theorem":
        def compare():
            inst = build_example2(n, n)
            H, P = inst.kernel(), inst.distribution()
            ex = KernelExpectations(H, P, cap=cfg.configuration_cap, replicas=cfg.mc_replicas, seed=_seed(rng))
            q = ADAMCZAK_VS_THEOREM_Q
            theorem = theorem_moment_bound(H, P, q, FULL, ex, cfg.degeneracy_tol)
            terms = adamczak_terms(H, P, q, ADAMCZAK_FULL, ex, cfg.bound_constants().mom1_c,
                                   cfg.sphere_restarts, _seed(rng), cfg.gradient_tol, cfg.max_iter,
                                   cfg.degeneracy_tol, threads=1)
            adamczak = adamczak_moment_tail(terms, None, q, C=cfg.bound_constants().adamczak_c)
            return [_comparison("adamczak_vs_theorem", q, adamczak.value, theorem.value, CALIBRATED,
                                cfg.ratio_slack, terms={"adamczak": adamczak.value, "theorem": theorem.value},
                                exact=adamczak.exact and theorem.exact, notes=(f"example2 n={n}",))]
        return _attempt("adamczak_vs_theorem", ADAMCZAK_VS_THEOREM_Q, compare)

    raise ConfigError(f"unknown example check {name!r}")


def example2_off_diagonal(coefficients: ChaosCoefficients) -> float:
    """Largest spectral norm among the off-diagonal d x d blocks of GG*"""
    n, d = coefficients.n, coefficients.d
    gram = assemble_block_G(coefficients).gram().entries.reshape(n, d, n, d).transpose(0, 2, 1, 3)
    mask = ~np.eye(n, dtype=bool)
    blocks = gram[mask]
    return float(np.linalg.norm(blocks, ord=2, axis=(-2, -1)).max()) if blocks.size else 0.0


def brute_max_power(law: DiscreteDistribution, n: int, q: float) -> float:
    """E max_i |X_i|^{2q} over all s^n samples"""
    configs = mixed_radix_configurations(law.size, n)
    weights = configuration_weights(configs, law.probs)
    magnitudes = np.abs(law.payload_array())[configs].max(axis=1)
    return float(np.dot(weights, magnitudes ** (2 * q)))


def tools_check(cfg: SuiteConfig, rng: np.random.Generator, n: int, d: int, s: int, q: float) -> List[BoundReport]:
    constants = cfg.bound_constants()
    series = random_hermitian(rng, (n,), d)
    rect = rng.standard_normal((n, d, d + 1))
    raw_blocks = random_hermitian(rng, (n, n), d)
    coefficients = random_coefficients(rng, n, d)
    H, P = random_degenerate_kernel(n, d, s, rng)
    s_sym = min(cfg.support_sizes)
    H_sym, P_sym = random_degenerate_kernel(n, d, s_sym, rng) if s_sym != s else (H, P)
    B = rng.standard_normal((2 * d, 2 * d))
    M = B @ B.T
    x1 = rng.integers(0, s, size=n)

    def identities():
        R = rect[0]
        dilation = spectral_norm(hermitian_dilation(R))
        reports = [_comparison("hermitian_dilation", 1.0, dilation, float(np.linalg.norm(R, 2)), IDENTITY, 1e-10)]
        comparison = eigen_compare_check(column_blocks(coefficients), p=2)
        gram_trace = float(np.trace(assemble_block_G(coefficients).gram().entries).real)
        reports.append(_comparison("eigen_compare_trace", 1.0, comparison.trace_gap, 0.0, IDENTITY,
                                   cfg.identity_tol * max(1.0, gram_trace)))
        if comparison.condition_met:
            reports.append(_comparison("eigen_compare_schatten", 2.0, float(comparison.schatten_ok), 1.0,
                                       IDENTITY, 0.0, notes=("condition met",)))
        return reports

    return (
        _attempt("matrix_khintchine_series", 1.0, lambda: matrix_khintchine_series(list(series)))
        + _attempt("schatten_khintchine_series", q, lambda: schatten_khintchine_series(list(rect), q))
        + _attempt("schatten_khintchine_chaos", q, lambda: schatten_khintchine_chaos(raw_blocks, q, cfg.chaos_n_cap))
        + _attempt("decoupling", q, lambda: decoupling_check(H, P, q, constants, cfg.configuration_cap,
                                                              cfg.degeneracy_tol))
        + _attempt("symmetrization", q, lambda: symmetrization_check(H_sym, P_sym, q, constants,
                                                                      cfg.symmetrization_cap, cfg.degeneracy_tol))
        + _attempt("block_matrix", 1.0, lambda: [block_matrix_check(M, d, p) for p in (math.inf, 1.0, 2.0)])
        + _attempt("useful_bound", 1.0, lambda: useful_bound_check(coefficients))
        + _attempt("e2_bound", 1.0, lambda: e2_bound_check(H, P, x1))
        + _attempt("hermitian_dilation", 1.0, identities)
    )


CHECKS: Dict[str, Callable[..., List[BoundReport]]] = {
    KHINTCHINE: khintchine_check,
    THEOREM: theorem_check,
    ADAMCZAK: adamczak_check,
    EXAMPLES: example_check,
    TOOLS: tools_check,
}


def suite_tasks(cfg: SuiteConfig, suite: str) -> List[Task]:
    cells: List[Dict] = []
    k_range = range(cfg.instances_per_cell)
    if suite == KHINTCHINE:
        cells = [dict(n=n, d=d, q=q) for n in cfg.ns() for d in cfg.ds() for q in cfg.q_list for _ in k_range]
    elif suite in (THEOREM, ADAMCZAK, TOOLS):
        cells = [dict(n=n, d=d, s=s, q=q) for n in cfg.ns() for d in cfg.ds() for s in cfg.support_sizes
                 for q in cfg.q_list for _ in k_range]
    elif suite == EXAMPLES:
        cells = ([dict(name="example1", n=n) for n in EXAMPLE1_SIZES]
                 + [dict(name="example2", n=n) for n in EXAMPLE2_SIZES]
                 + [dict(name="separation", n=n) for n in SEPARATION_SIZES]
                 + [dict(name="polynomial-chaos", n=3), dict(name="adamczak-vs-theorem", n=4)])
    return [Task(suite, i, params) for i, params in enumerate(cells)]


def run_task(cfg: SuiteConfig, task: Task) -> List[BoundReport]:
    rng = instance_rng(cfg.master_seed, task.suite, task.index)
    logger.debug("%s instance %d: %s", task.suite, task.index, task.params)
    return CHECKS[task.suite](cfg, rng, **task.params)


def covered_operations(records: Sequence[BoundReport]) -> frozenset:
    return frozenset(op for r in records for op in OP_COVERAGE.get(r.bound_name, ()))


def summarize(suite: str, records: Sequence[BoundReport], calibrated: Dict[str, float],
              report_path: Optional[Path] = None) -> SuiteSummary:
    counts = {v: 0 for v in (VERIFIED, ESTIMATED, VIOLATED, RECORDED, ERROR)}
    worst: Dict[str, float] = {}
    for r in records:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
        if r.direction in (UPPER, TAIL) and r.ratio is not None and r.verdict != ERROR:
            worst[r.bound_name] = min(worst.get(r.bound_name, math.inf), r.ratio)
    return SuiteSummary(suite=suite, counts=counts, worst_ratios=dict(sorted(worst.items())),
                        calibrated_constants=calibrated, records=tuple(records), report_path=report_path)


def run_verification_suite(cfg: SuiteConfig, threads: int = None) -> SuiteSummary:
    """Run the selected suite, write the report when cfg.output_path is set, and summarize"""
    suites = SUITE_ORDER if cfg.suite == ALL else (cfg.suite,)
    records: List[BoundReport] = []
    for suite in suites:
        tasks = suite_tasks(cfg, suite)
        logger.info("suite %s: %d instances", suite, len(tasks))
        for batch in run_blocks(partial(run_task, cfg), tasks, threads):
            records.extend(batch)

    calibration, calibrated = calibration_records(records)
    records.extend(calibration)

    if cfg.suite == ALL:
        missing = REQUIRED_OPS - covered_operations(records)
        if missing:
            raise ContractError(f"suite 'all' left operations unexercised: {sorted(missing)}")

    report_path = None
    if cfg.output_path:
        metadata = {"suite": cfg.suite, "master_seed": cfg.master_seed, "records": len(records),
                    "constants": cfg.bound_constants().convention(), "calibrated_adamczak_c": calibrated}
        report_path = write_report(records, cfg.output_path, metadata)

    summary = summarize(cfg.suite, records, calibrated, report_path)
    logger.info("suite %s finished: %s", cfg.suite, summary.counts)
    return summary
