#!/usr/bin/env python3
"""
Evaluators for the explicit moment and tail bounds.

Every evaluator returns a BoundReport carrying the constituent terms, the
r-convention used and, when an oracle is attached, the ratio value/oracle and a
verdict.  Absolute constants that are not pinned down by the inequalities
themselves live in BoundConstants and are echoed into each report.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from chaos import MomentEstimate
from core.errors import ContractError, InvalidInputError
from core.linalg import HERMITIAN_TOL, asymmetry, batched_spectral_norm, is_psd, symmetrize
from ustat import (
    DiscreteDistribution,
    Expectation,
    KernelExpectations,
    KernelTable,
    degeneracy_check,
)
from utils.helpers import check_capacity, expected_max_power, inputs_digest, power_mean, product_support
from utils.validators import is_integer_order, validate_moment_order, validate_nonnegative

logger = logging.getLogger(__name__)

VERIFIED = "verified"
ESTIMATED = "estimated"
VIOLATED = "violated"
RECORDED = "recorded"
ERROR = "error"

UPPER = "upper"
LOWER = "lower"
TAIL = "tail"
CALIBRATED = "calibrated"
FLOOR = "floor"
IDENTITY = "identity"

R_LOG_D = "max(q,log d)"
R_LOG_ED = "max(q,log(ed))"
R_LOG_ND = "max(q,log(nd))"
R_NONE = "none"

THEOREM_CONSTANT = 128.0 / math.sqrt(math.e)
COROLLARY_CONSTANT = 256.0 / math.sqrt(math.e)
REMAINDER_CONSTANT = 4.0 * math.e * math.sqrt(2.0)
DEFAULT_PRODUCT_CAP = 65536
RATIO_SLACK = 1e-9

FULL = "full"
COROLLARY = "corollary"
REFINED = "refined"
THEOREM_VARIANTS = (FULL, COROLLARY, REFINED)


@dataclass(frozen=True)
class BoundConstants:
    """Absolute constants the inequalities leave open, with their documented defaults"""
    tail_to_moment_c: float = 4.0
    lower_bound_c: float = 1.0
    bernstein_moment_c2: Optional[float] = None
    adamczak_c: float = 1.0
    mom1_c: float = 1.0
    decoupling_c: float = 4.0
    symmetrization_c: float = 16.0

    def bernstein_c2(self) -> float:
        """C2 composed from the Bernstein tail and tail_to_moment unless set explicitly"""
        if self.bernstein_moment_c2 is not None:
            return float(self.bernstein_moment_c2)
        return 2.0 * math.sqrt(2.0) * self.tail_to_moment_c

    def convention(self) -> Dict[str, float]:
        out = {k: v for k, v in asdict(self).items() if v is not None}
        out["bernstein_moment_c2"] = self.bernstein_c2()
        return out


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    q_or_t: float
    value: float
    constituent_terms: Dict[str, float] = field(default_factory=dict)
    r_convention: str = R_NONE
    oracle_value: Optional[float] = None
    ratio: Optional[float] = None
    verdict: str = RECORDED
    direction: str = UPPER
    exact: bool = True
    oracle_stderr: float = 0.0
    constants: Dict[str, float] = field(default_factory=dict)
    inputs_digest: str = ""
    notes: Tuple[str, ...] = ()
    variant: str = ""

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise InvalidInputError(f"{self.bound_name}: bound value must be a finite nonnegative real, got {self.value}")

    def with_oracle(self, oracle: float, exact: bool = True, stderr: float = 0.0,
                    slack: float = RATIO_SLACK) -> "BoundReport":
        """Attach an oracle, compute the ratio and judge the bound.

        Upper bounds pass when value >= oracle up to a relative slack; an
        estimated oracle is allowed three standard errors.  FLOOR reports pass
        when value <= oracle, IDENTITY reports when the two agree within the slack.
        Lower bounds with an open constant are recorded, not judged, as are
        assemblies whose constant is calibrated afterwards.
        """
        oracle = float(oracle)
        ratio = self.value / oracle if oracle > 0 else None
        all_exact = self.exact and exact
        if self.direction in (LOWER, CALIBRATED):
            verdict = RECORDED
        else:
            margin = slack * max(1.0, abs(oracle)) + (0.0 if exact else 3.0 * stderr)
            if self.direction == FLOOR:
                ok = self.value <= oracle + margin
            elif self.direction == IDENTITY:
                ok = abs(self.value - oracle) <= margin
            else:
                ok = self.value >= oracle - margin
            verdict = (VERIFIED if all_exact else ESTIMATED) if ok else VIOLATED
        return replace(self, oracle_value=oracle, ratio=ratio, verdict=verdict,
                       exact=all_exact, oracle_stderr=float(stderr))

    def with_moment_oracle(self, estimate: MomentEstimate, slack: float = RATIO_SLACK) -> "BoundReport":
        return self.with_oracle(estimate.value, exact=estimate.is_exact, stderr=estimate.stderr, slack=slack)

    def with_note(self, note: str) -> "BoundReport":
        return replace(self, notes=self.notes + (note,))

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["notes"] = list(self.notes)
        return out


class TailBound(NamedTuple):
    threshold: float
    prob: float


@dataclass(frozen=True)
class SummandLaw:
    """Finite-support law of one matrix summand: values (s, d, d) with probabilities"""
    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        vals = vals.astype(np.complex128 if np.iscomplexobj(vals) else np.float64)
        if vals.ndim == 1:
            vals = vals[:, None, None]
        if vals.ndim != 3 or vals.shape[1] != vals.shape[2]:
            raise InvalidInputError(f"summand values must have shape (s, d, d), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("summand values must be finite")
        if asymmetry(vals) > HERMITIAN_TOL:
            raise InvalidInputError("summand values must be self-adjoint")
        probs = DiscreteDistribution(labels=tuple(str(i) for i in range(len(vals))), probs=self.probs).probs
        object.__setattr__(self, "values", symmetrize(vals))
        object.__setattr__(self, "probs", probs)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def mean(self) -> np.ndarray:
        return np.einsum("s,sab->ab", self.probs, self.values)

    def centered(self) -> "SummandLaw":
        return SummandLaw(self.values - self.mean()[None], self.probs)

    def scaled(self, c: float) -> "SummandLaw":
        return SummandLaw(c * self.values, self.probs)

    def norms(self) -> np.ndarray:
        return batched_spectral_norm(self.values)

    @classmethod
    def rademacher(cls, A: np.ndarray) -> "SummandLaw":
        """eps * A with a fair sign"""
        A = np.asarray(A)
        return cls(np.stack([-A, A]), np.array([0.5, 0.5]))

    @classmethod
    def deterministic(cls, A: np.ndarray) -> "SummandLaw":
        return cls(np.asarray(A)[None], np.array([1.0]))


def _check_summands(Y: Sequence[SummandLaw]) -> int:
    if not Y:
        raise InvalidInputError("need at least one summand")
    dims = {y.d for y in Y}
    if len(dims) != 1:
        raise InvalidInputError(f"summands have mixed dimensions {sorted(dims)}")
    return dims.pop()


def sum_moment(Y: Sequence[SummandLaw], p: float, cap: int = DEFAULT_PRODUCT_CAP) -> float:
    """(E||sum Y_i||^p)^{1/p} by enumeration of the product support"""
    _check_summands(Y)
    check_capacity("product support enumeration", int(np.prod([y.size for y in Y], dtype=np.int64)), cap)
    configs = product_support([y.size for y in Y])
    weights = np.prod([Y[i].probs[configs[:, i]] for i in range(len(Y))], axis=0)
    total = sum(Y[i].values[configs[:, i]] for i in range(len(Y)))
    return power_mean(batched_spectral_norm(total), weights, p)


def centered_sum_moment(Y: Sequence[SummandLaw], p: float, cap: int = DEFAULT_PRODUCT_CAP) -> float:
    """(E||sum (Y_i - E Y_i)||^p)^{1/p}"""
    return sum_moment([y.centered() for y in Y], p, cap)


def _max_norm_power(Y: Sequence[SummandLaw], power: float) -> float:
    """E max_i ||Y_i||^power for independent summands of possibly different support sizes"""
    width = max(y.size for y in Y)
    norms = np.zeros((len(Y), width))
    probs = np.zeros((len(Y), width))
    for i, y in enumerate(Y):
        norms[i, :y.size] = y.norms()
        probs[i, :y.size] = y.probs
    return expected_max_power(norms, probs, power)


def _integer_note(q: float) -> Tuple[str, ...]:
    return () if is_integer_order(q) else (f"evaluated at non-integer q = {q:g}; the inequality is stated for integer q",)


def rosenthal_moment_bound(Y: Sequence[SummandLaw], q: float, cap: int = DEFAULT_PRODUCT_CAP,
                           with_oracle: bool = True) -> BoundReport:
    """2 sqrt(er) ||sum E Z_i^2||^{1/2} + 4 sqrt(2) e r (E max ||Z_i||^{2q})^{1/2q}, Z_i = Y_i - E Y_i"""
    q = validate_moment_order(q)
    d = _check_summands(Y)
    Z = [y.centered() for y in Y]
    r = max(q, math.log(d))
    variance = float(batched_spectral_norm(sum(np.einsum("s,sab,sbc->ac", z.probs, z.values, z.values) for z in Z)))
    variance_term = math.sqrt(variance)
    max_term = _max_norm_power(Z, 2 * q) ** (1.0 / (2 * q))
    value = 2 * math.sqrt(math.e * r) * variance_term + 4 * math.sqrt(2) * math.e * r * max_term

    report = BoundReport(
        bound_name="rosenthal_moment", q_or_t=q, value=value,
        constituent_terms={"variance": variance_term, "max": max_term, "r": r},
        r_convention=R_LOG_D, notes=_integer_note(q),
        inputs_digest=inputs_digest(*[y.values for y in Y], q=q),
    )
    if with_oracle:
        report = report.with_oracle(sum_moment(Z, 2 * q, cap))
    return report


def rosenthal_psd_bound(Y: Sequence[SummandLaw], q: float, cap: int = DEFAULT_PRODUCT_CAP) -> BoundReport:
    """||sum E Y_j||^{1/2} + 2 sqrt(2er) (E max ||Y_j||^q)^{1/2q} against (E||sum Y_j||^q)^{1/2q}"""
    q = validate_moment_order(q)
    d = _check_summands(Y)
    for j, y in enumerate(Y):
        for k in range(y.size):
            if not is_psd(y.values[k]):
                raise InvalidInputError(f"summand {j} is not nonnegative definite at support point {k}")
    r = max(q, math.log(d))
    mean_term = math.sqrt(float(batched_spectral_norm(sum(y.mean() for y in Y))))
    max_term = _max_norm_power(Y, q) ** (1.0 / (2 * q))
    value = mean_term + 2 * math.sqrt(2 * math.e * r) * max_term

    report = BoundReport(
        bound_name="rosenthal_psd", q_or_t=q, value=value,
        constituent_terms={"mean": mean_term, "max": max_term, "r": r},
        r_convention=R_LOG_D, inputs_digest=inputs_digest(*[y.values for y in Y], q=q),
    )
    size = int(np.prod([y.size for y in Y], dtype=np.int64))
    if size > cap:
        logger.warning("rosenthal_psd: %d support points exceed the cap %d; no oracle attached", size, cap)
        return report.with_note("oracle skipped: product support above the enumeration cap")
    # (E||S||^q)^{1/2q} = ((E||S||^q)^{1/q})^{1/2}
    return report.with_oracle(math.sqrt(sum_moment(Y, q, cap)))


def bernstein_parameters(Y: Sequence[SummandLaw]) -> Tuple[float, float, int]:
    """(sigma^2, B, d): sigma^2 = ||sum E (Y - EY)^2||, B = max over support ||Y - EY||"""
    d = _check_summands(Y)
    Z = [y.centered() for y in Y]
    sigma2 = float(batched_spectral_norm(sum(np.einsum("s,sab,sbc->ac", z.probs, z.values, z.values) for z in Z)))
    B = max(float(z.norms()[z.probs > 0].max()) if np.any(z.probs > 0) else 0.0 for z in Z)
    return sigma2, B, d


def bernstein_tail_bound(sigma2: float, B: float, d: int, u: float) -> TailBound:
    """P(||sum Z|| >= 2 sigma sqrt(u) + 4/3 B u) <= 2d e^{-u}"""
    sigma2 = validate_nonnegative(sigma2, "sigma2")
    B = validate_nonnegative(B, "B")
    if u <= 0:
        raise InvalidInputError(f"u must be positive, got {u}")
    threshold = 2 * math.sqrt(sigma2) * math.sqrt(u) + 4.0 / 3.0 * B * u
    return TailBound(threshold=threshold, prob=min(1.0, 2 * d * math.exp(-u)))


def bernstein_moment_bound(sigma2: float, B: float, d: int, q: float, constants: BoundConstants = BoundConstants(),
                           summands: Sequence[SummandLaw] = None, cap: int = DEFAULT_PRODUCT_CAP) -> BoundReport:
    """C2 (sqrt(q + log 2d) sigma + (q + log 2d) B), bounding (E||sum Z||^q)^{1/q}"""
    sigma2 = validate_nonnegative(sigma2, "sigma2")
    B = validate_nonnegative(B, "B")
    q = validate_moment_order(q)
    c2 = constants.bernstein_c2()
    shift = q + math.log(2 * d)
    sigma_term = math.sqrt(shift) * math.sqrt(sigma2)
    B_term = shift * B
    report = BoundReport(
        bound_name="bernstein_moment", q_or_t=q, value=c2 * (sigma_term + B_term),
        constituent_terms={"sigma": sigma_term, "B": B_term, "C2": c2},
        r_convention="q+log(2d)", constants={"bernstein_moment_c2": c2},
        inputs_digest=inputs_digest(sigma2=sigma2, B=B, d=d, q=q),
    )
    if summands is not None:
        report = report.with_oracle(centered_sum_moment(summands, q, cap))
    return report


def moment_to_tail(a0: float, a1: float, a2: float, a3: float, a4: float, u: float) -> float:
    """e (a4 u^2 + a3 u^{3/2} + a2 u + a1 sqrt(u) + a0), valid for u >= 2"""
    if u < 2:
        raise InvalidInputError(f"moment_to_tail needs u >= 2, got {u}")
    for name, a in zip(("a0", "a1", "a2", "a3", "a4"), (a0, a1, a2, a3, a4)):
        validate_nonnegative(a, name)
    return math.e * (a4 * u ** 2 + a3 * u ** 1.5 + a2 * u + a1 * math.sqrt(u) + a0)


def tail_to_moment(a0: float, a1: float, a2: float, p: float, C: float = 4.0) -> float:
    """C (a0 + a1 sqrt(p) + a2 p)"""
    p = validate_moment_order(p, "p")
    for name, a in zip(("a0", "a1", "a2"), (a0, a1, a2)):
        validate_nonnegative(a, name)
    return C * (a0 + a1 * math.sqrt(p) + a2 * p)


def sum_max_bound(xi: Sequence[DiscreteDistribution], q: float, alpha: float) -> BoundReport:
    """left = q^{aq} sum E|xi|^q against right = 2(1 + q^a) max(q^{aq} E max|xi|^q, (sum E|xi|)^q)"""
    q = float(q)
    if not q > 1:
        raise InvalidInputError(f"sum_max needs q > 1, got {q}")
    alpha = validate_nonnegative(alpha, "alpha")
    if not xi:
        raise InvalidInputError("need at least one variable")
    scale = q ** (alpha * q)
    left = scale * sum(law.moment(q) for law in xi)
    width = max(law.size for law in xi)
    magnitudes = np.zeros((len(xi), width))
    probs = np.zeros((len(xi), width))
    for i, law in enumerate(xi):
        magnitudes[i, :law.size] = np.abs(law.payload_array())
        probs[i, :law.size] = law.probs
    max_moment = expected_max_power(magnitudes, probs, q)
    first_moments = sum(law.moment(1) for law in xi)
    right = 2 * (1 + q ** alpha) * max(scale * max_moment, first_moments ** q)
    report = BoundReport(
        bound_name="sum_max", q_or_t=q, value=right,
        constituent_terms={"max_term": scale * max_moment, "sum_term": first_moments ** q, "alpha": alpha},
        inputs_digest=inputs_digest(magnitudes, probs, q=q, alpha=alpha),
    )
    return report.with_oracle(left)


def require_degenerate(H: KernelTable, P: DiscreteDistribution, tol: float, bound_name: str) -> None:
    if not degeneracy_check(H, P, tol):
        raise ContractError(f"{bound_name} needs a completely degenerate kernel; degeneracy_check failed at tol {tol:g}")


@dataclass(frozen=True)
class TheoremTerms:
    """The expectation terms shared by the theorem, its corollary and the refinement"""
    T_max: Expectation
    T_var: float
    T_G: Expectation
    T_row: float
    T_maxE2: float
    T_rowmax: float


def theorem_terms(ex: KernelExpectations, q: float) -> TheoremTerms:
    n, d = ex.H.n, ex.H.d
    T_max = ex.over_joint_sample(lambda X1, X2: ex.max_row_square_norms(X1, X2) ** q, 2 * q,
                                 per_item=n * n * d * d, label="max row term")
    T_G = ex.over_first_sample(lambda X1: ex.e2_gg_star_norms(X1) ** q, 2 * q,
                               per_item=ex.per_item_cost("gg"), label="E2 GG* term")
    T_var = math.sqrt(float(batched_spectral_norm(ex.pair_second_moments().sum(axis=(0, 1)))))
    return TheoremTerms(
        T_max=T_max, T_var=T_var, T_G=T_G,
        T_row=math.sqrt(ex.row_sum()),
        T_maxE2=ex.row_max_power(q) ** (1.0 / (2 * q)),
        T_rowmax=ex.row_pair_max_power(q) ** (1.0 / (2 * q)),
    )


def theorem_moment_bound(H: KernelTable, P: DiscreteDistribution, q: float, variant: str = FULL,
                         expectations: KernelExpectations = None, degeneracy_tol: float = 1e-9) -> BoundReport:
    """Upper bound on (E||U_n||^{2q})^{1/2q} for a degenerate kernel, r = max(q, log(ed))"""
    q = validate_moment_order(q)
    if variant not in THEOREM_VARIANTS:
        raise InvalidInputError(f"variant must be one of {THEOREM_VARIANTS}, got {variant!r}")
    require_degenerate(H, P, degeneracy_tol, "theorem_moment_bound")
    ex = expectations or KernelExpectations(H, P)
    t = theorem_terms(ex, q)
    d = H.d
    r = max(q, math.log(math.e * d))

    if variant == FULL:
        value = THEOREM_CONSTANT * (16 * r ** 1.5 * t.T_max.value + r * t.T_var + r * t.T_G.value)
        terms = {"T_max": t.T_max.value, "T_var": t.T_var, "T_G": t.T_G.value}
        exact = t.T_max.exact and t.T_G.exact
    elif variant == COROLLARY:
        value = COROLLARY_CONSTANT * (r * t.T_row + 11 * r ** 1.5 * t.T_max.value)
        terms = {"T_row": t.T_row, "T_max": t.T_max.value}
        exact = t.T_max.exact
    else:
        factor = REMAINDER_CONSTANT * math.sqrt(1 + math.log(d) / q)
        remainder = factor * (r * t.T_row + r ** 1.5 * t.T_maxE2 + r ** 2 * t.T_rowmax)
        value = THEOREM_CONSTANT * (16 * remainder + r * t.T_var + r * t.T_G.value)
        terms = {"T_row": t.T_row, "T_maxE2": t.T_maxE2, "T_rowmax": t.T_rowmax,
                 "remainder_factor": factor, "T_var": t.T_var, "T_G": t.T_G.value}
        exact = t.T_G.exact
    terms["r"] = r

    return BoundReport(
        bound_name="theorem_moment", q_or_t=q, value=value, constituent_terms=terms,
        r_convention=R_LOG_ED, exact=exact, variant=variant,
        inputs_digest=inputs_digest(H.values, P.probs, q=q),
    )


def lower_bound_terms(H: KernelTable, P: DiscreteDistribution, q: float, constants: BoundConstants = BoundConstants(),
                      expectations: KernelExpectations = None, degeneracy_tol: float = 1e-9) -> BoundReport:
    """C [ max-term + E2 GG*-term + (E||sum E2 H^2||^q)^{1/2q} ] with C = lower_bound_c"""
    q = validate_moment_order(q)
    require_degenerate(H, P, degeneracy_tol, "lower_bound_terms")
    ex = expectations or KernelExpectations(H, P)
    n, d = H.n, H.d
    max_term = ex.over_joint_sample(lambda X1, X2: ex.max_row_square_norms(X1, X2) ** q, 2 * q,
                                    per_item=n * n * d * d, label="max row term")
    gg_term = ex.over_first_sample(lambda X1: ex.e2_gg_star_norms(X1) ** q, 2 * q,
                                   per_item=ex.per_item_cost("gg"), label="E2 GG* term")
    sum_term = ex.over_first_sample(lambda X1: ex.e2_sum_norms(X1) ** q, 2 * q,
                                    per_item=n * d * d, label="sum E2 H^2 term")
    raw = max_term.value + gg_term.value + sum_term.value
    return BoundReport(
        bound_name="lower_bound", q_or_t=q, value=constants.lower_bound_c * raw,
        constituent_terms={"max": max_term.value, "gg_star": gg_term.value, "sum_sq": sum_term.value},
        direction=LOWER, exact=max_term.exact and gg_term.exact and sum_term.exact,
        constants={"lower_bound_c": constants.lower_bound_c},
        inputs_digest=inputs_digest(H.values, P.probs, q=q),
    )


def concentration_coefficients(H: KernelTable, P: DiscreteDistribution, M: float) -> Dict[str, float]:
    """Moment polynomial coefficients from the corollary with identical kernels bounded by M.

    For p = 2q >= 2 and r = max(q, L), L = log(ed):
        r <= p/2 + L  and  r^{3/2} <= p^{3/2}/2 + sqrt(2) L^{3/2}.
    """
    n, d = H.n, H.d
    ex = KernelExpectations(H, P)
    common = ex.conditional_square_rows()  # rows hold (n - 1) copies of E2 H^2 for identical kernels
    e2_norm = float(np.dot(batched_spectral_norm(common[0] / (n - 1)), P.probs))
    a = math.sqrt(n * (n - 1) * e2_norm)
    b = math.sqrt(n - 1) * M
    L = math.log(math.e * d)
    K = COROLLARY_CONSTANT
    return {"a0": K * (a * L + 11 * math.sqrt(2) * b * L ** 1.5), "a1": 0.0, "a2": K * a / 2,
            "a3": K * 11 * b / 2, "a4": 0.0, "a": a, "b": b}


def concentration_tail(H: KernelTable, P: DiscreteDistribution, M: float, t: float,
                       degeneracy_tol: float = 1e-9) -> TailBound:
    """Threshold with P(||U_n|| >= threshold) <= e^{-t}, composed from the corollary and moment_to_tail"""
    if t < 1:
        raise InvalidInputError(f"concentration tail needs t >= 1, got {t}")
    M = validate_nonnegative(M, "M")
    if not H.is_identical_across_pairs():
        raise ContractError("concentration_tail needs identical kernels H_{i,j} = H")
    if H.max_norm() > M * (1 + 1e-12) + 1e-300:
        raise InvalidInputError(f"kernel norm {H.max_norm():.6g} exceeds the stated bound M = {M:.6g}")
    require_degenerate(H, P, degeneracy_tol, "concentration_tail")
    c = concentration_coefficients(H, P, M)
    threshold = moment_to_tail(c["a0"], c["a1"], c["a2"], c["a3"], c["a4"], max(float(t), 2.0))
    return TailBound(threshold=threshold, prob=math.exp(-t))


@dataclass(frozen=True)
class ExpectationComparison:
    """Two assemblies for E||U_n|| and the row-sum / E2 GG* separation"""
    mom1: float
    mom3: float
    terms: Dict[str, float]
    separation: float
    exact: bool


def expectation_bounds_comparison(H: KernelTable, P: DiscreteDistribution, mom1_c: float = 1.0,
                                  expectations: KernelExpectations = None) -> ExpectationComparison:
    ex = expectations or KernelExpectations(H, P)
    n, d = H.n, H.d
    L = math.log(math.e * d)
    gg1 = ex.over_first_sample(lambda X1: ex.e2_gg_star_norms(X1), 2.0, per_item=ex.per_item_cost("gg"),
                               label="E2 GG* first moment")
    max1 = ex.over_joint_sample(lambda X1, X2: ex.max_row_square_norms(X1, X2), 2.0,
                                per_item=n * n * d * d, label="max row first moment")
    T_var = math.sqrt(float(batched_spectral_norm(ex.pair_second_moments().sum(axis=(0, 1)))))
    T_row = math.sqrt(ex.row_sum())
    T_rowmax = math.sqrt(ex.row_pair_max_power(1.0))
    mom1 = mom1_c * L * (gg1.value + T_var + math.sqrt(L) * max1.value)
    mom3 = mom1_c * L * (T_row + math.sqrt(L) * T_rowmax)
    separation = T_row / gg1.value if gg1.value > 0 else math.inf
    return ExpectationComparison(
        mom1=mom1, mom3=mom3, separation=separation, exact=gg1.exact and max1.exact,
        terms={"T_G1": gg1.value, "T_var": T_var, "T_max1": max1.value, "T_row": T_row, "T_rowmax1": T_rowmax,
               "log_ed": L},
    )
