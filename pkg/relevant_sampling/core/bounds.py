"""Closed-form tails, constants and feasibility conditions of the random sampling theorem.

All logarithms are natural. Tails are reported unclipped above 1 so the slack
of a vacuous bound stays visible.
"""

import math
from dataclasses import dataclass
from typing import List, Optional

from scipy.optimize import brentq

from relevant_sampling.core.exceptions import InvalidArgumentError

COVERING_EXPONENT = 3.0 * math.log(3.0) - 2.0


def kappa(d: int) -> float:
    """Plancherel-Polya constant e^{d pi}."""
    if d < 1:
        raise InvalidArgumentError(f"Dimension must be at least 1, got {d}")
    return math.exp(d * math.pi)


def tropp_tail(N: float, sigma2: float, B: float, t: float) -> float:
    """Matrix Bernstein tail N exp(-(t^2/2) / (sigma2 + B t / 3)), clipped to [0, N]."""
    if sigma2 < 0 or B <= 0 or t < 0:
        raise InvalidArgumentError(f"Need sigma2 >= 0, B > 0, t >= 0; got {sigma2}, {B}, {t}")
    if t == 0:
        return float(N)
    value = N * math.exp(-(t * t / 2.0) / (sigma2 + B * t / 3.0))
    return min(max(value, 0.0), float(N))


def prop1_tail(N: float, r: int, R: float, d: int, nu: float) -> float:
    """Probability bound N exp(-nu^2 r / (R^d (1 + nu/3))) on the deviation event.

    Equals tropp_tail(N, 2r/R^d, 1, 2r nu/R^d); the plain substitution
    t = r nu / R^d is bernstein_tail_v1.
    """
    if nu < 0:
        raise InvalidArgumentError(f"nu must be non-negative, got {nu}")
    volume = R**d
    return N * math.exp(-nu * nu * r / (volume * (1.0 + nu / 3.0)))


def bernstein_tail_v1(N: float, r: int, R: float, d: int, nu: float) -> float:
    """Matrix Bernstein applied with sigma^2 = r/R^d, B = 1, t = r nu/R^d."""
    if nu < 0:
        raise InvalidArgumentError(f"nu must be non-negative, got {nu}")
    volume = R**d
    return tropp_tail(N, r / volume, 1.0, r * nu / volume)


def _check_nu_epsilon(nu: float, epsilon: float) -> None:
    if not 0.0 < nu < 0.5:
        raise InvalidArgumentError(f"nu must lie in (0, 1/2), got {nu}")
    if not 0.0 < epsilon < 1.0:
        raise InvalidArgumentError(f"epsilon must lie in (0, 1), got {epsilon}")


@dataclass(frozen=True)
class SampleCountTerms:
    """Both terms of the sample-count maximum."""
    main: float
    covering: float

    @property
    def dominant(self) -> str:
        return "main" if self.main >= self.covering else "covering"

    @property
    def r(self) -> int:
        return math.ceil(max(self.main, self.covering))


def sample_count_terms(R: float, d: int, nu: float, epsilon: float) -> SampleCountTerms:
    """R^d (1+nu/3)/nu^2 log(2R^d/eps) and R^d/(3 log 3 - 2) log(2(R+2)^d/eps)."""
    _check_nu_epsilon(nu, epsilon)
    volume = R**d
    main = volume * (1.0 + nu / 3.0) / (nu * nu) * math.log(2.0 * volume / epsilon)
    covering = volume / COVERING_EXPONENT * math.log(2.0 * (R + 2.0) ** d / epsilon)
    return SampleCountTerms(main=main, covering=covering)


def required_samples(R: float, d: int, nu: float, epsilon: float) -> int:
    """Smallest integer r >= R^d (1+nu/3)/nu^2 log(2R^d/eps).

    The covering term of the full maximum never dominates for nu < 1/2;
    sample_count_terms reports both.
    """
    if R < 2:
        raise InvalidArgumentError(f"R must be at least 2, got {R}")
    terms = sample_count_terms(R, d, nu, epsilon)
    return math.ceil(terms.main)


def constant_A_main(r: int, R: float, d: int, delta: float, nu: float) -> float:
    """Lower frame constant (r/R^d)(1/2 - delta - nu - 12 delta kappa); may be negative."""
    return r / R**d * (0.5 - delta - nu - 12.0 * delta * kappa(d))


def constant_A_general(r: int, R: float, d: int, alpha: float, delta: float, nu: float, N0: float) -> float:
    """(r/R^d)(alpha - alpha delta/(1-alpha) - nu) - 2 kappa N0 delta/(1-alpha).

    With alpha = 1/2 and N0 = 3r/R^d this is constant_A_main.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    if delta >= 1.0 - alpha:
        raise InvalidArgumentError(f"delta={delta} must be below 1 - alpha = {1.0 - alpha}")
    ratio = delta / (1.0 - alpha)
    return r / R**d * (alpha - alpha * ratio - nu) - 2.0 * kappa(d) * N0 * ratio


def positivity_min_samples(R: float, d: int, alpha: float, delta: float, nu: float, N0: float) -> float:
    """Smallest r making constant_A_general positive for a fixed N0; inf if none does."""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    if delta >= 1.0 - alpha:
        raise InvalidArgumentError(f"delta={delta} must be below 1 - alpha = {1.0 - alpha}")
    ratio = delta / (1.0 - alpha)
    margin = alpha - alpha * ratio - nu
    if margin <= 0:
        return math.inf
    return R**d * 2.0 * kappa(d) * N0 * ratio / margin


def covering_tail(R: float, d: int, r: int, a: float) -> float:
    """(R+2)^d exp(-r (a log(a R^d) - (a - R^{-d}))) bounding P(N0 > a r)."""
    inverse_volume = R ** (-d)
    if a <= inverse_volume:
        raise InvalidArgumentError(f"a={a} must exceed R^-d = {inverse_volume}")
    exponent = r * (a * math.log(a * R**d) - (a - inverse_volume))
    return max((R + 2.0) ** d * math.exp(-exponent), 0.0)


def theorem_probability(R: float, d: int, r: int, nu: float) -> float:
    """Success probability 1 - R^d exp(..) - (R+2)^d exp(-(r/R^d)(3 log 3 - 2)), reported as-is."""
    volume = R**d
    return 1.0 - prop1_tail(volume, r, R, d, nu) - covering_tail(R, d, r, 3.0 / volume)


@dataclass(frozen=True)
class HypothesisReport:
    delta: float
    nu: float
    delta_threshold: float
    nu_threshold: float
    delta_ok: bool
    nu_ok: bool

    @property
    def ok(self) -> bool:
        return self.delta_ok and self.nu_ok


def hypothesis_check(delta: float, nu: float, d: int) -> HypothesisReport:
    """delta < 1/(2(1+12 kappa)) and nu < 1/2 - delta(1+12 kappa)."""
    factor = 1.0 + 12.0 * kappa(d)
    delta_threshold = 1.0 / (2.0 * factor)
    nu_threshold = 0.5 - delta * factor
    return HypothesisReport(
        delta=delta,
        nu=nu,
        delta_threshold=delta_threshold,
        nu_threshold=nu_threshold,
        delta_ok=delta < delta_threshold,
        nu_ok=nu < nu_threshold,
    )


def delta_feasible(R: float) -> float:
    """Leading-order smallest delta with B(R, delta) non-empty: 2 pi sqrt(2R) e^{-pi R}."""
    if R <= 0:
        raise InvalidArgumentError(f"R must be positive, got {R}")
    return 2.0 * math.pi * math.sqrt(2.0 * R) * math.exp(-math.pi * R)


def feasible_radius(delta: float) -> float:
    """Smallest R >= 1 with delta_feasible(R) <= delta."""
    if not 0.0 < delta < 1.0:
        raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}")
    if delta_feasible(1.0) <= delta:
        return 1.0
    upper = 2.0
    while delta_feasible(upper) > delta:
        upper *= 2.0
    return brentq(lambda R: delta_feasible(R) - delta, upper / 2.0, upper, xtol=1e-12)


@dataclass(frozen=True)
class BoundParams:
    """Parameter set for a bound table; unset fields are derived."""
    R: float
    d: int
    nu: float
    delta: float
    epsilon: float
    r: Optional[int] = None
    alpha: float = 0.5
    N: Optional[int] = None
    N0: Optional[float] = None
    a: Optional[float] = None
    t: Optional[float] = None
    sigma2: Optional[float] = None
    B: float = 1.0


@dataclass(frozen=True)
class BoundRow:
    name: str
    value: float
    status: str


def bound_table(params: BoundParams) -> List[BoundRow]:
    """Every bound, constant and hypothesis for one parameter set."""
    p = params
    volume = p.R**p.d
    rows: List[BoundRow] = [BoundRow("kappa", kappa(p.d), "info")]

    try:
        terms = sample_count_terms(p.R, p.d, p.nu, p.epsilon)
        required = required_samples(p.R, p.d, p.nu, p.epsilon)
        rows.append(BoundRow("required_samples", float(required), f"{terms.dominant} term dominates"))
        rows.append(BoundRow("covering_term", terms.covering, "info"))
    except InvalidArgumentError:
        if p.r is None:
            raise
        required = None
        rows.append(BoundRow("required_samples", math.nan, "n/a"))

    r = p.r if p.r is not None else required
    rows.append(BoundRow("r", float(r), "given" if p.r is not None else "auto"))

    N = p.N if p.N is not None else max(1, round(volume))
    a = p.a if p.a is not None else 3.0 / volume
    N0 = p.N0 if p.N0 is not None else a * r

    tail = prop1_tail(N, r, p.R, p.d, p.nu)
    rows.append(BoundRow("prop1_tail", tail, "vacuous" if tail >= 1.0 else "ok"))
    tail_v1 = bernstein_tail_v1(N, r, p.R, p.d, p.nu)
    rows.append(BoundRow("bernstein_tail_v1", tail_v1, "vacuous" if tail_v1 >= 1.0 else "ok"))
    if p.t is not None and p.sigma2 is not None:
        rows.append(BoundRow("tropp_tail", tropp_tail(N, p.sigma2, p.B, p.t), "info"))

    try:
        cover = covering_tail(p.R, p.d, r, a)
        rows.append(BoundRow("covering_tail", cover, "vacuous" if cover >= 1.0 else "ok"))
    except InvalidArgumentError:
        rows.append(BoundRow("covering_tail", math.nan, "invalid a"))

    probability = theorem_probability(p.R, p.d, r, p.nu)
    rows.append(BoundRow("theorem_probability", probability, "ok" if probability >= 1.0 - p.epsilon else "fail"))

    A = constant_A_main(r, p.R, p.d, p.delta, p.nu)
    rows.append(BoundRow("constant_A_main", A, "ok" if A > 0 else "non-positive"))
    try:
        A_general = constant_A_general(r, p.R, p.d, p.alpha, p.delta, p.nu, N0)
        rows.append(BoundRow("constant_A_general", A_general, "ok" if A_general > 0 else "non-positive"))
        r_min = positivity_min_samples(p.R, p.d, p.alpha, p.delta, p.nu, N0)
        rows.append(BoundRow("positivity_min_samples", r_min, "ok" if r >= r_min else "fail"))
    except InvalidArgumentError:
        rows.append(BoundRow("constant_A_general", math.nan, "vacuous"))

    hypotheses = hypothesis_check(p.delta, p.nu, p.d)
    rows.append(BoundRow("delta_threshold", hypotheses.delta_threshold, "ok" if hypotheses.delta_ok else "fail"))
    rows.append(BoundRow("nu_threshold", hypotheses.nu_threshold, "ok" if hypotheses.nu_ok else "fail"))

    floor = delta_feasible(p.R)
    rows.append(BoundRow("delta_feasible", floor, "ok" if p.delta >= floor else "infeasible"))
    return rows
