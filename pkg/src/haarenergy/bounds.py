"""Analytic error bounds on the Gaussian approximation.

Moment level: |Sigma^(p) - Sigma_G^(p)| <= G_p f_H(d, p), with separate
f_H for pure and general states.  Generating-function level: a five-term
bound on |G(t) - exp(t^2 Sigma^2 / 2)| valid inside a t-window.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConditionError
from .perm_comb import catalan, ceil_factorial_over_e, double_factorial
from .spectral import (
    HamiltonianSpectrum,
    StateSpectrum,
    center_hamiltonian,
    delta_e_max,
    eta,
)

log = logging.getLogger(__name__)

SQRT6 = math.sqrt(6.0)
TWO_SQRT3 = 2.0 * math.sqrt(3.0)
# 1 - 6 d^(-1/4) > 0 exactly when d > 6^4
PURE_SUPPRESSION_THRESHOLD = 6**4
# exact moments carry relative rounding error ~1e-12 at p = 10; comparisons
# against a bound allow this much slack relative to G_p
MOMENT_CHECK_RTOL = 1e-10


@dataclass(frozen=True)
class BoundContext:
    d: int
    sigma2: float
    eta: float
    delta_e_max: float
    purity_flag: bool = False

    def __post_init__(self):
        if self.d < 1:
            raise ConditionError("d must be positive")
        if self.sigma2 < 0:
            raise ConditionError("sigma2 must be non-negative")
        if self.delta_e_max < 0:
            raise ConditionError("delta_e_max must be non-negative")
        lo = 1.0 / self.d**6
        if not (lo * (1 - 1e-9) <= self.eta <= 1.0 + 1e-9):
            raise ConditionError(f"eta={self.eta} outside [1/d^6, 1]")

    @classmethod
    def from_spectra(cls, rho: StateSpectrum, h: HamiltonianSpectrum) -> "BoundContext":
        from .moments import variance

        return cls(
            d=h.d,
            sigma2=variance(rho, h),
            eta=eta(center_hamiltonian(h)),
            delta_e_max=delta_e_max(rho, h),
            purity_flag=rho.is_pure,
        )


def _largest_k(d: int, const: int) -> int:
    """Largest integer k >= 0 with const * k^7 <= d^4."""
    if d < 1:
        return 0
    k = int((d**4 / const) ** (1 / 7)) + 2
    while k > 0 and const * k**7 > d**4:
        k -= 1
    return k


def validity_p_max(d: int) -> int:
    """min(floor(sqrt d), floor((d/sqrt6)^(4/7))); 0 means no valid p."""
    return min(math.isqrt(d), _largest_k(d, 36))


def n_star(d: int) -> int:
    """N* = min(floor(sqrt d), floor((d/(2 sqrt3))^(4/7)))."""
    return min(math.isqrt(d), _largest_k(d, 144))


def scaling_factor_G(p: int, ctx: BoundContext) -> float:
    """G_p = (p-1)!! sigma2^(p/2)."""
    return double_factorial(p - 1) * ctx.sigma2 ** (p / 2)


def _ratio(p: int) -> float:
    return ceil_factorial_over_e(p) / double_factorial(p - 1)


def f_pure(d: int, p: int, eta: float) -> float:
    """Pure-state f_H(d, p); no coupling between d and p is required."""
    if p < 2:
        raise ConditionError(f"the pure-state bound needs p >= 2, got {p}")
    if p % 2 == 0:
        return p * (p - 2) / (2 * d) + eta * (_ratio(p) - 1)
    return math.sqrt(eta) * _ratio(p)


@dataclass(frozen=True)
class GeneralTerms:
    """f_general split as upper + lower + eta_factor * delta."""

    upper: float
    lower: float
    delta: float
    eta_factor: float

    @property
    def total(self) -> float:
        return self.upper + self.lower + self.eta_factor * self.delta


def f_general_terms(d: int, p: int, eta: float) -> GeneralTerms:
    if p < 2:
        raise ConditionError(f"the general bound needs p >= 2, got {p}")
    vmax = validity_p_max(d)
    if p > vmax:
        raise ConditionError(f"p={p} exceeds the validity limit {vmax} at d={d}")
    shrink = 6.0 * p**3.5 / d**2
    if shrink >= 1.0:
        raise ConditionError(f"1 - 6 p^(7/2)/d^2 <= 0 at d={d}, p={p}")
    pref = 1.0 / (1.0 - shrink)
    cat = catalan(p)
    delta = pref * (_ratio(p) - 1) * cat * (1 + p * p / d)
    if p % 2 == 0:
        return GeneralTerms(pref * shrink, pref * p * p * cat / d, delta, eta)
    return GeneralTerms(0.0, 0.0, delta, math.sqrt(eta))


def f_general(d: int, p: int, eta: float) -> float:
    """General-state f_H(d, p), defined for 2 <= p <= validity_p_max(d)."""
    return f_general_terms(d, p, eta).total


def moment_bound_rhs(p: int, ctx: BoundContext) -> float:
    """G_p f_H(d, p) using the pure or general f according to the context."""
    f = f_pure(ctx.d, p, ctx.eta) if ctx.purity_flag else f_general(ctx.d, p, ctx.eta)
    return scaling_factor_G(p, ctx) * f


def moment_bound_holds(exact: float, gaussian: float, rhs: float, g_p: float) -> bool:
    """|exact - gaussian| <= rhs up to floating-point rounding of the moments."""
    return abs(exact - gaussian) <= rhs + MOMENT_CHECK_RTOL * max(g_p, abs(exact))


@dataclass(frozen=True)
class BoundTable:
    """Moment bounds for p = 2..p_max; ``admissible`` is empty when none apply."""

    ctx: BoundContext
    p_max: int
    rows: list[tuple[int, float | None]] = field(default_factory=list)
    reason: str = ""

    @property
    def admissible(self) -> list[int]:
        return [p for p, rhs in self.rows if rhs is not None]

    @property
    def no_admissible_p(self) -> bool:
        return not self.admissible


def moment_bounds(ctx: BoundContext, p_max: int) -> BoundTable:
    """Evaluate the bound on every p in 2..p_max, marking inadmissible orders."""
    rows = []
    for p in range(2, p_max + 1):
        try:
            rows.append((p, moment_bound_rhs(p, ctx)))
        except ConditionError:
            rows.append((p, None))
    reason = ""
    if not any(rhs is not None for _, rhs in rows):
        reason = f"no admissible p: validity limit at d={ctx.d} is {validity_p_max(ctx.d)}"
    return BoundTable(ctx, p_max, rows, reason)


def d_coefficient(d: int, p: int) -> float:
    """D(d,p) = (d-1)! (d(d+1))^(p/2) / (p+d-1)!."""
    return float(d_coefficient_exact(d, p))


def d_coefficient_exact(d: int, p: int) -> Fraction | float:
    """Exact for even p; odd p carries an irrational square root and is returned as a float."""
    if d < 1 or p < 1:
        raise ConditionError("need d >= 1 and p >= 1")
    ratio = Fraction(math.factorial(d - 1), math.factorial(p + d - 1))
    if p % 2 == 0:
        return ratio * (d * (d + 1)) ** (p // 2)
    return float(ratio * (d * (d + 1)) ** (p // 2)) * math.sqrt(d * (d + 1))


# ---------------------------------------------------------------------------
# generating-function bound


def t_window(ctx: BoundContext) -> float:
    """min(sqrt(N*)/sqrt(sigma2), N*/delta_e_max), infinite branches dropped."""
    ns = n_star(ctx.d)
    a = math.sqrt(ns) / math.sqrt(ctx.sigma2) if ctx.sigma2 > 0 else math.inf
    b = ns / ctx.delta_e_max if ctx.delta_e_max > 0 else math.inf
    return min(a, b)


def pole_t(ctx: BoundContext) -> float:
    """|t| at which 4|t| sqrt(eta sigma2) = 1."""
    s = math.sqrt(ctx.eta * ctx.sigma2)
    return math.inf if s == 0 else 1.0 / (4.0 * s)


def admissible_t_max(ctx: BoundContext) -> float:
    return min(t_window(ctx), pole_t(ctx))


def _tail_bracket(t: float, ctx: BoundContext) -> float:
    """Term (iii): (1/(2 sqrt pi)) [e^{-y/eta}/(1-y)^{1/eta} - e^{8 t^2 sigma2}], y = 4|t|sqrt(eta sigma2).

    Evaluated as e^{8x^2} expm1((1/eta)(-log1p(-y) - y - y^2/2)), where the
    y^2/2 piece of the exponent is exactly the 8 t^2 sigma2 Gaussian part.
    """
    x2 = t * t * ctx.sigma2
    y = 4.0 * abs(t) * math.sqrt(ctx.eta * ctx.sigma2)
    if y >= 1.0:
        raise ConditionError(f"4|t|sqrt(eta sigma2) = {y:.6g} >= 1: the bound has a pole")
    if y < 1e-3:
        rest = y**3 / 3 + y**4 / 4 + y**5 / 5 + y**6 / 6 + y**7 / 7
    else:
        rest = -math.log1p(-y) - y - y * y / 2
    return math.exp(8.0 * x2) * math.expm1(rest / ctx.eta) / (2.0 * math.sqrt(math.pi))


@dataclass(frozen=True)
class MGFTerms:
    t: float
    gaussian_excess: float
    finite_d: float
    tail: float
    low_order: float
    range_term: float

    @property
    def total(self) -> float:
        return self.gaussian_excess + self.finite_d + self.tail + self.low_order + self.range_term


def mgf_bound_terms(t: float, ctx: BoundContext) -> MGFTerms:
    t = float(t)
    window = t_window(ctx)
    if abs(t) > window:
        raise ConditionError(f"|t|={abs(t):.6g} lies outside the window {window:.6g}")
    x2 = t * t * ctx.sigma2
    ns = n_star(ctx.d)
    tail = _tail_bracket(t, ctx)
    gaussian_excess = math.expm1(2.0 * x2) - 2.0 * x2
    finite_d = 32.0 * x2 / (math.sqrt(math.pi) * ctx.d) * math.expm1(16.0 * x2)
    if x2 == 0:
        low = 0.0
    elif x2 >= ns:
        low = math.inf
    else:
        low = x2 / (1.0 - x2 / ns) / math.factorial(math.ceil(ns / 2))
    u = abs(t) * ctx.delta_e_max
    if u == 0:
        rng = 0.0
    elif u >= ns:
        rng = math.inf
    else:
        rng = u / (1.0 - u / ns) / math.factorial(ns)
    return MGFTerms(t, gaussian_excess, finite_d, tail, low, rng)


def mgf_bound(t: float, ctx: BoundContext) -> float:
    """Upper bound on |<e^{t(E-mu)}> - e^{t^2 sigma2/2}| for |t| in the window."""
    total = mgf_bound_terms(t, ctx).total
    if total < 0:
        log.warning("mgf bound evaluated to %g at t=%g; clamped to 0", total, t)
        return 0.0
    return total


def mgf_bound_grid(ctx: BoundContext, n: int, fraction: float = 0.95) -> np.ndarray:
    """n points spread over (0, fraction * admissible_t_max]."""
    t_max = admissible_t_max(ctx)
    if not math.isfinite(t_max):
        raise ConditionError("the t-window is unbounded; the distribution is degenerate")
    return np.linspace(t_max * fraction / n, t_max * fraction, n)


def leading_order(t: float, ctx: BoundContext) -> float:
    """(32/3) sqrt(eta/pi) |t sqrt(sigma2)|^3."""
    return 32.0 / 3.0 * math.sqrt(ctx.eta / math.pi) * abs(t * math.sqrt(ctx.sigma2)) ** 3
