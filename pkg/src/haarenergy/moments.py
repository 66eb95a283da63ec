"""Exact moments of E = Tr[U rho U^dag H] over Haar-random U.

The Haar average expands as

    <E^p> = sum_{sigma, tau in S_p} Wg(sigma) rho[sigma tau] H[tau],

with Theta[pi] the product of Tr[Theta^a] over the cycles of pi.  Both
factors are class functions, so the double sum collapses to a contraction of
the class multiplication counts with the Weingarten vector.  That
contraction is done once per (p, d) in exact rationals; only the final pairing
with the trace products is floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .classalgebra import class_product_counts
from .errors import ConditionError, ResourceCapError, UnsupportedRegimeError
from .perm_comb import P_CAP, class_size, double_factorial, partitions
from .spectral import (
    HamiltonianSpectrum,
    StateSpectrum,
    as_array,
    center_hamiltonian,
    power_traces,
    _check_pair,
)
from .weingarten import weingarten_class_sum, weingarten_table

DEFAULT_P_MAX = 10


def _check_order(p: int, d: int, allow_large: bool) -> None:
    if not isinstance(p, int) or p < 1:
        raise ConditionError(f"moment order must be a positive integer, got {p!r}")
    cap = P_CAP if allow_large else DEFAULT_P_MAX
    if p > cap:
        hint = "" if allow_large else " (pass allow_large=True to go up to 12)"
        raise ResourceCapError(f"moment order p={p} exceeds the cap {cap}{hint}")
    if d < p:
        raise UnsupportedRegimeError(f"d={d} < p={p} is not supported")


@lru_cache(maxsize=128)
def _contractions(p: int, d: int, allow_large: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Return (A, B) as float arrays.

    A[m, k] = sum_{sigma in S_p} Wg(sigma) [sigma r_m^{-1} in class k]
    B[m, l] = sum_{sigma in class l} Wg(sigma r_m^{-1})
    """
    counts = class_product_counts(p, allow_large=allow_large)
    wg = weingarten_table(p, d, allow_large=allow_large).ordered()
    nc = len(wg)
    a = np.empty((nc, nc))
    b = np.empty((nc, nc))
    for m in range(nc):
        for k in range(nc):
            a[m, k] = float(sum((int(counts[m, l, k]) * wg[l] for l in range(nc)), Fraction(0)))
        for l in range(nc):
            b[m, l] = float(sum((int(counts[m, l, k]) * wg[k] for k in range(nc)), Fraction(0)))
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def _class_products(theta: np.ndarray, p: int) -> np.ndarray:
    """Theta[lam] for every partition lam of p, in canonical order."""
    traces = power_traces(theta, p)
    return np.array([math.prod(traces[a] for a in lam.parts) for lam in partitions(p)])


def _sizes(p: int) -> np.ndarray:
    return np.array([class_size(lam) for lam in partitions(p)], dtype=float)


def _derangement_mask(p: int) -> np.ndarray:
    return np.array([lam.is_derangement for lam in partitions(p)])


def _pair_sum(weights: np.ndarray) -> float:
    # fixed-order exactly rounded reduction keeps results schedule independent
    return math.fsum(weights.ravel().tolist())


def mean(rho: StateSpectrum, h: HamiltonianSpectrum) -> float:
    """Haar mean Tr[H]/d (independent of the state)."""
    _check_pair(rho, h)
    return math.fsum(h.values.tolist()) / h.d


def variance(rho: StateSpectrum, h: HamiltonianSpectrum) -> float:
    """(Tr[H^2] - Tr[H]^2/d)(Tr[rho^2] - 1/d)/(d^2 - 1).

    This closed form takes Tr[rho] = 1; for a normalised state it equals
    ``central_moment(rho, h, 2)``.
    """
    _check_pair(rho, h)
    d = h.d
    if d == 1:
        return 0.0
    e = h.values
    spread_h = math.fsum((e * e).tolist()) - math.fsum(e.tolist()) ** 2 / d
    spread_rho = math.fsum((rho.values**2).tolist()) - 1.0 / d
    return max(spread_h, 0.0) * max(spread_rho, 0.0) / (d * d - 1)


def raw_moment(rho: StateSpectrum, h: HamiltonianSpectrum, p: int, allow_large: bool = False) -> float:
    """Exact Haar average <E^p>."""
    _check_pair(rho, h)
    d = h.d
    _check_order(p, d, allow_large)
    a, _ = _contractions(p, d, allow_large)
    h_cls = _class_products(h.values, p)
    rho_cls = _class_products(rho.values, p)
    return _pair_sum((_sizes(p) * h_cls)[:, None] * a * rho_cls[None, :])


def central_moment(
    rho: StateSpectrum,
    h: HamiltonianSpectrum,
    p: int,
    form: str = "delta",
    allow_large: bool = False,
) -> float:
    """Exact central moment <(E - <E>)^p>.

    ``form="delta"`` sums Wg(sigma tau^-1) drho[sigma] dH[tau] with both
    permutations restricted to derangements, where drho = rho - Tr[rho]/d
    (this is rho - 1/d for a normalised state).  Only traceless spectra enter,
    which keeps the sum well conditioned.
    ``form="rho"`` sums Wg(sigma) rho[sigma tau] dH[tau] with tau restricted
    to derangements.  Both are exact for any non-negative spectrum; the second
    loses relative accuracy when rho is close to maximally mixed.
    """
    _check_pair(rho, h)
    d = h.d
    _check_order(p, d, allow_large)
    mask = _derangement_mask(p)
    if not mask.any():
        return 0.0
    a, b = _contractions(p, d, allow_large)
    dh = _class_products(center_hamiltonian(h).values, p) * _sizes(p)
    if form == "delta":
        lam = rho.values
        drho = _class_products(lam - math.fsum(lam.tolist()) / d, p)
        return _pair_sum(dh[mask][:, None] * b[np.ix_(mask, mask)] * drho[mask][None, :])
    if form == "rho":
        rho_cls = _class_products(rho.values, p)
        return _pair_sum(dh[mask][:, None] * a[mask] * rho_cls[None, :])
    raise ValueError(f"unknown form {form!r}")


def central_from_raw(rho: StateSpectrum, h: HamiltonianSpectrum, p: int, allow_large: bool = False) -> float:
    """Central moment by binomial recentring of raw moments (cross-check only)."""
    m1 = raw_moment(rho, h, 1)
    raws = [1.0] + [raw_moment(rho, h, j, allow_large) for j in range(1, p + 1)]
    return math.fsum(math.comb(p, j) * raws[j] * (-m1) ** (p - j) for j in range(p + 1))


def gaussian_moment(p: int, sigma2: float) -> float:
    """(p-1)!! sigma2^(p/2) for even p, zero for odd p."""
    if p % 2:
        return 0.0
    return double_factorial(p - 1) * sigma2 ** (p // 2)


def pure_central_moment(h: HamiltonianSpectrum | Sequence[float], d: int | None = None, p: int = 2) -> float:
    """Central moment for a pure state: (sum of Wg over S_p) x (sum of dH over derangements)."""
    e = as_array(h)
    if d is None:
        d = e.size
    if d != e.size:
        raise ConditionError(f"d={d} does not match the hamiltonian dimension {e.size}")
    _check_order(p, d, allow_large=True)
    mask = _derangement_mask(p)
    if not mask.any():
        return 0.0
    dh = _class_products(center_hamiltonian(e).values, p) * _sizes(p)
    return float(weingarten_class_sum(p, d)) * math.fsum(dh[mask].tolist())


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class MomentRow:
    p: int
    exact: float
    gaussian: float
    bound_rhs: float | None = None
    g_p: float = 0.0

    @property
    def abs_diff(self) -> float:
        return abs(self.exact - self.gaussian)

    @property
    def bound_holds(self) -> bool | None:
        if self.bound_rhs is None:
            return None
        from .bounds import moment_bound_holds

        return moment_bound_holds(self.exact, self.gaussian, self.bound_rhs, self.g_p)


@dataclass(frozen=True)
class MomentReport:
    d: int
    p_max: int
    mu: float
    sigma2: float
    rows: list[MomentRow] = field(default_factory=list)
    pure: bool = False
    meta: dict = field(default_factory=dict)

    CSV_HEADER = ("p", "exact", "gaussian", "abs_diff", "bound_rhs", "bound_holds")

    def csv_rows(self) -> list[tuple]:
        out = []
        for r in self.rows:
            out.append(
                (
                    r.p,
                    repr(r.exact),
                    repr(r.gaussian),
                    repr(r.abs_diff),
                    "" if r.bound_rhs is None else repr(r.bound_rhs),
                    "" if r.bound_holds is None else str(r.bound_holds).lower(),
                )
            )
        return out

    @property
    def all_bounds_hold(self) -> bool:
        return all(r.bound_holds is not False for r in self.rows)


def moment_report(
    rho: StateSpectrum,
    h: HamiltonianSpectrum,
    p_max: int = 4,
    allow_large: bool = False,
) -> MomentReport:
    """Exact and Gaussian central moments for p = 1..p_max with the error bound.

    For a pure state the pure-state bound (valid for every p >= 2) is used;
    otherwise a bound is attached only for p up to the validity limit.
    """
    from . import bounds

    _check_pair(rho, h)
    d = h.d
    _check_order(p_max, d, allow_large)
    sigma2 = variance(rho, h)
    ctx = bounds.BoundContext.from_spectra(rho, h) if np.any(center_hamiltonian(h).values) else None
    rows = []
    for p in range(1, p_max + 1):
        exact = central_moment(rho, h, p, allow_large=allow_large)
        rhs = None
        if ctx is not None and p >= 2:
            try:
                rhs = bounds.moment_bound_rhs(p, ctx)
            except ConditionError:
                rhs = None
        g_p = double_factorial(p - 1) * sigma2 ** (p / 2)
        rows.append(MomentRow(p, exact, gaussian_moment(p, sigma2), rhs, g_p))
    meta = {"trace_deficit": rho.trace_deficit}
    return MomentReport(d, p_max, mean(rho, h), sigma2, rows, pure=rho.is_pure, meta=meta)
