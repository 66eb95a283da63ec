"""Spectra of the state and of the Hamiltonian, and functionals of them.

The energy distribution over the unitary orbit depends on rho and H only
through their eigenvalues, so every object here is a plain vector of reals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConditionError, SpectrumError
from .perm_comb import CycleType

DEFAULT_STATE_TOL = 1e-9
CENTERED_TOL = 1e-12
# above this size sums of powers use exactly rounded summation
COMPENSATED_SUM_MIN_D = 10_000

# Seven-level example with the eigenvalues exactly as printed.  The state
# populations sum to 0.979, not 1.
FIG1_HAMILTONIAN = (-1.6, -1.2, -0.6, 0.0, 0.4, 1.3, 1.7)
FIG1_STATE = (0.395, 0.224, 0.151, 0.115, 0.079, 0.0020, 0.013)
FIG1_CAPTION_SIGMA2 = 0.02024
FIG1_CAPTION_ETA = 0.2317
FIG1_STATE_TOL = 0.05


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise SpectrumError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise SpectrumError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HamiltonianSpectrum:
    """Energy eigenvalues of H (any order)."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues, "hamiltonian"))

    @property
    def d(self) -> int:
        return self.eigenvalues.size

    @property
    def values(self) -> np.ndarray:
        return self.eigenvalues


@dataclass(frozen=True, eq=False)
class StateSpectrum:
    """Eigenvalues of a density matrix.

    Populations must be non-negative and sum to one within ``tol``.  A larger
    ``tol`` admits slightly unnormalised input, which is kept as given and
    reported through :attr:`trace_deficit`.
    """

    populations: np.ndarray
    tol: float = DEFAULT_STATE_TOL

    def __post_init__(self):
        arr = _frozen(self.populations, "state")
        if np.any(arr < -self.tol):
            raise SpectrumError("state populations must be non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > self.tol:
            raise SpectrumError(
                f"state populations sum to {total:.12g}, not 1 (tolerance {self.tol:g})"
            )
        object.__setattr__(self, "populations", arr)

    @classmethod
    def pure(cls, d: int) -> "StateSpectrum":
        pops = np.zeros(d)
        pops[0] = 1.0
        return cls(pops)

    @classmethod
    def maximally_mixed(cls, d: int) -> "StateSpectrum":
        return cls(np.full(d, 1.0 / d))

    @property
    def d(self) -> int:
        return self.populations.size

    @property
    def values(self) -> np.ndarray:
        return self.populations

    @property
    def trace(self) -> float:
        return float(self.populations.sum())

    @property
    def trace_deficit(self) -> float:
        return 1.0 - self.trace

    @property
    def is_pure(self) -> bool:
        return bool(np.count_nonzero(self.populations) == 1 and abs(self.trace - 1.0) <= self.tol)


@dataclass(frozen=True, eq=False)
class CenteredSpectrum:
    """A traceless spectrum: H - Tr[H]/d or rho - 1/d.

    ``tol`` bounds |sum| relative to the l1 norm; it is widened only when
    centring a state that was itself admitted with a relaxed trace tolerance.
    """

    deviations: np.ndarray
    tol: float = CENTERED_TOL

    def __post_init__(self):
        arr = _frozen(self.deviations, "centered spectrum")
        scale = float(np.abs(arr).sum())
        if abs(float(arr.sum())) > self.tol * max(scale, 1.0):
            raise SpectrumError("centered spectrum does not sum to zero")
        object.__setattr__(self, "deviations", arr)

    @property
    def d(self) -> int:
        return self.deviations.size

    @property
    def values(self) -> np.ndarray:
        return self.deviations

    def is_zero(self) -> bool:
        return not np.any(self.deviations)


Spectrum = Union[HamiltonianSpectrum, StateSpectrum, CenteredSpectrum, Sequence[float], np.ndarray]


def as_array(theta: Spectrum) -> np.ndarray:
    if isinstance(theta, (HamiltonianSpectrum, StateSpectrum, CenteredSpectrum)):
        return theta.values
    return np.asarray(theta, dtype=float).reshape(-1)


def _sum(x: np.ndarray) -> float:
    if x.size >= COMPENSATED_SUM_MIN_D:
        return math.fsum(x)
    return float(np.sum(x))


def _check_pair(rho: StateSpectrum, h: HamiltonianSpectrum) -> None:
    if rho.d != h.d:
        raise SpectrumError(f"dimension mismatch: state has d={rho.d}, hamiltonian d={h.d}")


def center_hamiltonian(h: HamiltonianSpectrum | Sequence[float]) -> CenteredSpectrum:
    e = as_array(h)
    dev = e - _sum(e) / e.size
    dev = dev - _sum(dev) / dev.size
    return CenteredSpectrum(dev)


def center_state(rho: StateSpectrum | Sequence[float]) -> CenteredSpectrum:
    """rho - 1/d.  Unnormalised input keeps its trace deficit in the result."""
    lam = as_array(rho)
    tol = max(CENTERED_TOL, rho.tol) if isinstance(rho, StateSpectrum) else CENTERED_TOL
    return CenteredSpectrum(lam - 1.0 / lam.size, tol=tol)


def schatten_norm(theta: Spectrum, q: float) -> float:
    if q <= 0:
        raise ConditionError("Schatten norms need q > 0")
    x = np.abs(as_array(theta))
    if not np.any(x):
        return 0.0
    # rescale to avoid overflow for large q
    top = float(x.max())
    return top * _sum((x / top) ** q) ** (1.0 / q)


def power_trace(theta: Spectrum, n: int) -> float:
    """Tr[Theta^n] = sum of n-th powers of the eigenvalues."""
    return _sum(as_array(theta) ** n)


def power_traces(theta: Spectrum, n_max: int) -> np.ndarray:
    """Array t with t[n] = Tr[Theta^n] for n = 0..n_max."""
    x = as_array(theta)
    out = np.empty(n_max + 1)
    acc = np.ones_like(x)
    for n in range(n_max + 1):
        out[n] = _sum(acc)
        acc = acc * x
    return out


def eta(theta: Spectrum) -> float:
    """(||Theta||_3 / ||Theta||_2)^6 for a nonzero spectrum."""
    x = as_array(theta)
    if not np.any(x):
        raise ConditionError("eta is undefined for the zero spectrum")
    x = x / np.abs(x).max()
    return _sum(np.abs(x) ** 3) ** 2 / _sum(x**2) ** 3


def theta_functional(theta: Spectrum, lam: CycleType | Sequence[int]) -> float:
    """Product of Tr[Theta^a] over the cycle lengths a of ``lam``."""
    if not isinstance(lam, CycleType):
        lam = CycleType(lam)
    traces = power_traces(theta, max(lam.parts))
    out = 1.0
    for a in lam.parts:
        out *= traces[a]
    return out


def energy_range(rho: StateSpectrum, h: HamiltonianSpectrum) -> tuple[float, float]:
    """Extremes of Tr[U rho U^dag H] over the unitary orbit.

    The minimum pairs populations in decreasing order with energies in
    increasing order (passive state); the maximum pairs both increasing.
    """
    _check_pair(rho, h)
    lam = np.sort(rho.values, kind="stable")
    eps = np.sort(h.values, kind="stable")
    return _sum(lam[::-1] * eps), _sum(lam * eps)


def orbit_mean(rho: StateSpectrum, h: HamiltonianSpectrum) -> float:
    """Haar average of the energy, Tr[rho] Tr[H] / d."""
    _check_pair(rho, h)
    return rho.trace * _sum(h.values) / h.d


def delta_e_max(rho: StateSpectrum, h: HamiltonianSpectrum) -> float:
    """Largest distance of an orbit endpoint from mu = Tr[H]/d."""
    e_min, e_max = energy_range(rho, h)
    mu = _sum(h.values) / h.d
    return max(abs(e_min - mu), abs(e_max - mu))


def ergotropy_range(
    rho: StateSpectrum, h: HamiltonianSpectrum, e_init: float, atol: float = 1e-12
) -> tuple[float, float]:
    """Return (anti-ergotropy, ergotropy) for a state of mean energy ``e_init``.

    Work is E_init - E_final, so the ergotropy is E_init - E_min and the
    anti-ergotropy is E_init - E_max.
    """
    e_min, e_max = energy_range(rho, h)
    slack = atol * max(1.0, float(np.abs(h.values).max()))
    if not (e_min - slack <= e_init <= e_max + slack):
        raise ConditionError(
            f"initial energy {e_init} lies outside the orbit range [{e_min}, {e_max}]"
        )
    return e_init - e_max, e_init - e_min


def proposition1_bound(theta: CenteredSpectrum | Sequence[float], lam: CycleType | Sequence[int]) -> float:
    """eta^(|lam| - p/2) ||Theta||_2^p for a derangement class, as printed.

    This does not bound |Theta[lam]| in general: for lam = [4] Cauchy-Schwarz
    gives Tr[Theta^4] >= eta ||Theta||_2^4.  See :func:`trace_product_bound`
    for an inequality that does hold.
    """
    if not isinstance(lam, CycleType):
        lam = CycleType(lam)
    if not lam.is_derangement:
        raise ConditionError(f"{lam} is not a derangement class")
    x = as_array(theta)
    norm2 = math.sqrt(_sum(x**2))
    return eta(x) ** (lam.transposition_distance - lam.p / 2) * norm2**lam.p


def trace_product_bound(theta: Spectrum, lam: CycleType | Sequence[int]) -> float:
    """eta^(s/6) ||Theta||_2^p with s the total length of cycles of length >= 3.

    Valid for every derangement class: |Tr[Theta^a]| <= ||Theta||_3^a for
    a >= 3 and Tr[Theta^2] = ||Theta||_2^2.
    """
    if not isinstance(lam, CycleType):
        lam = CycleType(lam)
    if not lam.is_derangement:
        raise ConditionError(f"{lam} is not a derangement class")
    x = as_array(theta)
    norm2 = math.sqrt(_sum(x**2))
    long_cycles = sum(a for a in lam.parts if a >= 3)
    return eta(x) ** (long_cycles / 6) * norm2**lam.p


# ---------------------------------------------------------------------------
# spectrum files


def spectra_from_dict(
    data: dict, state_tol: float = DEFAULT_STATE_TOL
) -> tuple[StateSpectrum, HamiltonianSpectrum]:
    try:
        h = HamiltonianSpectrum(data["hamiltonian"])
        rho = StateSpectrum(data["state"], tol=state_tol)
    except KeyError as exc:
        raise SpectrumError(f"spectrum file lacks the {exc.args[0]!r} field") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpectrumError):
            raise
        raise SpectrumError(f"malformed spectrum data: {exc}") from exc
    _check_pair(rho, h)
    return rho, h


def load_spectra(
    path: str | Path, state_tol: float = DEFAULT_STATE_TOL
) -> tuple[StateSpectrum, HamiltonianSpectrum]:
    """Read ``{"hamiltonian": [...], "state": [...]}`` from a JSON file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpectrumError(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise SpectrumError(f"{path}: {exc.strerror}") from exc
    if not isinstance(data, dict):
        raise SpectrumError(f"{path}: expected a JSON object")
    return spectra_from_dict(data, state_tol)


def save_spectra(path: str | Path, rho: StateSpectrum, h: HamiltonianSpectrum) -> None:
    with open(path, "w") as fh:
        json.dump({"hamiltonian": h.values.tolist(), "state": rho.values.tolist()}, fh, indent=2)


def fig1_spectra() -> tuple[StateSpectrum, HamiltonianSpectrum]:
    """The printed seven-level example, admitted with a relaxed trace tolerance."""
    return StateSpectrum(FIG1_STATE, tol=FIG1_STATE_TOL), HamiltonianSpectrum(FIG1_HAMILTONIAN)
