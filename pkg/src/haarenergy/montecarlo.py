"""Monte Carlo sampling of the energy over Haar-random unitaries.

Random unitaries come from a complex Ginibre matrix followed by QR, with the
columns of Q rotated by the phases of diag(R); without that correction QR
output is not Haar distributed.  Randomness comes from numpy's PCG64:
one ``SeedSequence(seed)`` is spawned into one child stream per worker and the
worker outputs are concatenated in worker order, so a run is reproducible for
a fixed (seed, workers) pair.
"""

from __future__ import annotations

import json
import logging
import math
import os
import secrets
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConditionError, SpectrumError
from .spectral import (
    FIG1_CAPTION_ETA,
    FIG1_CAPTION_SIGMA2,
    DEFAULT_STATE_TOL,
    HamiltonianSpectrum,
    StateSpectrum,
    _check_pair,
    center_hamiltonian,
    energy_range,
    eta,
    fig1_spectra,
)

log = logging.getLogger(__name__)

GENERATOR = "numpy.random.PCG64"
BATCH = 4096
DEFAULT_BOOTSTRAP = 200
RANGE_TOL = 1e-9
# caption values agree with the computed ones when within this relative gap
CAPTION_REL_TOL = 0.02


def default_workers() -> int:
    env = os.environ.get("HAARENERGY_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring HAARENERGY_WORKERS=%r", env)
    return 1


def haar_unitaries(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of n Haar-random d x d unitaries, shape (n, d, d)."""
    if d < 1:
        raise ConditionError("d must be at least 1")
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitaries(1, d, rng)[0]


def _energies(u: np.ndarray, eps: np.ndarray, lam: np.ndarray) -> np.ndarray:
    w = u.real**2 + u.imag**2
    return np.einsum("nij,i,j->n", w, eps, lam, optimize=True)


def _worker(n: int, seq: np.random.SeedSequence, d: int, eps: np.ndarray, lam: np.ndarray) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seq))
    out = np.empty(n)
    for start in range(0, n, BATCH):
        stop = min(start + BATCH, n)
        out[start:stop] = _energies(haar_unitaries(stop - start, d, rng), eps, lam)
    return out


@dataclass
class SampleRun:
    seed: int
    d: int
    n_samples: int
    energies: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "d": self.d,
            "n_samples": self.n_samples,
            "energies": self.energies.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleRun":
        try:
            energies = np.asarray(data["energies"], dtype=float)
            run = cls(int(data["seed"]), int(data["d"]), int(data["n_samples"]), energies, dict(data.get("meta", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise SpectrumError(f"malformed sample run: {exc}") from exc
        if run.energies.size != run.n_samples:
            raise SpectrumError("sample run length does not match n_samples")
        return run

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str | Path) -> "SampleRun":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise SpectrumError(f"{path}: not valid JSON ({exc})") from exc
        except OSError as exc:
            raise SpectrumError(f"{path}: {exc.strerror}") from exc


def sample_energy(
    rho: StateSpectrum,
    h: HamiltonianSpectrum,
    n: int,
    seed: int | None = None,
    workers: int | None = None,
) -> SampleRun:
    """Draw n energies Tr[U rho U^dag H] with Haar U.

    Omitting ``seed`` draws a fresh 64-bit seed from system entropy; it is
    recorded on the returned run.
    """
    from .moments import mean, variance

    _check_pair(rho, h)
    if n < 1:
        raise ConditionError("need at least one sample")
    if seed is None:
        seed = secrets.randbits(64)
    workers = workers or default_workers()
    workers = max(1, min(workers, n))
    sizes = [n // workers + (1 if i < n % workers else 0) for i in range(workers)]
    seqs = np.random.SeedSequence(seed).spawn(workers)
    eps, lam = h.values, rho.values
    t0 = time.perf_counter()
    if workers == 1:
        parts = [_worker(sizes[0], seqs[0], h.d, eps, lam)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda i: _worker(sizes[i], seqs[i], h.d, eps, lam), range(workers)))
    energies = np.concatenate(parts)
    wall = time.perf_counter() - t0

    e_min, e_max = energy_range(rho, h)
    slack = RANGE_TOL * max(1.0, float(np.abs(eps).max()))
    if energies.min() < e_min - slack or energies.max() > e_max + slack:
        raise AssertionError(
            f"sampled energy outside [{e_min}, {e_max}]: [{energies.min()}, {energies.max()}]"
        )
    dh = center_hamiltonian(h)
    meta = {
        "mu": mean(rho, h),
        "exact_sigma2": variance(rho, h),
        "eta": None if dh.is_zero() else eta(dh),
        "wall_time": wall,
        "workers": workers,
        "generator": GENERATOR,
        "e_range": [e_min, e_max],
    }
    energies.setflags(write=False)
    return SampleRun(int(seed), h.d, n, energies, meta)


# ---------------------------------------------------------------------------
# estimators


def _bootstrap_weights(n: int, n_boot: int, rng: np.random.Generator):
    """Yield multinomial resampling counts, one vector per bootstrap replicate."""
    probs = np.full(n, 1.0 / n)
    for _ in range(n_boot):
        yield rng.multinomial(n, probs).astype(float)


def _central_from_sums(sums: np.ndarray, total: float, p_max: int) -> np.ndarray:
    raw = sums / total
    m = raw[1]
    out = np.zeros(p_max + 1)
    for p in range(1, p_max + 1):
        out[p] = sum(math.comb(p, j) * raw[j] * (-m) ** (p - j) for j in range(p + 1))
    return out


def empirical_moments(
    run: SampleRun, p_max: int = 4, n_boot: int = DEFAULT_BOOTSTRAP, seed: int = 0
) -> list[tuple[int, float, float]]:
    """(p, central moment about the sample mean, bootstrap SE) for p = 1..p_max."""
    x = np.asarray(run.energies, dtype=float)
    x = x - x.mean()
    powers = np.vstack([x**j for j in range(p_max + 1)])
    point = _central_from_sums(powers.sum(axis=1), x.size, p_max)
    rng = np.random.default_rng(seed)
    reps = np.array(
        [_central_from_sums(powers @ w, x.size, p_max) for w in _bootstrap_weights(x.size, n_boot, rng)]
    )
    se = reps.std(axis=0, ddof=1) if n_boot > 1 else np.zeros(p_max + 1)
    return [(p, float(point[p]), float(se[p])) for p in range(1, p_max + 1)]


def _center(run: SampleRun, center: str) -> np.ndarray:
    x = np.asarray(run.energies, dtype=float)
    if center == "sample":
        return x - x.mean()
    if center == "exact":
        return x - run.meta["mu"]
    raise ValueError(f"unknown centring {center!r}")


def empirical_mgf(
    run: SampleRun,
    t_grid,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: int = 0,
    center: str = "exact",
) -> list[tuple[float, float, float]]:
    """(t, mean of exp(t (E - mu)), bootstrap SE) on each grid point."""
    x = _center(run, center)
    t = np.asarray(t_grid, dtype=float)
    vals = np.exp(np.outer(t, x))
    point = vals.mean(axis=1)
    rng = np.random.default_rng(seed)
    reps = np.array([vals @ w for w in _bootstrap_weights(x.size, n_boot, rng)]) / x.size
    se = reps.std(axis=0, ddof=1)
    return [(float(a), float(b), float(c)) for a, b, c in zip(t, point, se)]


def empirical_cf(
    run: SampleRun,
    t_grid,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: int = 0,
    center: str = "sample",
) -> list[tuple[float, float, float, float]]:
    """(t, Re, Im, SE) of the sample average of exp(-i t (E - E_bar))."""
    x = _center(run, center)
    t = np.asarray(t_grid, dtype=float)
    phase = np.outer(t, x)
    c, s = np.cos(phase), -np.sin(phase)
    re, im = c.mean(axis=1), s.mean(axis=1)
    rng = np.random.default_rng(seed)
    reps_re, reps_im = [], []
    for w in _bootstrap_weights(x.size, n_boot, rng):
        reps_re.append(c @ w / x.size)
        reps_im.append(s @ w / x.size)
    se = np.hypot(np.std(reps_re, axis=0, ddof=1), np.std(reps_im, axis=0, ddof=1))
    return [(float(a), float(b), float(c_), float(e)) for a, b, c_, e in zip(t, re, im, se)]


# ---------------------------------------------------------------------------
# histograms


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())

    def integral(self) -> float:
        return float(np.sum(self.density * np.diff(self.bin_edges)))


def histogram(run: SampleRun, bins="fd") -> Histogram:
    """Density histogram; Freedman-Diaconis bin width unless ``bins`` says otherwise."""
    x = np.asarray(run.energies, dtype=float)
    edges = np.histogram_bin_edges(x, bins=bins)
    counts, edges = np.histogram(x, bins=edges)
    density = counts / (x.size * np.diff(edges))
    return Histogram(edges, counts, density)


def gaussian_overlay(mu: float, sigma2: float, grid) -> np.ndarray:
    """Normal pdf with mean mu and variance sigma2 evaluated on grid."""
    if sigma2 <= 0:
        raise ConditionError("the gaussian overlay needs a positive variance")
    g = np.asarray(grid, dtype=float)
    return np.exp(-((g - mu) ** 2) / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2)


@dataclass
class Fig1Bundle:
    histogram: Histogram
    overlay: np.ndarray
    meta: dict
    run: SampleRun

    CSV_HEADER = ("bin_center", "density", "gaussian_density")

    def csv_rows(self) -> list[tuple[str, str, str]]:
        return [
            (repr(float(c)), repr(float(dn)), repr(float(g)))
            for c, dn, g in zip(self.histogram.bin_centers, self.histogram.density, self.overlay)
        ]


def reproduce_fig1(seed: int | None = None, n: int = 100_000, workers: int | None = None, n_boot: int = DEFAULT_BOOTSTRAP) -> Fig1Bundle:
    """Sample the printed seven-level example and compare with its caption."""
    from .moments import central_moment

    rho, h = fig1_spectra()
    run = sample_energy(rho, h, n, seed=seed, workers=workers)
    hist = histogram(run)
    sigma2 = run.meta["exact_sigma2"]
    overlay = gaussian_overlay(run.meta["mu"], sigma2, hist.bin_centers)
    moments = empirical_moments(run, 2, n_boot=n_boot)
    _, emp_var, emp_se = moments[1]
    rel = abs(sigma2 - FIG1_CAPTION_SIGMA2) / FIG1_CAPTION_SIGMA2
    meta = {
        "seed": run.seed,
        "n_samples": n,
        "eta": run.meta["eta"],
        "eta_caption": FIG1_CAPTION_ETA,
        "eta_delta": run.meta["eta"] - FIG1_CAPTION_ETA,
        "sigma2": sigma2,
        "sigma2_caption": FIG1_CAPTION_SIGMA2,
        "sigma2_rel_delta": rel,
        "sigma2_caption_agrees": rel <= CAPTION_REL_TOL,
        "state_trace_deficit": rho.trace_deficit,
        "state_typo_flag": abs(rho.trace_deficit) > DEFAULT_STATE_TOL,
        "sigma2_haar_exact": central_moment(rho, h, 2),
        "empirical_variance": emp_var,
        "empirical_variance_se": emp_se,
    }
    return Fig1Bundle(hist, overlay, meta, run)
