"""Class multiplication counts for S_p.

For class representatives r_m and classes l, k of S_p the tensor

    K[m, l, k] = #{ sigma in class l : sigma∘r_m^{-1} in class k }

depends on p only.  It turns every double sum over S_p x S_p of a product of
class functions into a contraction over partitions, which is how both the
Weingarten Gram system and the exact moment sums are evaluated.  K is built
once per p by enumerating S_p in chunks with numpy and is cached in memory
and on disk.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import ResourceCapError
from .perm_comb import P_CAP, CycleType, class_representative, partitions, _check_p

log = logging.getLogger(__name__)

CHUNK_ROWS = 1 << 17
# beyond this degree an on-the-fly enumeration is slow enough to need opting in
ENUMERATION_CAP = 10


def cache_dir() -> Path | None:
    """Directory for persisted count tensors, or None when disabled.

    Controlled by ``HAARENERGY_CACHE``; set it to an empty string to disable
    the disk cache.
    """
    env = os.environ.get("HAARENERGY_CACHE")
    if env is not None:
        return Path(env) if env else None
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "haarenergy"


def permutation_chunks(p: int, rows: int = CHUNK_ROWS):
    """Yield all of S_p (0-based one-line notation) as int8 arrays."""
    it = itertools.permutations(range(p))
    while True:
        block = list(itertools.islice(it, rows))
        if not block:
            return
        yield np.array(block, dtype=np.int8)


def _class_keys(p: int) -> np.ndarray:
    base = np.int64(p + 1)
    out = []
    for lam in partitions(p):
        key = np.int64(0)
        for a in lam.parts:
            key += np.int64(a) * base ** np.int64(a)
        out.append(key)
    return np.array(out, dtype=np.int64)


class _Classifier:
    """Vectorised cycle-type lookup for stacks of permutations of degree p."""

    def __init__(self, p: int):
        self.p = p
        self.powers = (np.int64(p + 1) ** np.arange(p + 1, dtype=np.int64)).astype(np.int64)
        keys = _class_keys(p)
        self.order = np.argsort(keys)
        self.sorted_keys = keys[self.order]

    def cycle_lengths(self, perms: np.ndarray) -> np.ndarray:
        n, p = perms.shape
        flat = perms.astype(np.intp).ravel()
        rowbase = (np.arange(n, dtype=np.intp) * p)[:, None]
        target = np.arange(p, dtype=np.intp)[None, :]
        cur = perms.astype(np.intp)
        lengths = np.zeros((n, p), dtype=np.int8)
        for k in range(1, p + 1):
            hit = (cur == target) & (lengths == 0)
            lengths[hit] = k
            if k < p:
                cur = flat[rowbase + cur]
        return lengths

    def classify(self, perms: np.ndarray) -> np.ndarray:
        keys = self.powers[self.cycle_lengths(perms)].sum(axis=1)
        pos = np.searchsorted(self.sorted_keys, keys)
        return self.order[pos]


def _lex_ranks(perms: np.ndarray, factorials: np.ndarray) -> np.ndarray:
    """Lexicographic rank (Lehmer code) of each row."""
    n, p = perms.shape
    rank = np.zeros(n, dtype=np.int64)
    for i in range(p - 1):
        smaller = (perms[:, i + 1 :] < perms[:, i : i + 1]).sum(axis=1)
        rank += smaller.astype(np.int64) * factorials[p - 1 - i]
    return rank


def _compute_counts(p: int) -> np.ndarray:
    classes = partitions(p)
    nc = len(classes)
    clf = _Classifier(p)
    # itertools.permutations yields S_p in lexicographic order
    lex_class = np.concatenate(
        [clf.classify(chunk).astype(np.int16) for chunk in permutation_chunks(p)]
    )
    factorials = np.array([math.factorial(n) for n in range(p + 1)], dtype=np.int64)
    inv_reps = []
    for lam in classes:
        rep = class_representative(lam)
        inv = [0] * p
        for i, r in enumerate(rep):
            inv[r] = i
        inv_reps.append(np.array(inv, dtype=np.intp))
    counts = np.zeros((nc, nc * nc), dtype=np.int64)
    start = 0
    for chunk in permutation_chunks(p):
        own = lex_class[start : start + len(chunk)].astype(np.intp) * nc
        start += len(chunk)
        for m, inv in enumerate(inv_reps):
            # (sigma∘r^{-1})(i) = sigma(r^{-1}(i)): reorder columns
            prod = lex_class[_lex_ranks(chunk[:, inv], factorials)]
            counts[m] += np.bincount(own + prod, minlength=nc * nc)
    return counts.reshape(nc, nc, nc)


def _disk_path(p: int) -> Path | None:
    d = cache_dir()
    return None if d is None else d / f"class_counts_p{p}.npy"


@lru_cache(maxsize=None)
def class_product_counts(p: int, allow_large: bool = False) -> np.ndarray:
    """Return the read-only count tensor K for S_p (see module docstring).

    Indices follow the order of :func:`haarenergy.perm_comb.partitions`.
    Degrees above 10 need ``allow_large=True`` unless a cached tensor exists.
    """
    _check_p(p, P_CAP)
    path = _disk_path(p)
    if path is not None and path.exists():
        try:
            counts = np.load(path)
            nc = len(partitions(p))
            if counts.shape == (nc, nc, nc):
                counts.setflags(write=False)
                return counts
        except (OSError, ValueError):
            log.warning("ignoring unreadable class count cache %s", path)
    if p > ENUMERATION_CAP and not allow_large:
        raise ResourceCapError(
            f"enumerating S_{p} is expensive; pass allow_large=True to build it"
        )
    counts = _compute_counts(p)
    if path is not None:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(f".{os.getpid()}.tmp.npy")
            np.save(tmp, counts)
            os.replace(tmp, path)
        except OSError:
            log.info("could not write class count cache to %s", path)
    counts.setflags(write=False)
    return counts


def class_index(p: int) -> dict[CycleType, int]:
    return {lam: i for i, lam in enumerate(partitions(p))}
