"""Seeded random generation of transition structures and automata.

Every generator is a pure function of its parameters and a seed. Seeds are
either plain integers or :class:`numpy.random.SeedSequence` objects; per-trial
and per-object substreams are derived with ``spawn_key`` so that parallel
trials never share RNG state.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import AlmostDetAutomaton, ParameterError, TransitionStructure

Seed = Union[int, np.random.SeedSequence]


def seed_sequence(seed: Seed, *tags: int | str) -> np.random.SeedSequence:
    """Derive a child seed sequence for ``(seed, *tags)``.

    String tags are hashed with CRC32, which is stable across platforms and
    interpreter runs (unlike ``hash``).
    """
    if isinstance(seed, np.random.SeedSequence):
        base_entropy, base_key = seed.entropy, tuple(seed.spawn_key)
    else:
        if seed < 0:
            raise ParameterError("seed must be a non-negative integer")
        base_entropy, base_key = int(seed), ()
    key = tuple(zlib.crc32(t.encode()) if isinstance(t, str) else int(t) for t in tags)
    return np.random.SeedSequence(base_entropy, spawn_key=base_key + key)


def make_rng(seed: Seed, *tags: int | str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *tags)))


def trial_seed(master: int, index: int) -> np.random.SeedSequence:
    """Seed of trial ``index`` under master seed ``master``."""
    return seed_sequence(master, index)


# -- Poisson sampling --------------------------------------------------------

_INVERSION_MAX_LAMBDA = 10.0
_cdf_cache: dict[float, np.ndarray] = {}


def _poisson_cdf(lam: float) -> np.ndarray:
    cdf = _cdf_cache.get(lam)
    if cdf is None:
        pmf = [math.exp(-lam)]
        k = 0
        # extend until the remaining tail is below double precision
        while sum(pmf) < 1.0 - 1e-17 and k < 200:
            k += 1
            pmf.append(pmf[-1] * lam / k)
        cdf = np.cumsum(pmf)
        cdf[-1] = max(cdf[-1], 1.0)
        _cdf_cache[lam] = cdf
    return cdf


def poisson(rng: np.random.Generator, lam: float, size=None):
    """Poisson variates; inversion of the CDF for ``lam <= 10``."""
    if lam < 0:
        raise ParameterError("Poisson parameter must be non-negative")
    if lam == 0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    if lam > _INVERSION_MAX_LAMBDA:
        return rng.poisson(lam, size)
    cdf = _poisson_cdf(float(lam))
    u = rng.random(size)
    out = np.searchsorted(cdf, u, side="right")
    return int(out) if size is None else out.astype(np.int64)


# -- automata ----------------------------------------------------------------


def gen_structure(n: int, k: int = 2, seed: Seed = 0) -> TransitionStructure:
    """Uniform random complete transition structure with ``n`` states, ``k`` letters."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if k < 2:
        raise ParameterError("k must be >= 2")
    rng = make_rng(seed, "structure")
    # Generator.integers is unbiased (Lemire rejection), not a modulo reduction
    return TransitionStructure(rng.integers(0, n, size=(n, k), dtype=np.int64))


def gen_almost_det(n: int, k: int = 2, f: float = 0.5, seed: Seed = 0) -> AlmostDetAutomaton:
    """Random almost deterministic automaton: uniform structure, uniform ``p``, ``q``,
    ``i0`` and i.i.d. Bernoulli(f) final states.

    The structure, the extra edge, the initial state and the final states come
    from independent substreams, so changing ``f`` leaves the rest unchanged.
    """
    if not 0.0 <= f <= 1.0:
        raise ParameterError(f"final probability {f} outside [0, 1]")
    base = gen_structure(n, k, seed)
    p, q = (int(v) for v in make_rng(seed, "extra").integers(0, n, size=2))
    i0 = int(make_rng(seed, "initial").integers(0, n))
    finals = make_rng(seed, "finals").random(n) < f
    return AlmostDetAutomaton(base, p, q, i0, finals)


def final_prob_schedule(n: int, mode: str = "constant", value: float = 0.5) -> float:
    """Final-state probability ``f_n``.

    ``constant``: ``value``; ``sqrt_low``: ``min(value/sqrt(n), 1/2)``;
    ``sqrt_high``: ``1 - min(value/sqrt(n), 1/2)``.
    """
    if mode == "constant":
        if not 0.0 < value < 1.0:
            raise ParameterError("constant final probability must lie in (0, 1)")
        return float(value)
    if value <= 0:
        raise ParameterError("alpha must be positive")
    low = min(value / math.sqrt(n), 0.5)
    if mode == "sqrt_low":
        return low
    if mode == "sqrt_high":
        return 1.0 - low
    raise ParameterError(f"unknown final-probability mode {mode!r}")


@dataclass(frozen=True, eq=False)
class DenseNfa:
    """NFA given by a boolean relation ``edges[state, letter, target]``."""

    edges: np.ndarray
    initial: int

    @property
    def n(self) -> int:
        return self.edges.shape[0]

    @property
    def k(self) -> int:
        return self.edges.shape[1]

    def targets(self, state: int, letter: int) -> tuple[int, ...]:
        return tuple(int(t) for t in np.flatnonzero(self.edges[state, letter]))


def gen_dense_nfa(n: int, k: int = 2, edge_prob: float = 0.5, seed: Seed = 0) -> DenseNfa:
    """Each of the ``n*k*n`` possible transitions present independently."""
    if not 0.0 < edge_prob < 1.0:
        raise ParameterError("edge_prob must lie in (0, 1)")
    if n < 1 or k < 1:
        raise ParameterError("n and k must be positive")
    edges = make_rng(seed, "dense-edges").random((n, k, n)) < edge_prob
    initial = int(make_rng(seed, "dense-initial").integers(0, n))
    edges.setflags(write=False)
    return DenseNfa(edges, initial)
