"""Binary words attached to one-letter cycles, and coprimality utilities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .core import ParameterError
from .randgen import Seed, make_rng


def as_word(w: str | Sequence[int]) -> str:
    """Normalize a binary word to a ``'0'/'1'`` string; words must be nonempty."""
    s = w if isinstance(w, str) else "".join(str(int(b)) for b in w)
    if not s or set(s) - {"0", "1"}:
        raise ParameterError(f"not a nonempty binary word: {w!r}")
    return s


def border_array(w: str) -> list[int]:
    """``border[i]`` is the length of the longest proper border of ``w[:i+1]``."""
    border = [0] * len(w)
    j = 0
    for i in range(1, len(w)):
        while j and w[i] != w[j]:
            j = border[j - 1]
        if w[i] == w[j]:
            j += 1
        border[i] = j
    return border


def smallest_period(w: str | Sequence[int]) -> int:
    w = as_word(w)
    return len(w) - border_array(w)[-1]


def is_primitive(w: str | Sequence[int]) -> bool:
    """True iff ``w`` is not ``z**k`` for some ``k >= 2``."""
    w = as_word(w)
    period = len(w) - border_array(w)[-1]
    return not (period < len(w) and len(w) % period == 0)


def rotate(w: str, j: int) -> str:
    j %= len(w)
    return w[j:] + w[:j]


def odot(w1: str | Sequence[int], w2: str | Sequence[int]) -> str:
    """Cyclic OR of two binary words, of length ``lcm(|w1|, |w2|)``."""
    w1, w2 = as_word(w1), as_word(w2)
    length = math.lcm(len(w1), len(w2))
    l1, l2 = len(w1), len(w2)
    return "".join("1" if w1[i % l1] == "1" or w2[i % l2] == "1" else "0" for i in range(length))


def cycle_binary_word(cycle: Sequence[int], finals) -> str:
    """Bit ``i`` is 1 iff ``cycle[i]`` is final; ``finals`` is a bitset or a set of ids."""
    if not cycle:
        raise ParameterError("cycle must be nonempty")
    if len(set(cycle)) != len(cycle):
        raise ParameterError("cycle states must be distinct")
    if isinstance(finals, np.ndarray) and finals.dtype == bool:
        return "".join("1" if finals[x] else "0" for x in cycle)
    fs = set(finals)
    return "".join("1" if x in fs else "0" for x in cycle)


def pairwise_coprime(t: Iterable[int]) -> bool:
    t = _check_tuple(t)
    for i in range(len(t)):
        for j in range(i + 1, len(t)):
            if math.gcd(t[i], t[j]) != 1:
                return False
    return True


def lcm_tuple(t: Iterable[int]) -> int:
    return reduce(math.lcm, _check_tuple(t), 1)


def _check_tuple(t: Iterable[int]) -> tuple[int, ...]:
    t = tuple(int(v) for v in t)
    if not t:
        raise ParameterError("empty tuple")
    if min(t) < 1:
        raise ParameterError("entries must be >= 1")
    return t


def primes_up_to(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve)


@dataclass(frozen=True)
class TothEstimate:
    """Truncated Euler product and a bracket ``[lower, upper]`` containing ``A_k``.

    Every factor lies in ``[exp(-k^2/p^2), 1]``, so the primes above the cutoff
    shrink the product by at most ``exp(-k^2/cutoff)``.
    """

    k: int
    cutoff: int
    value: float
    lower: float

    @property
    def upper(self) -> float:
        return self.value

    def __float__(self):
        return self.value


def toth_constant(k: int, prime_cutoff: int = 10**6) -> TothEstimate:
    """Limit probability that ``k`` uniform integers are pairwise coprime,
    as a product over primes ``p <= prime_cutoff``."""
    if k < 2 or prime_cutoff < 2:
        raise ParameterError("need k >= 2 and prime_cutoff >= 2")
    p = primes_up_to(prime_cutoff).astype(np.float64)
    log_terms = np.log1p(k / (p - 1.0)) + k * np.log1p(-1.0 / p)
    value = math.exp(math.fsum(log_terms.tolist()))
    lower = value * math.exp(-(k * k) / prime_cutoff)
    return TothEstimate(k, prime_cutoff, value, lower)


def sample_conditioned_word(rng: np.random.Generator, length: int, f: float) -> str:
    """Bernoulli(f) word of the given length, resampled while it is constant."""
    while True:
        bits = rng.random(length) < f
        if bits.any() and not bits.all():
            return "".join("1" if b else "0" for b in bits)


def nonprimitive_rate_check(length: int, samples: int, f: float = 0.5, seed: Seed = 0) -> float:
    """Frequency of non-primitive words among Bernoulli(f) words of the given
    length conditioned on not being ``0^l`` or ``1^l``."""
    if length < 2:
        raise ParameterError("length must be >= 2")
    if not 0.0 < f < 1.0:
        raise ParameterError("f must lie in (0, 1)")
    rng = make_rng(seed, "words")
    bad = sum(not is_primitive(sample_conditioned_word(rng, length, f)) for _ in range(samples))
    return bad / samples
