"""Structural probes on a fixed transition structure.

The pipeline is: backward substructure around ``p``, forward traversal from
``delta(p, a)`` back into it (giving a word ``w`` with ``delta(p, a w) = p``),
the ``w (a w)^(d-1)`` path from ``q`` giving starting states, and finally the
``b``-threads from those states, whose cycle lengths are the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import ContractError, DomainError, ParameterError, TransitionStructure, format_word
from .words import lcm_tuple

A, B = 0, 1

SUCCESS = "Success"
HIT_INNER_SUPPORT = "HitInnerSupport"
COLLISION = "Collision"
TOO_LONG = "TooLong"

NOT_DISJOINT = "NotDisjoint"
ALREADY_SEEN = "AlreadySeen"
LENGTH_OUT_OF_RANGE = "LengthOutOfRange"


# -- exact integer bounds ------------------------------------------------------


def depth_for(n: int) -> int:
    """``ceil(log2 sqrt(n))``, i.e. the smallest ``h >= 0`` with ``4^h >= n``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    h = 0
    while 4**h < n:
        h += 1
    return h


def ceil_sqrt(n: int) -> int:
    return math.isqrt(n - 1) + 1 if n > 0 else 0


def sqrt_interval(n: int, lo: int, hi: int) -> tuple[int, int]:
    """Integer range ``[lo sqrt(n), hi sqrt(n)] ∩ Z`` as ``(min, max)``, for integer factors."""
    return ceil_sqrt(lo * lo * n), math.isqrt(hi * hi * n)


# -- backward substructure ----------------------------------------------------


def _preimages(s: TransitionStructure) -> tuple[np.ndarray, np.ndarray]:
    """CSR layout of the reverse graph: sources of ``y`` are ``src[ptr[y]:ptr[y+1]]``
    as flattened ``state * k + letter`` codes, in increasing order."""
    flat = s.delta.ravel()
    order = np.argsort(flat, kind="stable")
    ptr = np.zeros(s.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat, minlength=s.n), out=ptr[1:])
    return ptr, order


@dataclass(frozen=True, eq=False)
class BackwardSubstructure:
    """States at backward distance ``<= h`` from ``root`` with their shortest-path edges.

    ``dist[x]`` is the backward distance of ``x`` when it is at most ``h`` and
    ``-1`` otherwise. ``edges`` maps ``(x, letter)`` to ``delta(x, letter)``
    for exactly the transitions that decrease the distance by one.
    """

    root: int
    h: int
    layers: tuple[tuple[int, ...], ...]
    edges: dict
    dist: np.ndarray = field(repr=False)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(x for layer in self.layers for x in layer)

    @property
    def support_size(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @property
    def last_layer(self) -> tuple[int, ...]:
        return self.layers[self.h]

    def in_support(self, x: int) -> bool:
        return self.dist[x] >= 0


def backward_substructure(s: TransitionStructure, p: int, h: int) -> BackwardSubstructure:
    if not 0 <= p < s.n:
        raise DomainError(f"state {p} out of range")
    if h < 0:
        raise ParameterError("h must be >= 0")
    k = s.k
    ptr, src = _preimages(s)
    dist = np.full(s.n, -1, dtype=np.int64)
    dist[p] = 0
    layers = [[p]]
    for t in range(1, h + 1):
        nxt = []
        for y in layers[-1]:
            for code in src[ptr[y] : ptr[y + 1]]:
                x = int(code) // k
                if dist[x] < 0:
                    dist[x] = t
                    nxt.append(x)
        layers.append(nxt)
    edges = {}
    for t in range(1, h + 1):
        for x in layers[t]:
            for c in range(k):
                y = int(s.delta[x, c])
                if dist[y] == t - 1:
                    edges[(x, c)] = y
    dist.setflags(write=False)
    return BackwardSubstructure(p, h, tuple(tuple(sorted(layer)) for layer in layers), edges, dist)


def backward_valid(bs: BackwardSubstructure, n: int, d1: float = 4.0, d2: float = 0.5) -> bool:
    """``|support| <= d1 sqrt(n)`` and ``|L_h| >= d2 sqrt(n)``, both inclusive."""
    size, last = bs.support_size, len(bs.last_layer)
    # exact squared comparisons on the decimal values of d1, d2
    f1, f2 = Fraction(repr(float(d1))), Fraction(repr(float(d2)))
    return size * size <= f1 * f1 * n and last * last >= f2 * f2 * n


# -- forward process ----------------------------------------------------------


@dataclass(frozen=True)
class ForwardOutcome:
    verdict: str
    steps: int
    hit_state: Optional[int]
    visited: tuple[int, ...]

    @property
    def success(self) -> bool:
        return self.verdict == SUCCESS


def word_of_index(i: int, k: int = 2) -> list[int]:
    """The ``i``-th word in length-lexicographic order (``0 -> ε, 1 -> a, 2 -> b, 3 -> aa``)."""
    out = []
    while i > 0:
        out.append((i - 1) % k)
        i = (i - 1) // k
    return out[::-1]


def forward_process(s: TransitionStructure, p: int, bs: BackwardSubstructure) -> ForwardOutcome:
    """Visit ``r_i = delta(delta(p, a), u_i)`` until the first halting case."""
    k = s.k
    limit = ceil_sqrt(s.n)
    dist, h = bs.dist, bs.h
    visited: list[int] = []
    seen: set[int] = set()
    i = 0
    while True:
        if i == limit:
            return ForwardOutcome(TOO_LONG, i, None, tuple(visited))
        if i == 0:
            x = int(s.delta[p, A])
        else:
            x = int(s.delta[visited[(i - 1) // k], (i - 1) % k])
        visited.append(x)
        if dist[x] == h:
            return ForwardOutcome(SUCCESS, i, x, tuple(visited))
        if dist[x] >= 0:
            return ForwardOutcome(HIT_INNER_SUPPORT, i, None, tuple(visited))
        if x in seen:
            return ForwardOutcome(COLLISION, i, None, tuple(visited))
        seen.add(x)
        i += 1


def backward_path_word(s: TransitionStructure, bs: BackwardSubstructure, start: int) -> list[int]:
    """Length-lex smallest label of a shortest path from ``start`` to the root inside ``bs``."""
    if bs.dist[start] < 0:
        raise ContractError("start state is outside the substructure")
    word, x = [], start
    while x != bs.root:
        c = min(c for c in range(s.k) if (x, c) in bs.edges)
        word.append(c)
        x = bs.edges[(x, c)]
    return word


def cycle_word(s: TransitionStructure, p: int, bs: BackwardSubstructure, out: ForwardOutcome) -> list[int]:
    """Word ``w = u_i v`` with ``delta(p, a w) = p``."""
    if not out.success:
        raise ContractError(f"cycle_word needs a successful forward process, got {out.verdict}")
    return word_of_index(out.steps, s.k) + backward_path_word(s, bs, out.hit_state)


# -- starting states and threads ------------------------------------------------


def walk(s: TransitionStructure, start: int, word: Sequence[int]) -> list[int]:
    """States ``x_0 = start, x_1, ..., x_|word|`` along ``word``."""
    path = [start]
    for c in word:
        path.append(int(s.delta[path[-1], c]))
    return path


def starting_word(w: Sequence[int], d: int) -> list[int]:
    """``w (a w)^(d-1)``."""
    if d < 1:
        raise ParameterError("d must be >= 1")
    return list(w) + ([A] + list(w)) * (d - 1)


def starting_states(s: TransitionStructure, p: int, q: int, w: Sequence[int], d: int, seen) -> Optional[tuple[int, ...]]:
    """``(p, delta(q, w), delta(q, w a w), ...)`` or ``None`` when the
    ``w (a w)^(d-1)`` path from ``q`` meets ``seen`` or repeats a state."""
    path = walk(s, q, starting_word(w, d))
    if len(set(path)) != len(path) or any(x in seen for x in path):
        return None
    step = len(w) + 1
    return (p,) + tuple(path[len(w) + j * step] for j in range(d))


@dataclass(frozen=True)
class ThreadOutcome:
    ok: bool
    reason: Optional[str] = None
    lambdas: tuple[int, ...] = ()
    tails: tuple[int, ...] = ()
    cycles: tuple[int, ...] = ()
    threads: tuple[tuple[int, ...], ...] = ()


def thread_process(s: TransitionStructure, starters: Sequence[int], seen) -> ThreadOutcome:
    """Follow ``b`` from each starter until its thread closes into a cycle.

    Fails when a thread enters an earlier thread, enters ``seen`` before
    closing on itself, or closes with a size outside ``[2 sqrt(n), 3 sqrt(n)]``.
    The starters themselves may belong to ``seen``.
    """
    lo, hi = sqrt_interval(s.n, 2, 3)
    owner: dict[int, int] = {}
    threads, lambdas, tails, cycles = [], [], [], []
    for i, start in enumerate(starters):
        if start in owner:
            return ThreadOutcome(False, NOT_DISJOINT, tuple(lambdas), tuple(tails), tuple(cycles), tuple(threads))
        pos = {start: 0}
        thread = [start]
        x = start
        while True:
            y = int(s.delta[x, B])
            if y in owner:
                return ThreadOutcome(False, NOT_DISJOINT, tuple(lambdas), tuple(tails), tuple(cycles), tuple(threads))
            if y in pos:
                break
            if y in seen:
                return ThreadOutcome(False, ALREADY_SEEN, tuple(lambdas), tuple(tails), tuple(cycles), tuple(threads))
            pos[y] = len(thread)
            thread.append(y)
            x = y
        lam = len(thread)
        lambdas.append(lam)
        tails.append(pos[y])
        cycles.append(lam - pos[y])
        threads.append(tuple(thread))
        if not lo <= lam <= hi:
            return ThreadOutcome(False, LENGTH_OUT_OF_RANGE, tuple(lambdas), tuple(tails), tuple(cycles), tuple(threads))
        for z in thread:
            owner[z] = i
    return ThreadOutcome(True, None, tuple(lambdas), tuple(tails), tuple(cycles), tuple(threads))


# -- full pipeline ----------------------------------------------------------------


@dataclass(frozen=True)
class ProbeReport:
    """Stage-by-stage record of one pipeline run; ``ell`` is ``None`` unless every stage passed."""

    n: int
    d: int
    h: int
    stage: str
    support_size: int
    last_layer_size: int
    backward_ok: bool
    forward_verdict: Optional[str] = None
    forward_steps: Optional[int] = None
    word: Optional[str] = None
    starting: Optional[tuple[int, ...]] = None
    thread_reason: Optional[str] = None
    lambdas: tuple[int, ...] = ()
    cycles: tuple[int, ...] = ()
    ell: Optional[tuple[int, ...]] = None

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "h": self.h,
            "stage": self.stage,
            "support_size": self.support_size,
            "last_layer_size": self.last_layer_size,
            "backward_ok": self.backward_ok,
            "forward_verdict": self.forward_verdict,
            "forward_steps": self.forward_steps,
            "word_length": None if self.word is None else len(self.word),
            "word": self.word,
            "thread_reason": self.thread_reason,
            "lambdas": list(self.lambdas),
            "cycles": list(self.cycles),
            "ell": None if self.ell is None else list(self.ell),
        }


STAGES = ("backward", "forward", "threads", "full")


def probe(
    s: TransitionStructure,
    p: int,
    q: int,
    d: int = 1,
    d1: float = 4.0,
    d2: float = 0.5,
    until: str = "full",
) -> ProbeReport:
    """Run the pipeline up to stage ``until`` and report every stage reached."""
    if until not in STAGES:
        raise ParameterError(f"unknown stage {until!r}")
    n = s.n
    h = depth_for(n)
    bs = backward_substructure(s, p, h)
    ok = backward_valid(bs, n, d1, d2)
    base = dict(n=n, d=d, h=h, support_size=bs.support_size, last_layer_size=len(bs.last_layer), backward_ok=ok)
    if not ok or until == "backward":
        return ProbeReport(stage="backward", **base)
    fwd = forward_process(s, p, bs)
    base.update(forward_verdict=fwd.verdict, forward_steps=fwd.steps)
    if not fwd.success:
        return ProbeReport(stage="forward", **base)
    w = cycle_word(s, p, bs, fwd)
    base["word"] = format_word(w)
    if until == "forward":
        return ProbeReport(stage="forward", **base)
    seen = set(bs.support) | set(fwd.visited)
    starters = starting_states(s, p, q, w, d, seen)
    if starters is None:
        return ProbeReport(stage="starting", **base)
    base["starting"] = starters
    seen |= set(walk(s, q, starting_word(w, d)))
    th = thread_process(s, starters, seen)
    base.update(thread_reason=th.reason, lambdas=th.lambdas, cycles=th.cycles)
    if not th.ok:
        return ProbeReport(stage="threads", **base)
    lo, hi = sqrt_interval(n, 1, 2)
    if until == "threads" or not all(lo <= c <= hi for c in th.cycles):
        return ProbeReport(stage="threads", **base)
    return ProbeReport(stage="full", ell=th.cycles, **base)


def cycle_lengths(s: TransitionStructure, p: int, q: int, d: int = 1, d1: float = 4.0, d2: float = 0.5) -> Optional[tuple[int, ...]]:
    """Cycle lengths ``(l_0, .., l_d)`` of the threads, or ``None`` if any stage fails."""
    return probe(s, p, q, d, d1, d2).ell


def powerset_b_cycle_length(ell: Sequence[int]) -> int:
    return lcm_tuple(ell)
