"""Accessible powerset construction, minimization and state complexity.

Subsets of ``[0, n)`` are stored as little-endian arrays of ``uint64`` words.
The breadth-first exploration runs in a compiled kernel: the image of a subset
under a letter is assembled from per-byte lookup tables, and subsets are
interned in an open-addressing hash table. Discovery order (BFS, letters in
index order) fixes the state numbering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np

from .core import (
    AlmostDetAutomaton,
    ContractError,
    ParameterError,
    TransitionStructure,
    LETTERS,
)
from .randgen import DenseNfa

_U64 = np.uint64

COMPLETE = "complete"
CAP_EXCEEDED = "cap_exceeded"
ABORTED = "aborted"


# -- deterministic automata -------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dfa:
    """Complete DFA: ``trans[state, letter]``, boolean ``finals``, ``initial`` state."""

    trans: np.ndarray
    finals: np.ndarray
    initial: int = 0

    def __post_init__(self):
        trans = np.asarray(self.trans, dtype=np.int64)
        finals = np.asarray(self.finals, dtype=bool)
        if trans.ndim != 2 or trans.shape[0] < 1:
            raise ParameterError("trans must be an (m, k) table with m >= 1")
        m = trans.shape[0]
        if finals.shape != (m,):
            raise ParameterError("finals must have one entry per state")
        if trans.min() < 0 or trans.max() >= m:
            raise ContractError("DFA is not complete: missing or invalid transition")
        if not 0 <= self.initial < m:
            raise ParameterError("initial state out of range")
        object.__setattr__(self, "trans", trans)
        object.__setattr__(self, "finals", finals)

    @property
    def size(self) -> int:
        return self.trans.shape[0]

    @property
    def k(self) -> int:
        return self.trans.shape[1]

    def run(self, word: Sequence[int], start: Optional[int] = None) -> int:
        x = self.initial if start is None else start
        for c in word:
            x = int(self.trans[x, c])
        return x

    def accepts(self, word: Sequence[int]) -> bool:
        return bool(self.finals[self.run(word)])

    def reachable(self) -> np.ndarray:
        seen = np.zeros(self.size, dtype=bool)
        seen[self.initial] = True
        stack = [self.initial]
        while stack:
            x = stack.pop()
            for y in self.trans[x]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(int(y))
        return seen

    def accessible_part(self) -> "Dfa":
        keep = self.reachable()
        if keep.all():
            return self
        ids = np.cumsum(keep) - 1
        return Dfa(ids[self.trans[keep]], self.finals[keep], int(ids[self.initial]))

    def to_dot(self, name: str = "D", labels: Optional[Sequence[str]] = None) -> str:
        out = [f"digraph {name} {{", "  rankdir=LR;", "  init [shape=point];"]
        for x in range(self.size):
            shape = "doublecircle" if self.finals[x] else "circle"
            label = labels[x] if labels is not None else str(x)
            out.append(f'  {x} [shape={shape}, label="{label}"];')
        out.append(f"  init -> {self.initial};")
        for x in range(self.size):
            for c in range(self.k):
                out.append(f'  {x} -> {int(self.trans[x, c])} [label="{LETTERS[c] if c < 2 else c}"];')
        out.append("}")
        return "\n".join(out) + "\n"


@dataclass(frozen=True, eq=False)
class SubsetDfa(Dfa):
    """DFA whose state ``i`` is the subset encoded by ``masks[i]``; state 0 is ``{i0}``."""

    masks: np.ndarray = None
    base_n: int = 0

    @property
    def m(self) -> int:
        return self.size

    def subset(self, i: int) -> tuple[int, ...]:
        return _decode(self.masks[i], self.base_n)

    @property
    def subsets(self) -> list[tuple[int, ...]]:
        return [self.subset(i) for i in range(self.size)]

    def to_dot(self, name: str = "D", labels=None) -> str:
        if labels is None:
            labels = ["{" + ",".join(map(str, s)) + "}" for s in self.subsets]
        return super().to_dot(name, labels)


def _decode(words: np.ndarray, n: int) -> tuple[int, ...]:
    bits = np.unpackbits(np.ascontiguousarray(words, dtype="<u8").view(np.uint8), bitorder="little")
    return tuple(int(i) for i in np.flatnonzero(bits[:n]))


def _encode(states, n: int) -> np.ndarray:
    bits = np.zeros(((n + 63) // 64) * 64, dtype=np.uint8)
    bits[list(states)] = 1
    return np.packbits(bits, bitorder="little").view("<u8").astype(np.uint64)


# -- compiled kernels --------------------------------------------------------


@numba.njit(cache=True)
def _byte_tables(masks, nbytes):
    n, k, w_count = masks.shape
    table = np.zeros((k, nbytes, 256, w_count), dtype=np.uint64)
    for c in range(k):
        for j in range(nbytes):
            for v in range(1, 256):
                b = 0
                while not (v >> b) & 1:
                    b += 1
                prev = v & (v - 1)
                s = 8 * j + b
                for w in range(w_count):
                    extra = masks[s, c, w] if s < n else np.uint64(0)
                    table[c, j, v, w] = table[c, j, prev, w] | extra
    return table


@numba.njit(cache=True, inline="always")
def _hash_words(buf):
    h = np.uint64(0x9E3779B97F4A7C15)
    for w in range(buf.shape[0]):
        x = buf[w] ^ h
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        h = x ^ (x >> np.uint64(31))
    return h


@numba.njit(cache=True)
def _explore(table, init, limit, record):
    """BFS over subsets. Returns ``(status, m, keys, trans)`` with status 0 when the
    frontier empties, 1 when state ``limit + 1`` was about to be interned."""
    k, nbytes, _, w_count = table.shape
    capacity = 256
    keys = np.zeros((capacity, w_count), dtype=np.uint64)
    tcap = capacity if record else 1
    trans = np.full((tcap, k), -1, dtype=np.int64)
    hsize = 1024
    hmask = np.uint64(hsize - 1)
    htab = np.full(hsize, -1, dtype=np.int64)

    for w in range(w_count):
        keys[0, w] = init[w]
    htab[int(_hash_words(init) & hmask)] = 0
    m = 1
    head = 0
    buf = np.zeros(w_count, dtype=np.uint64)
    while head < m:
        for c in range(k):
            for w in range(w_count):
                buf[w] = 0
            for j in range(nbytes):
                v = int((keys[head, j >> 3] >> np.uint64((j & 7) * 8)) & np.uint64(255))
                if v:
                    for w in range(w_count):
                        buf[w] |= table[c, j, v, w]
            h = _hash_words(buf) & hmask
            found = -1
            while True:
                idx = htab[int(h)]
                if idx < 0:
                    break
                same = True
                for w in range(w_count):
                    if keys[idx, w] != buf[w]:
                        same = False
                        break
                if same:
                    found = idx
                    break
                h = (h + np.uint64(1)) & hmask
            if found >= 0:
                if record:
                    trans[head, c] = found
                continue
            if m >= limit:
                return 1, m + 1, keys[:m], trans[: (m if record else 1)]
            if m == capacity:
                capacity *= 2
                nk = np.zeros((capacity, w_count), dtype=np.uint64)
                nk[:m] = keys[:m]
                keys = nk
                if record:
                    nt = np.full((capacity, k), -1, dtype=np.int64)
                    nt[:m] = trans[:m]
                    trans = nt
            for w in range(w_count):
                keys[m, w] = buf[w]
            htab[int(h)] = m
            if record:
                trans[head, c] = m
            m += 1
            if 2 * m > hsize:
                hsize *= 4
                hmask = np.uint64(hsize - 1)
                htab = np.full(hsize, -1, dtype=np.int64)
                for i in range(m):
                    hh = _hash_words(keys[i]) & hmask
                    while htab[int(hh)] >= 0:
                        hh = (hh + np.uint64(1)) & hmask
                    htab[int(hh)] = i
        head += 1
    return 0, m, keys[:m], trans[: (m if record else 1)]


# -- powerset construction ---------------------------------------------------


@dataclass(frozen=True)
class PowersetOutcome:
    """Either a complete :class:`SubsetDfa` or a count of discovered subsets.

    ``status`` is ``complete``, ``cap_exceeded`` (more than ``cap`` accessible
    subsets exist; ``states_discovered == cap + 1``) or ``aborted`` (the memory
    budget ran out before the cap was reached).
    """

    status: str
    states_discovered: int
    dfa: Optional[SubsetDfa] = None

    @property
    def complete(self) -> bool:
        return self.status == COMPLETE

    @property
    def cap_exceeded(self) -> bool:
        return self.status == CAP_EXCEEDED

    def __repr__(self):
        if self.complete:
            return f"Complete(m={self.states_discovered})"
        if self.cap_exceeded:
            return f"CapExceeded({self.states_discovered})"
        return f"Aborted({self.states_discovered})"


def transition_masks(a: AlmostDetAutomaton) -> np.ndarray:
    """``(n, k, words)`` bitmasks of the nondeterministic images ``gamma(x, letter)``."""
    n, k = a.n, a.k
    w_count = (n + 63) // 64
    masks = np.zeros((n, k, w_count), dtype=np.uint64)
    delta = a.base.delta
    rows = np.repeat(np.arange(n), k)
    cols = np.tile(np.arange(k), n)
    tgt = delta.reshape(-1)
    np.bitwise_or.at(
        masks,
        (rows, cols, tgt // 64),
        np.left_shift(np.uint64(1), (tgt % 64).astype(np.uint64)),
    )
    p, q = a.extra_src, a.extra_dst
    masks[p, 0, q // 64] |= np.uint64(1) << np.uint64(q % 64)
    return masks


def dense_masks(nfa: DenseNfa) -> np.ndarray:
    n, k = nfa.n, nfa.k
    padded = np.zeros((n, k, ((n + 63) // 64) * 64), dtype=np.uint8)
    padded[:, :, :n] = nfa.edges
    return np.packbits(padded, axis=2, bitorder="little").view("<u8").astype(np.uint64)


def powerset_from_masks(
    masks: np.ndarray,
    initial: int,
    cap: int,
    finals: Optional[np.ndarray] = None,
    record: bool = True,
    budget: Optional[int] = None,
) -> PowersetOutcome:
    """Accessible powerset of the relation encoded by ``masks`` from ``{initial}``.

    With ``record=False`` only the number of subsets is computed. ``budget``
    bounds the number of interned subsets; hitting it before ``cap`` yields an
    ``aborted`` outcome.
    """
    if cap < 1:
        raise ParameterError("cap must be >= 1")
    n, k, w_count = masks.shape
    limit = cap if budget is None else min(cap, budget)
    table = _byte_tables(masks, (n + 7) // 8)
    init = np.zeros(w_count, dtype=np.uint64)
    init[initial // 64] = np.uint64(1) << np.uint64(initial % 64)
    status, m, keys, trans = _explore(table, init, limit, record)
    if status == 1:
        if limit < cap:
            return PowersetOutcome(ABORTED, int(m))
        return PowersetOutcome(CAP_EXCEEDED, int(m))
    if not record:
        return PowersetOutcome(COMPLETE, int(m))
    if finals is None:
        fmask = np.zeros(w_count, dtype=np.uint64)
    else:
        fmask = _encode(np.flatnonzero(finals), n)
    is_final = np.any(keys & fmask, axis=1)
    dfa = SubsetDfa(trans.copy(), is_final, 0, masks=keys.copy(), base_n=n)
    return PowersetOutcome(COMPLETE, int(m), dfa)


def accessible_powerset(
    a: AlmostDetAutomaton, cap: int, record: bool = True, budget: Optional[int] = None
) -> PowersetOutcome:
    """Subset construction from ``{i0}`` that stops once ``cap + 1`` subsets are interned."""
    if a.initial is None:
        raise ContractError("accessible_powerset needs an initial state")
    return powerset_from_masks(transition_masks(a), a.initial, cap, a.finals, record, budget)


def dense_powerset(nfa: DenseNfa, cap: int, record: bool = False) -> PowersetOutcome:
    return powerset_from_masks(dense_masks(nfa), nfa.initial, cap, None, record)


# -- minimization ------------------------------------------------------------


def _hopcroft_classes(d: Dfa) -> list[int]:
    m, k = d.trans.shape
    preds: list[list[list[int]]] = []
    for c in range(k):
        col = d.trans[:, c]
        order = np.argsort(col, kind="stable")
        bounds = np.searchsorted(col[order], np.arange(m + 1))
        order_l = order.tolist()
        bounds_l = bounds.tolist()
        preds.append([order_l[bounds_l[y] : bounds_l[y + 1]] for y in range(m)])

    finals = d.finals.tolist()
    acc = [x for x in range(m) if finals[x]]
    rej = [x for x in range(m) if not finals[x]]
    blocks: list[set[int]] = [set(b) for b in (acc, rej) if b]
    block_of = [0] * m
    for bid, blk in enumerate(blocks):
        for x in blk:
            block_of[x] = bid
    work = set()
    if len(blocks) == 2:
        work.add(0 if len(blocks[0]) <= len(blocks[1]) else 1)

    while work:
        splitter = list(blocks[work.pop()])
        for c in range(k):
            pc = preds[c]
            touched: dict[int, list[int]] = {}
            for y in splitter:
                for x in pc[y]:
                    b = block_of[x]
                    lst = touched.get(b)
                    if lst is None:
                        touched[b] = [x]
                    else:
                        lst.append(x)
            for b, xs in touched.items():
                blk = blocks[b]
                if len(xs) == len(blk):
                    continue
                inside = set(xs)
                if 2 * len(inside) <= len(blk):
                    moved = inside
                    blk -= inside
                else:
                    moved = blk - inside
                    blocks[b] = inside
                new_id = len(blocks)
                blocks.append(moved)
                for x in moved:
                    block_of[x] = new_id
                # moved is never larger than what stays behind
                work.add(new_id)
    return block_of


def minimize(d: Dfa) -> Dfa:
    """Minimal complete DFA (Hopcroft partition refinement), states numbered in BFS order."""
    d = d.accessible_part()
    block_of = _hopcroft_classes(d)
    k = d.k
    rep: dict[int, int] = {}
    for x, b in enumerate(block_of):
        rep.setdefault(b, x)
    # canonical numbering: BFS from the initial class
    new_id = {block_of[d.initial]: 0}
    queue = [block_of[d.initial]]
    rows = []
    head = 0
    while head < len(queue):
        b = queue[head]
        head += 1
        x = rep[b]
        row = []
        for c in range(k):
            tb = block_of[int(d.trans[x, c])]
            if tb not in new_id:
                new_id[tb] = len(queue)
                queue.append(tb)
            row.append(new_id[tb])
        rows.append(row)
    finals = [bool(d.finals[rep[b]]) for b in queue]
    return Dfa(np.array(rows, dtype=np.int64), np.array(finals, dtype=bool), 0)


def brute_force_min_size(d: Dfa) -> int:
    """Number of Myhill-Nerode classes by the table-filling fixpoint (quadratic memory)."""
    d = d.accessible_part()
    f = d.finals
    dist = f[:, None] != f[None, :]
    while True:
        new = dist.copy()
        for c in range(d.k):
            t = d.trans[:, c]
            new |= dist[np.ix_(t, t)]
        if np.array_equal(new, dist):
            break
        dist = new
    reps: list[int] = []
    for x in range(d.size):
        if all(dist[x, r] for r in reps):
            reps.append(x)
    return len(reps)


def is_isomorphic(d1: Dfa, d2: Dfa) -> bool:
    """Isomorphism of accessible complete DFAs (walk both in lockstep from the initial states)."""
    if d1.size != d2.size or d1.k != d2.k:
        return False
    mapping = {d1.initial: d2.initial}
    stack = [d1.initial]
    while stack:
        x = stack.pop()
        y = mapping[x]
        if d1.finals[x] != d2.finals[y]:
            return False
        for c in range(d1.k):
            tx, ty = int(d1.trans[x, c]), int(d2.trans[y, c])
            if tx in mapping:
                if mapping[tx] != ty:
                    return False
            else:
                mapping[tx] = ty
                stack.append(tx)
    return len(set(mapping.values())) == len(mapping)


# -- state complexity --------------------------------------------------------


@dataclass(frozen=True)
class StateComplexity:
    """``exact=True``: the state complexity. ``exact=False``: only a lower bound on
    the *powerset* size (the cap was exceeded), not on the state complexity."""

    value: int
    exact: bool

    def __repr__(self):
        return f"Exact({self.value})" if self.exact else f"AtLeast({self.value})"


def state_complexity(a: AlmostDetAutomaton, cap: int = 10**6) -> StateComplexity:
    if a.initial is None:
        raise ContractError("state complexity needs an initial state")
    out = accessible_powerset(a, cap)
    if not out.complete:
        return StateComplexity(out.states_discovered, False)
    return StateComplexity(minimize(out.dfa).size, True)


def fixture_nfa(kind: str, n: int) -> AlmostDetAutomaton:
    """Two n-state automata with exponential and linear state complexity.

    ``L_ell`` recognizes ``Σ*aΣ^(n-2)`` and ``L_r`` recognizes ``Σ*a^(n-1)``.
    State 0 loops on every letter and carries the extra edge ``0 -a-> 1``; the
    chain ``1 -> ... -> n-1`` uses both letters (``L_ell``) or only ``a``
    (``L_r``); ``n-1`` is final. Transitions missing from the drawing are sent
    to state 0: state 0 belongs to every reachable subset, so this completes the
    automaton without changing its language or its powerset.
    """
    if n < 2:
        raise ParameterError("fixture needs n >= 2")
    if kind not in ("L_ell", "L_r"):
        raise ParameterError(f"unknown fixture {kind!r}")
    delta = np.zeros((n, 2), dtype=np.int64)
    for i in range(1, n - 1):
        delta[i, 0] = i + 1
        delta[i, 1] = i + 1 if kind == "L_ell" else 0
    finals = np.zeros(n, dtype=bool)
    finals[n - 1] = True
    return AlmostDetAutomaton(TransitionStructure(delta), 0, 1, 0, finals)
