"""Transition structures, almost deterministic automata and graph analyses.

States are ``0..n-1`` and letters are ``0..k-1``; letter 0 plays the role of
``a`` and letter 1 the role of ``b``. The single nondeterministic transition of
an almost deterministic automaton is always on letter 0.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

LETTERS = "ab"


class AutomatonError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(AutomatonError, ValueError):
    """A parameter lies outside the documented range."""


class DomainError(AutomatonError, ValueError):
    """A state or letter index is out of range."""


class ContractError(AutomatonError, RuntimeError):
    """An operation was called on an input that violates its precondition."""


StateSet = tuple  # strictly increasing tuple of state ids


def parse_word(word: str | Sequence[int]) -> list[int]:
    """Turn ``"aab"`` or ``[0, 0, 1]`` into a list of letter indices."""
    if isinstance(word, str):
        try:
            return [LETTERS.index(c) for c in word]
        except ValueError:
            raise DomainError(f"unknown letter in {word!r}") from None
    return [int(c) for c in word]


def format_word(word: Sequence[int]) -> str:
    return "".join(LETTERS[c] if c < len(LETTERS) else f"<{c}>" for c in word)


@dataclass(frozen=True, eq=False)
class TransitionStructure:
    """Complete deterministic transition table ``delta[state, letter]``."""

    delta: np.ndarray

    def __post_init__(self):
        delta = np.array(self.delta, dtype=np.int64, copy=True)
        if delta.ndim != 2 or delta.shape[0] < 1:
            raise ParameterError("delta must be an (n, k) table with n >= 1")
        if delta.shape[1] < 1:
            raise ParameterError("alphabet must be nonempty")
        n = delta.shape[0]
        if delta.min() < 0 or delta.max() >= n:
            raise DomainError("transition target out of range")
        delta.setflags(write=False)
        object.__setattr__(self, "delta", delta)

    @property
    def n(self) -> int:
        return self.delta.shape[0]

    @property
    def k(self) -> int:
        return self.delta.shape[1]

    def __eq__(self, other):
        if not isinstance(other, TransitionStructure):
            return NotImplemented
        return np.array_equal(self.delta, other.delta)

    def __hash__(self):
        return hash(self.delta.tobytes())

    def step(self, state: int, letter: int) -> int:
        return int(self.delta[state, letter])

    @classmethod
    def from_function(cls, n: int, k: int, fn) -> "TransitionStructure":
        return cls([[fn(x, c) for c in range(k)] for x in range(n)])

    @classmethod
    def identity(cls, n: int, k: int = 2) -> "TransitionStructure":
        return cls(np.tile(np.arange(n)[:, None], (1, k)))


@dataclass(frozen=True, eq=False)
class AlmostDetAutomaton:
    """A transition structure plus one extra ``a``-transition ``extra_src -> extra_dst``."""

    base: TransitionStructure
    extra_src: int
    extra_dst: int
    initial: Optional[int] = None
    finals: np.ndarray = field(default=None)

    def __post_init__(self):
        n = self.base.n
        for name in ("extra_src", "extra_dst"):
            v = getattr(self, name)
            if not 0 <= v < n:
                raise DomainError(f"{name}={v} out of range for n={n}")
        if self.initial is not None and not 0 <= self.initial < n:
            raise DomainError(f"initial={self.initial} out of range")
        finals = np.zeros(n, dtype=bool) if self.finals is None else np.asarray(self.finals)
        if finals.dtype != bool:
            # accept an iterable of final state ids
            ids = np.asarray(list(finals) if finals.ndim else [], dtype=np.int64)
            finals = np.zeros(n, dtype=bool)
            if ids.size and (ids.min() < 0 or ids.max() >= n):
                raise DomainError("final state out of range")
            finals[ids] = True
        elif finals.shape != (n,):
            raise ParameterError("finals bitset must have length n")
        finals = finals.copy()
        finals.setflags(write=False)
        object.__setattr__(self, "finals", finals)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def is_deterministic(self) -> bool:
        return self.base.step(self.extra_src, 0) == self.extra_dst

    def gamma(self, state: int, letter: int) -> StateSet:
        """Nondeterministic image of one state."""
        t = self.base.step(state, letter)
        if letter == 0 and state == self.extra_src and t != self.extra_dst:
            return tuple(sorted((t, self.extra_dst)))
        return (t,)

    def with_initial(self, initial: int) -> "AlmostDetAutomaton":
        return AlmostDetAutomaton(self.base, self.extra_src, self.extra_dst, initial, self.finals)

    def with_finals(self, finals) -> "AlmostDetAutomaton":
        return AlmostDetAutomaton(self.base, self.extra_src, self.extra_dst, self.initial, finals)

    def __eq__(self, other):
        if not isinstance(other, AlmostDetAutomaton):
            return NotImplemented
        return (
            self.base == other.base
            and (self.extra_src, self.extra_dst, self.initial)
            == (other.extra_src, other.extra_dst, other.initial)
            and np.array_equal(self.finals, other.finals)
        )

    def __hash__(self):
        return hash((self.base, self.extra_src, self.extra_dst, self.initial, self.finals.tobytes()))


def _check_state(n: int, x: int) -> None:
    if not 0 <= x < n:
        raise DomainError(f"state {x} out of range [0, {n})")


def apply_word(s: TransitionStructure, start: int, word: str | Sequence[int]) -> int:
    """Return ``delta(start, word)``; the empty word leaves ``start`` unchanged."""
    _check_state(s.n, start)
    x = start
    for c in parse_word(word):
        if not 0 <= c < s.k:
            raise DomainError(f"letter {c} out of range for k={s.k}")
        x = int(s.delta[x, c])
    return x


def image_set(a: AlmostDetAutomaton, x: Iterable[int], letter: int) -> StateSet:
    """Image of a set of states under one letter, extra transition included."""
    if not 0 <= letter < a.k:
        raise DomainError(f"letter {letter} out of range")
    xs = list(x)
    for s in xs:
        _check_state(a.n, s)
    out = {int(a.base.delta[s, letter]) for s in xs}
    if letter == 0 and a.extra_src in xs:
        out.add(a.extra_dst)
    return tuple(sorted(out))


def reachable_states(s: TransitionStructure, start: int, extra: Optional[tuple[int, int]] = None) -> np.ndarray:
    """Boolean mask of the states reachable from ``start`` (``start`` included),
    optionally with one extra edge ``extra = (src, dst)``."""
    _check_state(s.n, start)
    delta = s.delta
    seen = np.zeros(s.n, dtype=bool)
    seen[start] = True
    queue = deque([start])
    while queue:
        x = queue.popleft()
        targets = list(delta[x])
        if extra is not None and x == extra[0]:
            targets.append(extra[1])
        for y in targets:
            if not seen[y]:
                seen[y] = True
                queue.append(int(y))
    return seen


def accessible_states(a: AlmostDetAutomaton, start: int) -> np.ndarray:
    """States reachable from ``start`` in ``a``, extra transition included."""
    return reachable_states(a.base, start, (a.extra_src, a.extra_dst))


@dataclass(frozen=True)
class SccDecomposition:
    component_of: tuple[int, ...]
    sizes: tuple[int, ...]
    terminal_ids: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.sizes)

    def members(self, cid: int) -> list[int]:
        return [x for x, c in enumerate(self.component_of) if c == cid]


def scc_decompose(s: TransitionStructure) -> SccDecomposition:
    """Strongly connected components of the union of all letter maps (iterative Tarjan)."""
    n = s.n
    succ = [sorted(set(int(t) for t in row)) for row in s.delta]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comp = [-1] * n
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    sizes = [0] * ncomp
    for c in comp:
        sizes[c] += 1
    leaves = [True] * ncomp
    for x in range(n):
        for y in succ[x]:
            if comp[y] != comp[x]:
                leaves[comp[x]] = False
    return SccDecomposition(
        component_of=tuple(comp),
        sizes=tuple(sizes),
        terminal_ids=tuple(c for c in range(ncomp) if leaves[c]),
    )


# -- serialization ---------------------------------------------------------


def to_text(obj: TransitionStructure | AlmostDetAutomaton) -> str:
    """Plain-text format: ``n k``, n rows of targets, then optional
    ``extra p q``, ``initial i`` and ``finals b0 .. b(n-1)`` lines."""
    if isinstance(obj, AlmostDetAutomaton):
        base, extra = obj.base, obj
    else:
        base, extra = obj, None
    lines = [f"{base.n} {base.k}"]
    lines += [" ".join(str(int(t)) for t in row) for row in base.delta]
    if extra is not None:
        lines.append(f"extra {extra.extra_src} {extra.extra_dst}")
        if extra.initial is not None:
            lines.append(f"initial {extra.initial}")
        lines.append("finals " + " ".join("1" if b else "0" for b in extra.finals))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> TransitionStructure | AlmostDetAutomaton:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ParameterError("empty automaton description")
    try:
        n, k = int(rows[0][0]), int(rows[0][1])
        table = [[int(v) for v in row] for row in rows[1 : n + 1]]
    except (ValueError, IndexError):
        raise ParameterError("malformed header or transition rows") from None
    if len(table) != n or any(len(r) != k for r in table):
        raise ParameterError(f"expected {n} rows of {k} targets")
    base = TransitionStructure(table)
    extra = initial = finals = None
    for row in rows[n + 1 :]:
        key, vals = row[0], row[1:]
        if key == "extra":
            extra = (int(vals[0]), int(vals[1]))
        elif key == "initial":
            initial = int(vals[0])
        elif key == "finals":
            if len(vals) != n:
                raise ParameterError("finals line must list n bits")
            finals = np.array([v == "1" for v in vals], dtype=bool)
        else:
            raise ParameterError(f"unknown line {key!r}")
    if extra is None:
        if initial is not None or finals is not None:
            raise ParameterError("initial/finals require an extra line")
        return base
    return AlmostDetAutomaton(base, extra[0], extra[1], initial, finals)


def to_dot(obj: TransitionStructure | AlmostDetAutomaton, name: str = "A") -> str:
    """Graphviz rendering; the extra transition is drawn dashed and red."""
    if isinstance(obj, AlmostDetAutomaton):
        base, a = obj.base, obj
    else:
        base, a = obj, None
    out = [f"digraph {name} {{", "  rankdir=LR;"]
    for x in range(base.n):
        shape = "doublecircle" if a is not None and a.finals[x] else "circle"
        out.append(f'  {x} [shape={shape}];')
    if a is not None and a.initial is not None:
        out.append('  init [shape=point];')
        out.append(f"  init -> {a.initial};")
    for x in range(base.n):
        for c in range(base.k):
            label = LETTERS[c] if c < len(LETTERS) else str(c)
            out.append(f'  {x} -> {int(base.delta[x, c])} [label="{label}"];')
    if a is not None:
        out.append(f'  {a.extra_src} -> {a.extra_dst} [label="a", style=dashed, color=red];')
    out.append("}")
    return "\n".join(out) + "\n"
