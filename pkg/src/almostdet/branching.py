"""Galton-Watson process with Poi(2) offspring and the backward multi-tree process."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from .core import ParameterError
from .randgen import Seed, make_rng, poisson, trial_seed

MAX_DEPTH = 40


@dataclass(frozen=True)
class GwTrajectory:
    z: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.z) - 1

    @property
    def cum(self) -> tuple[int, ...]:
        return tuple(accumulate(self.z))

    @property
    def extinct(self) -> bool:
        return self.z[-1] == 0

    def w(self, t: int) -> float:
        return self.z[t] / 2**t


def gw_run(depth: int, seed: Seed = 0, mean_offspring: float = 2.0) -> GwTrajectory:
    """Generation sizes ``Z_0 .. Z_depth`` with ``Z_0 = 1``.

    ``Z_{t+1}`` is drawn as a single ``Poi(mean * Z_t)`` variate, which has the
    law of a sum of ``Z_t`` independent ``Poi(mean)`` offspring counts.
    """
    if depth < 0 or depth > MAX_DEPTH:
        raise ParameterError(f"depth must lie in [0, {MAX_DEPTH}]")
    rng = make_rng(seed, "gw")
    z = [1]
    for _ in range(depth):
        z.append(int(poisson(rng, mean_offspring * z[-1])) if z[-1] else 0)
    return GwTrajectory(tuple(z))


def gw_batch(runs: int, depth: int, seed: int = 0) -> np.ndarray:
    """``(runs, depth + 1)`` array; row ``i`` is ``gw_run(depth, trial_seed(seed, i))``."""
    out = np.empty((runs, depth + 1), dtype=np.int64)
    for i in range(runs):
        out[i] = gw_run(depth, trial_seed(seed, i)).z
    return out


def gw_growth_event(traj: GwTrajectory, c1: float, c2: float, c3: float, t0: int) -> bool:
    """``c1 2^t <= Z_t <= c2 2^t`` and ``sum_{k<t} Z_k <= c3 2^t`` for every ``t0 <= t <= T``."""
    if traj.depth < t0:
        raise ParameterError("trajectory shorter than t0")
    cum = 0
    for t, zt in enumerate(traj.z):
        if t >= t0:
            scale = 2**t
            if not (c1 * scale <= zt <= c2 * scale and cum <= c3 * scale):
                return False
        cum += zt
    return True


def cum_bound_exceeded(traj: GwTrajectory, t: int) -> bool:
    """``sum_{i<=t} Z_i >= 2^(3t/2)``."""
    if traj.depth < t:
        raise ParameterError("trajectory shorter than t")
    total = sum(traj.z[: t + 1])
    # compare total^2 >= 2^(3t) in integers
    return total * total >= 2 ** (3 * t)


@dataclass(frozen=True, eq=False)
class MultiTree:
    """Backward multi-tree. Node 0 is the root (label ``root``); node ``i > 0``
    has label ``(state[i], letter[i])``, parent ``parent[i]`` and depth ``depth[i]``.
    Nodes are stored level by level."""

    root: int
    state: np.ndarray
    letter: np.ndarray
    parent: np.ndarray
    depth: np.ndarray
    height: int

    @property
    def size(self) -> int:
        return len(self.state)

    def level_sizes(self) -> list[int]:
        return np.bincount(self.depth, minlength=self.height + 1).tolist()

    def is_tree(self) -> bool:
        """All state labels (root included) pairwise distinct."""
        return len(np.unique(self.state)) == self.size

    def has_duplicate_siblings(self) -> bool:
        """Some node has two children with the same label (the tree is not in D)."""
        if self.size <= 1:
            return False
        key = np.stack([self.parent[1:], self.state[1:], self.letter[1:]], axis=1)
        return len(np.unique(key, axis=0)) < self.size - 1


def multi_tree_process(n: int, p: int, h: int, seed: Seed = 0, k: int = 2) -> MultiTree:
    """Grow the backward multi-tree rooted at ``p`` for ``h`` generations.

    Drawing ``k*n`` independent Poi(1/n) child counts per node is done by
    thinning: draw the Poi(k) total, then give each child a uniform
    ``(state, letter)`` label.
    """
    if n < 1 or h < 0:
        raise ParameterError("need n >= 1 and h >= 0")
    if not 0 <= p < n:
        raise ParameterError("root out of range")
    rng = make_rng(seed, "multitree")
    states = [np.array([p], dtype=np.int64)]
    letters = [np.array([-1], dtype=np.int64)]
    parents = [np.array([-1], dtype=np.int64)]
    depths = [np.array([0], dtype=np.int64)]
    level_start, level_size = 0, 1
    for t in range(h):
        counts = poisson(rng, float(k), size=level_size)
        total = int(counts.sum())
        labels = rng.integers(0, k * n, size=total)
        states.append(labels // k)
        letters.append(labels % k)
        parents.append(np.repeat(np.arange(level_start, level_start + level_size), counts))
        depths.append(np.full(total, t + 1, dtype=np.int64))
        level_start += level_size
        level_size = total
    return MultiTree(
        root=p,
        state=np.concatenate(states),
        letter=np.concatenate(letters),
        parent=np.concatenate(parents),
        depth=np.concatenate(depths),
        height=h,
    )
