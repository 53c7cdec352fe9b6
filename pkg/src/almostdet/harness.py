"""Config-driven Monte Carlo experiments with replayable per-trial records."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from . import probes
from .branching import cum_bound_exceeded, gw_growth_event, gw_run
from .core import ContractError, ParameterError, reachable_states
from .randgen import final_prob_schedule, gen_almost_det, gen_dense_nfa, make_rng, trial_seed
from .subset import ABORTED, CAP_EXCEEDED, accessible_powerset, dense_powerset, minimize, state_complexity
from .words import lcm_tuple, pairwise_coprime

KINDS = ("blowup", "accessibility", "gw_stats", "coprime_rate", "dense_nfa", "probe_pipeline", "state_complexity")


@dataclass
class ExperimentConfig:
    kind: str
    n: int = 100
    trials: int = 100
    seed: int = 0
    k: int = 2
    # blowup / state_complexity
    cap: Optional[int] = None
    threshold: Optional[int] = None
    budget: Optional[int] = None
    minimized: bool = False
    # final states
    f_mode: str = "constant"
    f_value: float = 0.5
    # coprime_rate / probe_pipeline
    d: int = 1
    d1: float = 4.0
    d2: float = 0.5
    # dense_nfa
    edge_prob: float = 0.5
    # gw_stats
    depth: int = 30
    c1: float = 0.1
    c2: float = 10.0
    c3: float = 10.0
    t0: int = 5
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.n < 1 or self.k < 2:
            raise ParameterError("need n >= 1 and k >= 2")
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        if self.kind in ("coprime_rate", "probe_pipeline") and self.d < 1:
            raise ParameterError("d must be >= 1")
        if self.cap is not None and self.cap < 1:
            raise ParameterError("cap must be >= 1")
        if self.kind == "blowup" and self.cap is not None and self.cap < self.blowup_threshold:
            raise ParameterError("cap must be at least the blowup threshold")
        if self.kind == "dense_nfa" and not 0.0 < self.edge_prob < 1.0:
            raise ParameterError("edge_prob must lie in (0, 1)")
        final_prob_schedule(self.n, self.f_mode, self.f_value)

    @property
    def blowup_threshold(self) -> int:
        return self.threshold if self.threshold is not None else self.n**3

    @property
    def effective_cap(self) -> int:
        if self.cap is not None:
            return self.cap
        if self.kind == "blowup":
            return self.blowup_threshold
        if self.kind == "dense_nfa":
            return 1000
        return 10**6

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


# -- trials -------------------------------------------------------------------


def _blowup(cfg: ExperimentConfig, seed) -> dict:
    f = final_prob_schedule(cfg.n, cfg.f_mode, cfg.f_value)
    a = gen_almost_det(cfg.n, cfg.k, f, seed)
    cap, threshold = cfg.effective_cap, cfg.blowup_threshold
    budget = cfg.budget if cfg.budget is not None else 2 * cap
    out = accessible_powerset(a, cap, record=cfg.minimized, budget=budget)
    aborted = out.status == ABORTED and out.states_discovered <= threshold
    rec = {
        "status": out.status,
        "powerset_size": out.states_discovered,
        "aborted": aborted,
        "exceeds": None if aborted else out.states_discovered > threshold,
    }
    if cfg.minimized:
        rec["min_size"] = minimize(out.dfa).size if out.dfa is not None else None
    return rec


def _accessibility(cfg: ExperimentConfig, seed) -> dict:
    a = gen_almost_det(cfg.n, cfg.k, 0.5, seed)
    # reaching the source never needs the extra edge, which leaves from it
    reach = reachable_states(a.base, a.initial)
    return {
        "src_accessible": bool(reach[a.extra_src]),
        "src_inaccessible": not bool(reach[a.extra_src]),
        "accessible_fraction": float(reach.sum()) / cfg.n,
    }


def _gw_stats(cfg: ExperimentConfig, seed) -> dict:
    traj = gw_run(cfg.depth, seed)
    t_cum = min(20, cfg.depth)
    return {
        "z": list(traj.z),
        "extinct": traj.extinct,
        "growth_event": gw_growth_event(traj, cfg.c1, cfg.c2, cfg.c3, cfg.t0) if cfg.depth >= cfg.t0 else None,
        "cum_bound_exceeded": cum_bound_exceeded(traj, t_cum),
    }


def _coprime_rate(cfg: ExperimentConfig, seed) -> dict:
    lo, hi = probes.sqrt_interval(cfg.n, 1, 2)
    vals = [int(v) for v in make_rng(seed, "coprime").integers(lo, hi + 1, size=cfg.d + 1)]
    return {"values": vals, "coprime": pairwise_coprime(vals), "lcm": lcm_tuple(vals)}


def _dense_nfa(cfg: ExperimentConfig, seed) -> dict:
    nfa = gen_dense_nfa(cfg.n, cfg.k, cfg.edge_prob, seed)
    out = dense_powerset(nfa, cfg.effective_cap)
    return {"subset_states": out.states_discovered, "degenerate": out.states_discovered <= cfg.k + 2}


def _probe_pipeline(cfg: ExperimentConfig, seed) -> dict:
    a = gen_almost_det(cfg.n, cfg.k, 0.5, seed)
    rep = probes.probe(a.base, a.extra_src, a.extra_dst, cfg.d, cfg.d1, cfg.d2)
    rec = rep.as_dict()
    rec["success"] = rep.ell is not None
    rec["ell_mean"] = None if rep.ell is None else sum(rep.ell) / len(rep.ell)
    rec["ell_coprime"] = None if rep.ell is None else pairwise_coprime(rep.ell)
    return rec


def _state_complexity(cfg: ExperimentConfig, seed) -> dict:
    f = final_prob_schedule(cfg.n, cfg.f_mode, cfg.f_value)
    a = gen_almost_det(cfg.n, cfg.k, f, seed)
    sc = state_complexity(a, cfg.effective_cap)
    return {"exact": sc.exact, "size": sc.value, "at_least": None if sc.exact else sc.value}


_TRIALS: dict[str, Callable[[ExperimentConfig, Any], dict]] = {
    "blowup": _blowup,
    "accessibility": _accessibility,
    "gw_stats": _gw_stats,
    "coprime_rate": _coprime_rate,
    "dense_nfa": _dense_nfa,
    "probe_pipeline": _probe_pipeline,
    "state_complexity": _state_complexity,
}


def run_trial(cfg: ExperimentConfig, index: int) -> dict:
    """Record of trial ``index``; a pure function of ``(cfg, index)``."""
    if not 0 <= index < cfg.trials:
        raise ParameterError(f"trial index {index} outside [0, {cfg.trials})")
    rec = {"kind": cfg.kind, "n": cfg.n, "trial": index, "seed": f"{cfg.seed}:{index}"}
    rec.update(_TRIALS[cfg.kind](cfg, trial_seed(cfg.seed, index)))
    return rec


def record_line(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def _run_chunk(args) -> list[dict]:
    cfg, indices = args
    return [run_trial(cfg, i) for i in indices]


def iter_records(cfg: ExperimentConfig, chunk: int = 16) -> Iterable[dict]:
    """Records in trial-index order, computed by up to ``cfg.workers`` processes."""
    if cfg.workers == 1:
        for i in range(cfg.trials):
            yield run_trial(cfg, i)
        return
    chunks = [(cfg, range(s, min(s + chunk, cfg.trials))) for s in range(0, cfg.trials, chunk)]
    with ProcessPoolExecutor(cfg.workers) as pool:
        for batch in pool.map(_run_chunk, chunks):
            yield from batch


# -- summaries ----------------------------------------------------------------


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials <= 0 or not 0 <= successes <= trials:
        raise ParameterError("need 0 <= successes <= trials and trials > 0")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    # the endpoints are exactly 0 and 1 at the extremes
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


@dataclass
class Proportion:
    successes: int
    trials: int
    estimate: float
    lo: float
    hi: float

    @classmethod
    def of(cls, successes: int, trials: int) -> "Proportion":
        lo, hi = wilson_interval(successes, trials)
        est = successes / trials
        return cls(successes, trials, est, min(lo, est), max(hi, est))

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass
class Moments:
    count: int
    mean: float
    std: float
    min: float
    max: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Moments":
        count = len(values)
        mean = math.fsum(values) / count
        var = math.fsum((v - mean) ** 2 for v in values) / (count - 1) if count > 1 else 0.0
        return cls(count, mean, math.sqrt(var), min(values), max(values))


@dataclass
class ExperimentSummary:
    kind: str
    trials: int
    proportions: dict[str, Proportion]
    numeric: dict[str, Moments]
    extra: dict[str, Any] = field(default_factory=dict)
    wall_clock: Optional[float] = None
    config: Optional[dict] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


_SKIP = {"kind", "n", "trial", "seed"}


def _is_bool(v) -> bool:
    return isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def summarize(records: Sequence[dict]) -> ExperimentSummary:
    """Wilson intervals for boolean fields and moments for numeric fields;
    ``None`` values are left out of the field's denominator."""
    if not records:
        raise ParameterError("no records to summarize")
    kinds = {r["kind"] for r in records}
    if len(kinds) != 1:
        raise ContractError(f"records mix experiment kinds {sorted(kinds)}")
    kind = kinds.pop()
    keys = sorted({k for r in records for k in r} - _SKIP)
    proportions, numeric = {}, {}
    for key in keys:
        vals = [r.get(key) for r in records]
        vals = [v for v in vals if v is not None]
        if not vals:
            continue
        if all(_is_bool(v) for v in vals):
            proportions[key] = Proportion.of(sum(vals), len(vals))
        elif all(_is_num(v) for v in vals):
            numeric[key] = Moments.of(sorted(vals))
    extra = _kind_extra(kind, records)
    return ExperimentSummary(kind, len(records), proportions, numeric, extra)


def _kind_extra(kind: str, records: Sequence[dict]) -> dict:
    extra: dict[str, Any] = {}
    if kind == "blowup":
        extra["aborted"] = sum(1 for r in records if r["aborted"])
    elif kind == "probe_pipeline":
        stages: dict[str, int] = {}
        for r in records:
            stages[r["stage"]] = stages.get(r["stage"], 0) + 1
        extra["stage_counts"] = dict(sorted(stages.items()))
        ells = sorted(v for r in records if r["ell"] for v in r["ell"])
        if ells:
            extra["ell"] = asdict(Moments.of(ells))
    elif kind == "gw_stats":
        z = np.array(sorted(r["z"] for r in records), dtype=np.float64)
        w = z / 2.0 ** np.arange(z.shape[1])
        extra["mean_z"] = z.mean(axis=0).tolist()
        extra["mean_w"] = w.mean(axis=0).tolist()
        extra["std_w"] = w.std(axis=0, ddof=1).tolist() if len(z) > 1 else [0.0] * z.shape[1]
    elif kind == "state_complexity":
        sizes: dict[int, int] = {}
        for r in records:
            if r["exact"]:
                sizes[r["size"]] = sizes.get(r["size"], 0) + 1
        extra["exact_sizes"] = {str(s): c for s, c in sorted(sizes.items())}
    return extra


def run_experiment(cfg: ExperimentConfig, sink: Optional[Callable[[dict], None]] = None) -> tuple[list[dict], ExperimentSummary]:
    start = time.perf_counter()
    records = []
    for rec in iter_records(cfg):
        records.append(rec)
        if sink is not None:
            sink(rec)
    summary = summarize(records)
    summary.wall_clock = time.perf_counter() - start
    summary.config = cfg.to_dict()
    return records, summary


def write_csv(records: Sequence[dict], path: str) -> None:
    """Flat CSV of the scalar fields; list fields are joined with ``;``."""
    keys = sorted({k for r in records for k in r})
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for r in records:
            writer.writerow({k: ";".join(map(str, v)) if isinstance(v, list) else v for k, v in r.items()})
