"""Command line front end: ``lab run``, ``lab replay``, ``lab gw``, ``lab words``,
``lab probe``, ``lab determinize`` and ``lab gen``."""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import asdict

import click

from . import harness, probes, words
from .branching import cum_bound_exceeded, gw_growth_event, gw_run
from .core import AlmostDetAutomaton, AutomatonError, from_text, to_dot, to_text
from .randgen import final_prob_schedule, gen_almost_det, trial_seed
from .subset import accessible_powerset, minimize


def _fail(exc: Exception):
    raise click.ClickException(str(exc))


def _config(config_path, overrides: dict) -> harness.ExperimentConfig:
    data = {}
    if config_path:
        with open(config_path) as fh:
            data = json.load(fh)
    data.update({k: v for k, v in overrides.items() if v is not None})
    if "kind" not in data:
        raise click.UsageError("an experiment kind is required (--experiment or config file)")
    try:
        return harness.ExperimentConfig.from_dict(data)
    except AutomatonError as exc:
        _fail(exc)


def _experiment_options(fn):
    opts = [
        click.option("--experiment", "kind", type=click.Choice(harness.KINDS), default=None),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="JSON file with ExperimentConfig fields; flags override it."),
        click.option("--n", type=int, default=None),
        click.option("--trials", type=int, default=None),
        click.option("--seed", type=int, default=None),
        click.option("--k", type=int, default=None),
        click.option("--cap", type=int, default=None),
        click.option("--threshold", type=int, default=None),
        click.option("--budget", type=int, default=None),
        click.option("--minimized/--no-minimized", default=None),
        click.option("--f-mode", type=click.Choice(["constant", "sqrt_low", "sqrt_high"]), default=None),
        click.option("--final-prob", "f_value", type=float, default=None),
        click.option("--d", type=int, default=None),
        click.option("--d1", type=float, default=None),
        click.option("--d2", type=float, default=None),
        click.option("--edge-prob", type=float, default=None),
        click.option("--depth", type=int, default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
def lab():
    """Experiments on random almost deterministic automata."""


@lab.command()
@_experiment_options
@click.option("--workers", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON-lines trial records.")
@click.option("--summary", "summary_path", type=click.Path(dir_okay=False), default=None)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
def run(config_path, out, summary_path, csv_path, **overrides):
    """Run a Monte Carlo experiment."""
    cfg = _config(config_path, overrides)
    fh = open(out, "w") if out else None
    try:
        sink = (lambda rec: fh.write(harness.record_line(rec) + "\n")) if fh else None
        records, summary = harness.run_experiment(cfg, sink)
    finally:
        if fh:
            fh.close()
    text = summary.to_json()
    if summary_path:
        with open(summary_path, "w") as sfh:
            sfh.write(text + "\n")
    else:
        click.echo(text)
    if csv_path:
        harness.write_csv(records, csv_path)


@lab.command()
@_experiment_options
@click.option("--trial", "index", type=int, required=True)
def replay(config_path, index, **overrides):
    """Re-execute one trial and print its record."""
    cfg = _config(config_path, overrides)
    try:
        click.echo(harness.record_line(harness.run_trial(cfg, index)))
    except AutomatonError as exc:
        _fail(exc)


@lab.command()
@click.option("--runs", type=int, default=1000)
@click.option("--depth", type=int, default=30)
@click.option("--seed", type=int, default=0)
@click.option("--c", "consts", type=(float, float, float), default=(0.1, 10.0, 10.0), help="c1 c2 c3")
@click.option("--t0", type=int, default=5)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV of Z_0..Z_T per run.")
@click.option("--summary", "summary_path", type=click.Path(dir_okay=False), default=None)
def gw(runs, depth, seed, consts, t0, out, summary_path):
    """Simulate the Galton-Watson process with Poi(2) offspring."""
    try:
        trajs = [gw_run(depth, trial_seed(seed, i)) for i in range(runs)]
    except AutomatonError as exc:
        _fail(exc)
    fh = open(out, "w", newline="") if out else sys.stdout
    writer = csv.writer(fh)
    writer.writerow(["run"] + [f"z{t}" for t in range(depth + 1)])
    for i, tr in enumerate(trajs):
        writer.writerow([i, *tr.z])
    if out:
        fh.close()
    c1, c2, c3 = consts
    summary = {
        "runs": runs,
        "depth": depth,
        "mean_z": [sum(tr.z[t] for tr in trajs) / runs for t in range(depth + 1)],
        "extinction": asdict(harness.Proportion.of(sum(tr.extinct for tr in trajs), runs)),
    }
    if depth >= t0:
        summary["growth_event"] = asdict(
            harness.Proportion.of(sum(gw_growth_event(tr, c1, c2, c3, t0) for tr in trajs), runs)
        )
    summary["cum_bound_exceeded"] = asdict(
        harness.Proportion.of(sum(cum_bound_exceeded(tr, min(20, depth)) for tr in trajs), runs)
    )
    text = json.dumps(summary, indent=2, sort_keys=True)
    if summary_path:
        with open(summary_path, "w") as sfh:
            sfh.write(text + "\n")
    elif out:
        click.echo(text)


@lab.group("words")
def words_group():
    """Binary word utilities."""


@words_group.command()
@click.argument("bits")
def primitive(bits):
    """Print whether BITS is primitive."""
    try:
        click.echo("true" if words.is_primitive(bits) else "false")
    except AutomatonError as exc:
        _fail(exc)


@words_group.command("odot")
@click.argument("bits1")
@click.argument("bits2")
def odot_cmd(bits1, bits2):
    """Cyclic OR of two words, extended to the lcm of their lengths."""
    try:
        click.echo(words.odot(bits1, bits2))
    except AutomatonError as exc:
        _fail(exc)


@words_group.command()
@click.option("--k", type=int, default=2)
@click.option("--cutoff", type=int, default=10**6)
def toth(k, cutoff):
    """Euler product for the pairwise-coprime probability of k integers."""
    try:
        est = words.toth_constant(k, cutoff)
    except AutomatonError as exc:
        _fail(exc)
    click.echo(json.dumps({"k": k, "cutoff": cutoff, "value": est.value, "lower": est.lower, "upper": est.upper}))


@lab.command()
@click.option("--n", type=int, required=True)
@click.option("--d", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--trials", type=int, default=1)
@click.option("--d1", type=float, default=4.0)
@click.option("--d2", type=float, default=0.5)
@click.option("--stage", type=click.Choice(probes.STAGES), default="full")
def probe(n, d, seed, trials, d1, d2, stage):
    """Run the structural probe pipeline; one JSON object per trial."""
    for i in range(trials):
        try:
            a = gen_almost_det(n, 2, 0.5, trial_seed(seed, i))
            rep = probes.probe(a.base, a.extra_src, a.extra_dst, d, d1, d2, until=stage)
        except AutomatonError as exc:
            _fail(exc)
        click.echo(json.dumps({"trial": i, **rep.as_dict()}, sort_keys=True))


def _load_or_generate(input_path, n, seed, final_prob) -> AlmostDetAutomaton:
    if input_path:
        with open(input_path) as fh:
            a = from_text(fh.read())
        if not isinstance(a, AlmostDetAutomaton):
            raise click.UsageError("input must describe an automaton (extra/initial lines)")
        if a.initial is None:
            raise click.UsageError("input automaton has no initial state")
        return a
    if n is None:
        raise click.UsageError("give --input or --n")
    return gen_almost_det(n, 2, final_prob, seed)


@lab.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--n", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--final-prob", type=float, default=0.5)
@click.option("--cap", type=int, default=10**6)
@click.option("--emit", type=click.Choice(["stats", "dot"]), default="stats")
@click.option("--minimize/--no-minimize", "do_min", default=True)
def determinize(input_path, n, seed, final_prob, cap, emit, do_min):
    """Accessible subset construction (and minimization) of one automaton."""
    try:
        a = _load_or_generate(input_path, n, seed, final_prob)
        out = accessible_powerset(a, cap)
    except AutomatonError as exc:
        _fail(exc)
    if emit == "dot":
        if not out.complete:
            raise click.ClickException(f"powerset exceeds cap ({out!r}); nothing to draw")
        click.echo(minimize(out.dfa).to_dot() if do_min else out.dfa.to_dot(), nl=False)
        return
    stats = {"n": a.n, "status": out.status, "powerset_size": out.states_discovered}
    if out.complete and do_min:
        stats["min_size"] = minimize(out.dfa).size
    click.echo(json.dumps(stats, sort_keys=True))


@lab.command()
@click.option("--n", type=int, required=True)
@click.option("--k", type=int, default=2)
@click.option("--seed", type=int, default=0)
@click.option("--f-mode", type=click.Choice(["constant", "sqrt_low", "sqrt_high"]), default="constant")
@click.option("--final-prob", type=float, default=0.5)
@click.option("--emit", type=click.Choice(["text", "dot"]), default="text")
def gen(n, k, seed, f_mode, final_prob, emit):
    """Generate a random almost deterministic automaton."""
    try:
        a = gen_almost_det(n, k, final_prob_schedule(n, f_mode, final_prob), seed)
    except AutomatonError as exc:
        _fail(exc)
    click.echo(to_text(a) if emit == "text" else to_dot(a), nl=False)


def main():
    lab()


if __name__ == "__main__":
    main()
