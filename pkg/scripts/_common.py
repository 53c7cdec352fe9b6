import argparse
import json
import sys

from almostdet.harness import ExperimentConfig, record_line, run_experiment


def run_and_print(cfg: ExperimentConfig, out: str | None = None):
    sink_file = open(out, "w") if out else None
    sink = (lambda r: sink_file.write(record_line(r) + "\n")) if sink_file else None
    try:
        records, summary = run_experiment(cfg, sink=sink)
    finally:
        if sink_file:
            sink_file.close()
    json.dump(summary.to_dict(), sys.stdout, indent=2)
    print()
    return records, summary


def base_parser(description: str, n: int, trials: int) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--n", type=int, default=n)
    ap.add_argument("--trials", type=int, default=trials)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", help="JSONL file for per-trial records")
    return ap
