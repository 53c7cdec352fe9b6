"""Galton-Watson Poi(2) statistics: extinction, normalized sizes and growth events."""

from _common import base_parser, run_and_print

from almostdet.harness import ExperimentConfig

if __name__ == "__main__":
    ap = base_parser(__doc__, n=1, trials=100_000)
    ap.add_argument("--depth", type=int, default=30)
    a = ap.parse_args()
    run_and_print(ExperimentConfig(kind="gw_stats", trials=a.trials, seed=a.seed, depth=a.depth, workers=a.workers), a.out)
