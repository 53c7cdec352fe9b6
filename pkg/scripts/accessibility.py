"""How often the source of the extra edge is unreachable from the initial state."""

import math

from _common import base_parser, run_and_print

from almostdet.harness import ExperimentConfig


def giant_fraction(k: int = 2) -> float:
    v = 0.5
    for _ in range(200):
        v = 1.0 - math.exp(-k * v)
    return v


if __name__ == "__main__":
    a = base_parser(__doc__, n=2000, trials=5000).parse_args()
    _, summary = run_and_print(
        ExperimentConfig(kind="accessibility", n=a.n, trials=a.trials, seed=a.seed, workers=a.workers), a.out
    )
    print(f"limit 1 - nu = {1 - giant_fraction():.4f}")
