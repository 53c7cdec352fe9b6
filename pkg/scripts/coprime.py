"""Pairwise coprimality of d+1 uniform integers in [sqrt n, 2 sqrt n]."""

from _common import base_parser, run_and_print

from almostdet.harness import ExperimentConfig
from almostdet.words import toth_constant

if __name__ == "__main__":
    ap = base_parser(__doc__, n=10**6, trials=100_000)
    ap.add_argument("--d", type=int, default=1)
    a = ap.parse_args()
    run_and_print(ExperimentConfig(kind="coprime_rate", n=a.n, trials=a.trials, seed=a.seed, d=a.d, workers=a.workers), a.out)
    est = toth_constant(a.d + 1)
    print(f"limit A_{a.d + 1} in [{est.lower:.5f}, {est.upper:.5f}]")
