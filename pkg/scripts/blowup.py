"""Fraction of random almost deterministic automata whose powerset exceeds n^3 states."""

from _common import base_parser, run_and_print

from almostdet.harness import ExperimentConfig

if __name__ == "__main__":
    ap = base_parser(__doc__, n=100, trials=1000)
    ap.add_argument("--cap", type=int, default=10**6)
    ap.add_argument("--minimized", action="store_true", help="also minimize complete powersets")
    a = ap.parse_args()
    run_and_print(
        ExperimentConfig(kind="blowup", n=a.n, trials=a.trials, seed=a.seed, cap=a.cap,
                         minimized=a.minimized, workers=a.workers),
        a.out,
    )
