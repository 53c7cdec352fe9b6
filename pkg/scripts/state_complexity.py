"""Minimal DFA sizes of random almost deterministic automata (exact or lower bound)."""

from _common import base_parser, run_and_print

from almostdet.harness import ExperimentConfig

if __name__ == "__main__":
    ap = base_parser(__doc__, n=50, trials=40)
    ap.add_argument("--cap", type=int, default=200_000)
    ap.add_argument("--f-mode", default="constant", choices=["constant", "sqrt_low", "sqrt_high"])
    ap.add_argument("--f-value", type=float, default=0.5)
    a = ap.parse_args()
    run_and_print(
        ExperimentConfig(kind="state_complexity", n=a.n, trials=a.trials, seed=a.seed, cap=a.cap,
                         f_mode=a.f_mode, f_value=a.f_value, workers=a.workers),
        a.out,
    )
