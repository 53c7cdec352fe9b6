"""Success rate of the backward/forward/thread probe pipeline, with stage counts."""

from _common import base_parser, run_and_print

from almostdet.harness import ExperimentConfig

if __name__ == "__main__":
    ap = base_parser(__doc__, n=400, trials=20_000)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--d1", type=float, default=4.0)
    ap.add_argument("--d2", type=float, default=0.5)
    a = ap.parse_args()
    run_and_print(
        ExperimentConfig(kind="probe_pipeline", n=a.n, trials=a.trials, seed=a.seed, d=a.d,
                         d1=a.d1, d2=a.d2, workers=a.workers),
        a.out,
    )
