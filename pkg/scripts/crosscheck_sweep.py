"""Direct / Uhlmann / gluing holonomies for many seeds and shapes; prints worst residuals."""
import argparse
from concurrent.futures import ProcessPoolExecutor

from chanholo.experiments import ExperimentReport, run_crosscheck
from _common import save


def one(args):
    seed, n, d, k = args
    return run_crosscheck(seed=seed, n=n, d=d, k=k)


p = argparse.ArgumentParser()
p.add_argument("--seeds", type=int, default=20)
p.add_argument("--jobs", type=int, default=1)
args = p.parse_args()

shapes = [(4, 2, 4), (6, 2, 2), (3, 3, 9), (5, 3, 2), (2, 1, 1)]
tasks = [(s, n, d, k) for s in range(args.seeds) for n, d, k in shapes]
if args.jobs > 1:
    with ProcessPoolExecutor(args.jobs) as pool:
        reports = list(pool.map(one, tasks))
else:
    reports = [one(t) for t in tasks]

summary = ExperimentReport("crosscheck_sweep", params={"seeds": args.seeds, "shapes": shapes})
worst = {}
for r in reports:
    for key, v in r.residuals.items():
        worst[key] = max(worst.get(key, 0.0), v)
        summary.thresholds.setdefault(key, r.thresholds[key])
for key, v in worst.items():
    summary.check(key, v, summary.thresholds[key])
    print(f"{key:28s} worst {v:.2e}")
save(summary, "crosscheck_sweep")
