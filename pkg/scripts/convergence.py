"""Discrete-sequence holonomy against the smooth-path holonomy for growing N."""
import argparse

from chanholo.experiments import run_convergence
from _common import save

p = argparse.ArgumentParser()
p.add_argument("--path", default="random_isometry")
p.add_argument("--params", default="2,2,0,1.0")
p.add_argument("--sizes", default="125,250,500,1000,2000,4000")
p.add_argument("--steps", type=int, default=8192)
args = p.parse_args()

rep = run_convergence(
    args.path,
    [float(x) for x in args.params.split(",")],
    [int(x) for x in args.sizes.split(",")],
    steps=args.steps,
)
for n, e in rep.series:
    print(f"N={int(n):5d}  error={e:.3e}")
print("fitted order", rep.scalars["order"])
save(rep, f"convergence_{args.path}")
