"""Interferometer signal of a spin-1/2 rotated by phi in one arm, phi in [0, 8 pi]."""
import argparse

import numpy as np

from chanholo.experiments import run_4pi
from _common import save

p = argparse.ArgumentParser()
p.add_argument("--points", type=int, default=512)
p.add_argument("--chi-points", type=int, default=720)
args = p.parse_args()

rep = run_4pi(np.linspace(0, 8 * np.pi, args.points), chi_points=args.chi_points)
save(rep, "four_pi")
