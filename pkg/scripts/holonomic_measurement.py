"""Projective-measurement approximation of holonomic channels and solid-angle phases."""
import numpy as np

from chanholo.experiments import run_holonomic
from chanholo.holonomic import bloch_circle, holonomic_channel_holonomy
from _common import save

ns = (4, 16, 64, 256, 1024)
for name, params in (("rotating_plane", ()), ("bloch_circle", (1.0,))):
    rep = run_holonomic(name, params, ns)
    for n, d, mass in rep.series:
        print(f"{name:15s} N={int(n):5d}  trace distance={d:.3e}  remainder={mass:.3e}")
    save(rep, f"holonomic_{name}")

print("\ntheta   solid angle   -arg(up)   arg(down)")
for theta in np.linspace(0.2, 3.0, 8):
    ph = np.angle(np.diag(holonomic_channel_holonomy(bloch_circle(theta))))
    omega = 2 * np.pi * (1 - np.cos(theta))
    print(f"{theta:5.2f}  {omega:11.5f}  {np.mod(-2 * ph[0], 4 * np.pi):9.5f}  {np.mod(2 * ph[1], 4 * np.pi):9.5f}")
