"""Overlap matrices of phase flip, bit flip and amplitude damping against their reference closed forms."""
import numpy as np

from chanholo.experiments import computed_overlaps, reference_overlaps, run_overlap_fixtures
from _common import save

rep = run_overlap_fixtures(np.linspace(0, 1, 5))
for key, v in rep.residuals.items():
    print(f"{key:24s} {v:.3e}")
print("T_GF deviation from sqrt(pg pf) in the [1,1] entry:", rep.scalars["T_GF_vs_sqrt_pg_pf"])

pe, pf, pg = 0.3, 0.2, 0.6
got, want = computed_overlaps(pe, pf, pg), reference_overlaps(pe, pf, pg)
print(f"\nat pe={pe}, pf={pf}, pg={pg}:")
for key in got:
    print(key, "computed", np.round(got[key].real, 6).tolist(), "reference", np.round(want[key].real, 6).tolist())
save(rep, "fixtures")
