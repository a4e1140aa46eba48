"""
Growth of loop-erased random walk
=================================

Mean length of the loop erasure of a walk run to Euclidean radius r, and
the log-log slope that estimates the growth exponent 5/4.  The same fit at
two box margins shows how much the finite box matters.
"""
from ustlab import KAPPA
from ustlab.experiments import run_lerw_exponent

for margin in (2.0, 4.0):
    out = run_lerw_exponent(rmax=64, samples=300, margin=margin, seed=3)
    print(f"margin {margin}: slope {out.estimate:.3f} +- {out.stderr:.3f} (target {KAPPA})")
    for r, m, e, n in out.rows:
        print(f"   r={r:4.0f}  mean |L_r| = {m:8.2f} +- {e:.2f}  ({n} walks)")
