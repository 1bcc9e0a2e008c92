"""Regenerate belt20_97_116.csv: a synthetic 20-object main-belt catalog.

The elements are drawn from a fixed-seed generator and do NOT correspond to
any real asteroid. Drop a real catalog in the same format next to it to run
against actual data.
"""
import numpy as np

rng = np.random.default_rng(20190501)
rows = []
for ident in range(97, 117):
    a = rng.uniform(2.2, 3.2)
    e = rng.uniform(0.02, 0.22)
    i = rng.uniform(0.5, 14.0)
    raan = rng.uniform(0.0, 360.0)
    argp = rng.uniform(0.0, 360.0)
    m0 = rng.uniform(0.0, 360.0)
    rows.append((ident, a, e, i, raan, argp, m0))

with open("belt20_97_116.csv", "w") as f:
    f.write("# SYNTHETIC main-belt catalog (not GTOC 2 data); see data/README.md\n")
    f.write("# angles: deg\n")
    f.write("# epoch column: MJD2000 days\n")
    f.write("id,a,e,i,raan,argp,M0,epoch\n")
    for ident, a, e, i, raan, argp, m0 in rows:
        f.write(f"{ident},{a:.8f},{e:.8f},{i:.6f},{raan:.6f},{argp:.6f},{m0:.6f},2955.0\n")
