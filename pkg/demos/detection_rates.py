"""Fisher-test detection rates for EP, QP and PG rows on the modulated AR(2)
model with a single hidden frequency (0.1) and carrier peak at 0.3.

    python demos/detection_rates.py [replicates] [--no-qp]
"""
import sys

from expgram.experiments import detection_table

args = [a for a in sys.argv[1:] if not a.startswith("--")]
replicates = int(args[0]) if args else 200
qp_levels = () if "--no-qp" in sys.argv else (0.85, 0.9, 0.95)

table = detection_table(replicates, seed=4, qp_levels=qp_levels)
print(f"{replicates} replicates, n = 200")
print("method level " + " ".join(f"s={s:<5}" for s in table.significances))
for (method, level), row, se in zip(table.labels, table.rates, table.standard_errors):
    cells = " ".join(f"{r:.3f}+-{e:.3f}" for r, e in zip(row, se))
    print(f"{method:>6} {level:5.2f} {cells}")
