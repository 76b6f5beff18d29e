"""Share of the (unit-sum) ensemble-mean spectrum in the lowest tenth of
frequencies for GARCH(1,1) returns: the volatility clustering shows up as
low-frequency mass in the 0.9-expectile periodogram but not in the PG."""
import sys

from expgram.experiments import ensemble_means, low_frequency_mass
from expgram.sim import Garch11

replicates = int(sys.argv[1]) if len(sys.argv) > 1 else 100
ep, pg = ensemble_means(Garch11(), 1024, replicates, seed=8, levels=(0.5, 0.9))
for label, row in (("PG", pg), ("EP(0.5)", ep[0]), ("EP(0.9)", ep[1])):
    print(f"{label:>8}: {low_frequency_mass(row):.4f}")
