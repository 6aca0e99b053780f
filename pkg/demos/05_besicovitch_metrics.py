"""The metric toolkit: d, d_N, Besicovitch, empirical measures, d_*.

All values on eventually periodic points are exact rationals; stream
comparisons carry an explicit horizon.
"""

from shiftembed import (besicovitch_estimate, cantor_distance, dN_distance,
                        empirical_measure)
from shiftembed.metrics import (convergence_report, hausdorff_distance,
                                measure_distance, periodic_orbit_measure)
from shiftembed.pipeline import build_pipeline, sample_points
from shiftembed.systems import Point, golden_mean

zero = Point("0", "0", "0", 0)
alt = Point("01", "01", "01", 0)
print("cantor(0^inf, point with a 1 at coordinate 3):",
      cantor_distance(zero, Point("0", "0001", "0", 0)))
print("d_N(0^inf, (01)^inf) for N = 0..4:",
      [dN_distance(zero, alt, N) for N in range(5)])
print("besicovitch(0^inf, (01)^inf):", besicovitch_estimate(zero, alt))

mu1 = empirical_measure(alt, 1, 10)
print("\nempirical letters of (01)^inf:", dict(mu1.freqs))
mu = empirical_measure(alt, 2, 10)
nu = periodic_orbit_measure("001", 2)
print("d_*(orbit tables):", measure_distance(mu, periodic_orbit_measure("0", 2), "01", 2))
print("hausdorff singleton check:",
      hausdorff_distance([mu], [nu], "01", 2) == measure_distance(mu, nu, "01", 2))

pipe = build_pipeline(golden_mean(), K=2, kmax=2, C=0.0, m=(0, 0))
rows = convergence_report(sample_points(golden_mean(), 2, seed=3), pipe, depth=2)
print("\nconvergence report (first rows):")
for row in rows[:6]:
    print("  point %d scale %d %-22s %s (%s)" % row)
