"""A point particle sits at v on a unit sphere; to measure it along an axis
u we stretch an elastic band between u and -u, let the particle drop
orthogonally onto the band, and snap the band at a uniformly random point.
The piece still attached to the particle contracts and drags it to one of
the two poles.

This script runs that experiment and compares the observed frequencies to
the closed form P(up) = cos^2(theta/2): the statistics of an ideal
two-outcome spin measurement, produced by a machine you could build on a
workbench.
"""

import math

from qmachine import (
    Direction,
    ElasticSpec,
    Outcome,
    RandomStream,
    measure,
    quantum_probabilities,
    run_trials,
)

AXIS = Direction(0.0, 0.0, 1.0)
BAND = ElasticSpec(1.0, 0.0)  # breakable everywhere: the full quantum machine


def watch_a_few_trials():
    print("Five individual trials at theta = 60 degrees:")
    v = Direction.from_spherical(math.radians(60.0))
    rng = RandomStream(2024)
    for k in range(5):
        outcome, post, snap = measure(v, AXIS, BAND, rng)
        pole = "+u" if outcome is Outcome.O1 else "-u"
        print(
            f"  trial {k}: band snapped at t = {snap:+.3f}  ->  particle at {pole}"
        )
    print()


def frequency_table(n=1_000_000, seed=2024):
    print(f"{n:,} trials per angle, seed {seed}:")
    print(f"{'theta':>7} {'freq(up)':>10} {'cos^2(theta/2)':>15} {'diff':>9}")
    for deg in range(0, 181, 15):
        v = Direction.from_spherical(math.radians(deg))
        table = run_trials(v, AXIS, BAND, n, seed)
        freq = table.frequency(Outcome.O1)
        exact = quantum_probabilities(v, AXIS).p1
        print(f"{deg:>6}d {freq:>10.5f} {exact:>15.5f} {freq - exact:>+9.5f}")


if __name__ == "__main__":
    watch_a_few_trials()
    frequency_table()
