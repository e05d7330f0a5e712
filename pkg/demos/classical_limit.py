"""A detection with tunable randomness, acting on a probability density
phi(x): cut phi at the constant level whose cap holds mass eps, keep the
cap, divide by eps.  The density itself never changes -- only the amount of
randomness left in the detection does.

Shrinking eps squeezes the surviving cap toward the maximum of phi, so the
eps -> 0 limit localizes the outcome at the original peak: a classical
point detection recovered as the zero-randomness limit.
"""

from qmachine import epsilon_transform, gaussian_grid, localization

BAR_WIDTH = 56


def sketch(grid, label):
    v = grid.values
    step = max(1, grid.n // BAR_WIDTH)
    cells = [v[i : i + step].max() for i in range(0, grid.n, step)]
    top = max(cells)
    line = "".join(" .:-=+*#%@"[min(9, int(10 * c / top))] if c > 0 else " " for c in cells)
    print(f"  {label:<12} |{line}|")


def shrink_the_randomness():
    grid = gaussian_grid(2001)
    print("Cut-and-renormalize sequence on a Gaussian density:")
    sketch(grid, "original")
    for eps in (0.5, 0.1, 0.01, 0.001):
        report = epsilon_transform(grid, eps)
        sketch(report.transformed, f"eps = {eps:g}")
    print()

    print(f"{'eps':>8} {'threshold':>11} {'support':>9} {'variance':>10} {'mode':>7}")
    for eps in (1.0, 0.5, 0.1, 0.01, 0.001):
        report = epsilon_transform(grid, eps)
        loc = localization(report.transformed)
        print(
            f"{eps:>8g} {report.threshold:>11.4f} {loc.support_width:>9.3f}"
            f" {loc.variance:>10.6f} {loc.modes[0]:>7.3f}"
        )
    print()
    print("Mass stays exactly 1 at every step; the support shrinks onto the")
    print("peak and the variance collapses: the delta-limit sits at the")
    print("original maximum.")


if __name__ == "__main__":
    shrink_the_randomness()
