"""Landau-Zener two-level ODE against exp(-pi eta^2/eps) over a small grid of (eps, eta)."""
import numpy as np

from dirachop.core_math import lz_ode_oracle


def main():
    print(f"{'eps':>8s} {'eta':>8s} {'ode':>10s} {'formula':>10s} {'diff':>9s}")
    for eps in (0.05, 0.1, 0.2):
        for eta in (0.05, 0.1, 0.2, 0.3):
            ode = lz_ode_oracle(eps, eta)
            ref = np.exp(-np.pi * eta ** 2 / eps)
            print(f"{eps:8.3f} {eta:8.3f} {ode:10.6f} {ref:10.6f} {ode - ref:9.2e}")


if __name__ == "__main__":
    main()
