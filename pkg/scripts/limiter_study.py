"""Compare MUSCL slope limiters.

Part 1: L1 error of a Gaussian advected over one period, under grid doubling.
Part 2: coupled phase-space model, lower-band population against the exact
characteristic solution (Gauss-Hermite over the xi1 marginal), for two
resolutions. Populations do not depend on the x1 resolution, so nx is small.
"""
import numpy as np
from scipy.integrate import solve_ivp

from dirachop.asymptotic_models import ModelConfig, muscl_advect_1d, run_coupled_model

LIMITERS = ("minmod", "mc", "superbee")


def period_error(n, limiter):
    x = (np.arange(n) + 0.5) / n
    q0 = np.exp(-((x - 0.5) / 0.08) ** 2)
    q = q0
    for _ in range(2 * n):
        q = muscl_advect_1d(q, 1.0, 0.5 / n, 1.0 / n, limiter)
    return np.sum(np.abs(q - q0)) / n


def rhs(k0, xi2, alpha, h):
    def f(t, y):
        xi1 = k0 - alpha * t
        n2 = xi1 ** 2 + xi2 ** 2
        n = np.sqrt(n2)
        a, e = alpha * xi2 / n2, (xi1 + 1j * xi2) / n
        b = 0.5 * alpha * xi2 * (xi1 - 1j * xi2) / n ** 3
        lam = -2 * n / h - alpha * xi2 / n2
        wi = y[2] + 1j * y[3]
        s = a * np.imag(e * wi)
        dwi = 1j * lam * wi - 1j * b * (y[0] - y[1])
        return [s, -s, dwi.real, dwi.imag]
    return f


def exact_p_minus(times, h=1e-3, xi2=1e-2, alpha=15.0, nodes=40):
    u, w = np.polynomial.hermite.hermgauss(nodes)
    out = np.zeros(len(times))
    for ui, wi in zip(u, w):
        sol = solve_ivp(rhs(1 + np.sqrt(h) * ui, xi2, alpha, h), (0, times[-1]), [1, 0, 0, 0], t_eval=times,
                        method="DOP853", rtol=1e-10, atol=1e-12)
        out += wi / np.sqrt(np.pi) * sol.y[1]
    return out


def main():
    print("one-period L1 error, n = 100, 200, 400")
    for lim in LIMITERS:
        e = [period_error(n, lim) for n in (100, 200, 400)]
        print(f"  {lim:9s} " + "  ".join(f"{v:.3e}" for v in e) + f"   ratios {e[0] / e[1]:.2f} {e[1] / e[2]:.2f}")
    print("coupled model: max_t |P_- - exact|")
    for nxi in (500, 1000):
        for lim in LIMITERS:
            # time step of the full square grid, so the xi1 CFL number matches production runs
            dt = ModelConfig(nx=nxi, nxi=nxi).time_step()
            res = run_coupled_model(ModelConfig(nx=8, nxi=nxi, limiter=lim, n_records=100, dt=dt))
            t, _, pm, tot = res.series.arrays()
            err = np.max(np.abs(pm / tot - exact_p_minus(t)))
            print(f"  nxi={nxi:5d} {lim:9s} {err:.4f}  final P_- {pm[-1] / tot[-1]:.5f}")


if __name__ == "__main__":
    main()
