"""Dirac symbol, band eigenstructure, spectral propagator and Landau-Zener rates.

All functions are vectorised over leading axes: a momentum argument of shape
``(..., 2)`` yields matrices of shape ``(..., 2, 2)`` or vectors of shape
``(..., 2)``.
"""
import numpy as np
from scipy import constants
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DegenerateMomentumError, ZeroGradientError

#: Momenta with ``|xi| <= XI_TOL`` are treated as the Dirac point.
XI_TOL = 1e-14

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


def _band_sign(band):
    if band in (1, "+", "plus"):
        return 1
    if band in (-1, "-", "minus"):
        return -1
    raise ValueError(f"band must be +1/-1 or '+'/'-', got {band!r}")


def _as_momentum(xi):
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != 2:
        raise ValueError(f"momentum must have trailing dimension 2, got shape {xi.shape}")
    return xi


def _check_nondegenerate(xi):
    norm = np.hypot(xi[..., 0], xi[..., 1])
    tol = XI_TOL * np.maximum(1.0, np.max(np.abs(xi), initial=0.0))
    if np.any(norm <= tol):
        raise DegenerateMomentumError("band eigenstructure is undefined at xi = 0")
    return norm


def dirac_symbol(xi):
    """Return ``B(xi) = xi_1 sigma_1 + xi_2 sigma_2``."""
    xi = _as_momentum(xi)
    return xi[..., 0, None, None] * SIGMA1 + xi[..., 1, None, None] * SIGMA2


def band_eigenvector(band, xi):
    """Normalised eigenvector of ``B(xi)`` for eigenvalue ``band * |xi|``."""
    s = _band_sign(band)
    xi = _as_momentum(xi)
    norm = _check_nondegenerate(xi)
    phase = (xi[..., 0] + 1j * xi[..., 1]) / norm
    return np.stack([np.ones_like(phase), s * phase], axis=-1) / np.sqrt(2.0)


def band_projector(band, xi):
    """Spectral projector ``(I + band * B(xi)/|xi|) / 2``."""
    s = _band_sign(band)
    xi = _as_momentum(xi)
    norm = _check_nondegenerate(xi)
    return 0.5 * (IDENTITY + s * dirac_symbol(xi) / norm[..., None, None])


def rotation_R():
    """Unitary ``R`` with ``B(xi) = R^* A(xi) R``."""
    return np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2.0)


def symbol_A(xi):
    """Real symmetric symbol ``A(xi) = [[xi1, xi2], [xi2, -xi1]]``."""
    xi = _as_momentum(xi)
    out = np.empty(xi.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = xi[..., 0]
    out[..., 0, 1] = xi[..., 1]
    out[..., 1, 0] = xi[..., 1]
    out[..., 1, 1] = -xi[..., 0]
    return out


def propagator_M(delta, xi):
    """Free Dirac propagator ``exp(-i delta B(xi))``.

    Evaluated as ``cos(delta|xi|) I - i delta sinc(delta|xi|) B(xi)``, which is
    smooth through ``xi = 0`` where it reduces to the identity.
    """
    xi = _as_momentum(xi)
    delta = np.asarray(delta, dtype=float)
    norm = np.hypot(xi[..., 0], xi[..., 1])
    arg = delta * norm
    # sin(delta|xi|)/|xi| without dividing by zero
    sin_over_norm = delta * np.sinc(arg / np.pi)
    return (np.cos(arg)[..., None, None] * IDENTITY
            - 1j * sin_over_norm[..., None, None] * dirac_symbol(xi))


def wedge(xi, zeta):
    """``xi ^ zeta = xi_2 zeta_1 - xi_1 zeta_2``."""
    xi = np.asarray(xi, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    return xi[..., 1] * zeta[..., 0] - xi[..., 0] * zeta[..., 1]


def lz_rate(x_star, xi_star, grad_u, h):
    """Landau-Zener transition probability at a point of the hopping surface.

    ``exp(-(pi/h) (xi ^ gradU)^2 / |gradU|^3)``. ``x_star`` is accepted for
    symmetry with the phase-space point but only enters through ``grad_u``.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    grad_u = np.asarray(grad_u, dtype=float)
    gnorm = np.hypot(grad_u[..., 0], grad_u[..., 1])
    if np.any(gnorm == 0):
        raise ZeroGradientError("Landau-Zener rate is singular where grad U = 0")
    w = wedge(xi_star, grad_u)
    return np.exp(-np.pi / h * w**2 / gnorm**3)


def _lz_transition(eps, eta, S, rtol):
    def rhs(s, psi):
        return -1j / eps * np.array([s * psi[0] + eta * psi[1], eta * psi[0] - s * psi[1]])

    def lower_state(s):
        _, vecs = np.linalg.eigh(np.array([[s, eta], [eta, -s]], dtype=float))
        return vecs[:, 0]

    def upper_state(s):
        _, vecs = np.linalg.eigh(np.array([[s, eta], [eta, -s]], dtype=float))
        return vecs[:, 1]

    psi0 = lower_state(-S).astype(complex)
    sol = solve_ivp(rhs, (-S, S), psi0, method="RK45", rtol=rtol, atol=rtol * 1e-2)
    if not sol.success:
        raise ConvergenceError(f"Landau-Zener ODE integration failed: {sol.message}")
    psi = sol.y[:, -1]
    return float(abs(np.vdot(upper_state(S), psi)) ** 2)


def lz_ode_oracle(eps, eta, rtol=1e-8, conv_tol=2e-3, max_doublings=4):
    """Adiabatic transition probability of ``i eps psi' = [[s, eta], [eta, -s]] psi``.

    Integrates from ``-S`` to ``S`` starting in the lower adiabatic state and
    returns the population found in the upper adiabatic state at ``S``. ``S``
    starts at ``max(sqrt(50 eps), 5|eta|, 1)`` and is doubled until the result
    changes by less than ``conv_tol``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    S = max(np.sqrt(50.0 * eps), 5.0 * abs(eta), 1.0)
    prev = _lz_transition(eps, eta, S, rtol)
    for _ in range(max_doublings):
        S *= 2.0
        cur = _lz_transition(eps, eta, S, rtol)
        if abs(cur - prev) < conv_tol:
            return cur
        prev = cur
    raise ConvergenceError(f"Landau-Zener oracle not converged after doubling S to {S}")


def semiclassical_h(m_eff, v_f, length):
    """Dimensionless semiclassical parameter ``hbar / (m_eff v_F L)`` (SI inputs)."""
    if m_eff <= 0 or v_f <= 0 or length <= 0:
        raise ValueError("m_eff, v_F and L must all be positive")
    return constants.hbar / (m_eff * v_f * length)


def graphene_h(m_ratio=0.067, v_f=1e6, length=500e-9):
    """``semiclassical_h`` with the effective mass given as a multiple of ``m_e``."""
    return semiclassical_h(m_ratio * constants.m_e, v_f, length)
