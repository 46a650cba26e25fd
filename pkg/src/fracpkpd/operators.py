"""psi-Riemann-Liouville integral, psi-Caputo derivative and psi-convolution.

Quadrature works in the transformed variable ``x = psi(s)``, which removes
``psi'`` from every integrand.  For the weakly singular kernel
``(psi(t) - x)**(alpha - 1)`` a second substitution ``v = (psi(t) - x)**alpha``
turns the integral into one with a bounded integrand.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError
from .psi import PsiFunction
from .special import rgamma

QUAD_RTOL = 1e-10
QUAD_LIMIT = 200


def _quad(func, lo: float, hi: float, rtol: float, points=None) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr, info = integrate.quad(
            func, lo, hi, epsabs=0.0, epsrel=rtol, limit=QUAD_LIMIT, points=points, full_output=1
        )[:3]
    if abserr > max(100 * rtol * abs(value), 1e-13):
        raise AccuracyError(
            f"quadrature estimate {abserr:.3e} exceeds tolerance (value {value:.6e})",
            estimate=abserr,
        )
    return value


def psi_rl_integral(
    f,
    alpha: float,
    psi: PsiFunction,
    a: float,
    t: float,
    rtol: float = QUAD_RTOL,
) -> float:
    """Left psi-Riemann-Liouville integral ``I_a^{alpha,psi} f(t)``.

    ``f`` is a scalar callable of the original time variable.  Any order
    ``alpha > 0`` is accepted, which lets the same routine evaluate
    ``I^{(p+1) alpha}`` directly.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not t > a:
        raise DomainError(f"need t > a, got a={a}, t={t}")
    X = float(psi.value(t))
    V = (X - float(psi.value(a))) ** alpha
    inv = 1.0 / alpha

    def integrand(v):
        return f(float(psi.inverse(X - v**inv)))

    return _quad(integrand, 0.0, V, rtol) * rgamma(alpha + 1.0)


def psi_rl_integral_grid(grid, values, alpha: float, psi: PsiFunction) -> np.ndarray:
    """psi-RL integral of grid data at every grid node.

    ``values`` are interpolated piecewise linearly in ``tau = psi(s)`` and the
    kernel is integrated exactly against each linear piece (product
    trapezoidal rule).  ``values`` may carry trailing dimensions.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    tau = psi.value(np.asarray(grid, dtype=float))
    tau = tau - tau[0]
    f = np.asarray(values, dtype=float)
    n = tau.size
    out = np.zeros_like(f)
    h = np.diff(tau)
    for k in range(1, n):
        d_lo = tau[k] - tau[:k]  # distance to left end of each cell
        d_hi = tau[k] - tau[1 : k + 1]
        P = (d_lo ** (alpha + 1) - d_hi ** (alpha + 1)) / (alpha + 1)
        Q = (d_lo**alpha - d_hi**alpha) / alpha
        w_left = (P - d_hi * Q) / h[:k]
        w_right = (d_lo * Q - P) / h[:k]
        out[k] = np.tensordot(w_left, f[:k], axes=(0, 0)) + np.tensordot(w_right, f[1 : k + 1], axes=(0, 0))
    return out * rgamma(alpha)


def psi_caputo_derivative_grid(grid, values, alpha: float, psi: PsiFunction) -> np.ndarray:
    """L1 approximation of the psi-Caputo derivative at every grid node.

    Uses the kernel ``(psi(t) - psi(s))**(-alpha)`` on the (possibly
    non-uniform) transformed grid ``tau = psi(s)``.  For ``alpha = 1`` this is
    the backward difference of ``f`` with respect to ``psi``.  The value at the
    first node is 0.
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    tau = psi.value(np.asarray(grid, dtype=float))
    tau = tau - tau[0]
    f = np.asarray(values, dtype=float)
    if np.any(np.diff(tau) <= 0):
        raise DomainError("grid must be strictly increasing in psi")
    slopes = np.diff(f, axis=0) / np.diff(tau).reshape((-1,) + (1,) * (f.ndim - 1))
    out = np.zeros_like(f)
    if alpha == 1.0:
        out[1:] = slopes
        return out
    beta = 1.0 - alpha
    for k in range(1, tau.size):
        w = (tau[k] - tau[:k]) ** beta - (tau[k] - tau[1 : k + 1]) ** beta
        out[k] = np.tensordot(w, slopes[:k], axes=(0, 0))
    return out * rgamma(2.0 - alpha)


def psi_caputo_derivative(grid, values, alpha: float, psi: PsiFunction, t: float) -> float:
    """L1 psi-Caputo derivative of sampled ``f`` at the grid node ``t``.

    The lower terminal is ``grid[0]``.  At least four samples are required
    before ``t``.
    """
    grid = np.asarray(grid, dtype=float)
    hits = np.flatnonzero(np.isclose(grid, t, rtol=0.0, atol=1e-12 * max(1.0, abs(t))))
    if hits.size == 0:
        raise DomainError(f"t={t} is not a grid node")
    k = int(hits[0])
    if k < 4:
        raise AccuracyError(f"only {k} grid points before t={t}; need at least 4")
    return psi_caputo_derivative_grid(grid[: k + 1], np.asarray(values)[: k + 1], alpha, psi)[k]


def generalized_convolution(
    f,
    g,
    psi: PsiFunction,
    a: float,
    t: float,
    rtol: float = QUAD_RTOL,
    g_singular_exponent: float | None = None,
) -> float:
    """Generalized psi-convolution ``(f *_psi g)(t)``.

    Integrates ``f(s) g(psi^{-1}(psi(t) + psi(a) - psi(s))) psi'(s)`` over
    ``[a, t]`` in the variable ``x = psi(s)``.  If ``g`` behaves like
    ``(psi(z) - psi(a))**e`` near ``z = a`` with ``-1 < e < 0``, pass
    ``g_singular_exponent=e``; the singularity at ``x = psi(t)`` is then
    removed by the substitution ``w = (psi(t) - x)**(e + 1)``.
    """
    if not t > a:
        raise DomainError(f"need t > a, got a={a}, t={t}")
    Xa = float(psi.value(a))
    Xt = float(psi.value(t))
    L = Xt - Xa

    def pair(x):
        return f(float(psi.inverse(x))) * g(float(psi.inverse(Xt + Xa - x)))

    if g_singular_exponent is None or g_singular_exponent >= 0:
        return _quad(pair, Xa, Xt, rtol)
    e1 = g_singular_exponent + 1.0
    if not e1 > 0:
        raise DomainError("singular exponent must be greater than -1")
    inv = 1.0 / e1

    def smooth(w):
        # r = psi(t) - x, dx = r**(1 - e1) dw / e1; Gauss-Kronrod never samples w = 0
        r = w**inv
        return pair(Xt - r) * r ** (1.0 - e1) / e1

    return _quad(smooth, 0.0, L**e1, rtol)


def rl_integral_of_constant(c: float, alpha: float, psi: PsiFunction, a: float, t: float) -> float:
    """Closed form ``c (psi(t) - psi(a))**alpha / Gamma(alpha + 1)``."""
    return c * float(psi.value(t) - psi.value(a)) ** alpha / math.gamma(alpha + 1.0)
