"""Gamma and Mittag-Leffler functions.

The Mittag-Leffler series are summed directly.  Powers and partial sums are
carried in ``numpy.longdouble`` so that alternating series with moderately
large arguments (|z| around 5-10) keep close to double-precision accuracy in
the final result.  Coefficients ``1/Gamma(l*alpha + alpha')`` come from
``math.gamma`` while it is finite and from the log-gamma otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

_LD = np.longdouble

# math.gamma overflows a double just above 171.6
_GAMMA_DIRECT_LIMIT = 170.0


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for the Mittag-Leffler series.

    Summation stops once ``consecutive_small_terms`` successive terms each have
    norm below ``rel_tol`` times the norm of the running partial sum.
    """

    rel_tol: float = 1e-14
    consecutive_small_terms: int = 3
    max_terms: int = 500

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.consecutive_small_terms < 2:
            raise ValueError("consecutive_small_terms must be at least 2")
        if self.max_terms < 10:
            raise ValueError("max_terms must be at least 10")


DEFAULT_POLICY = TruncationPolicy()


def gamma_ln(x: float) -> float:
    """Natural logarithm of the Gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"gamma_ln requires a finite x > 0, got {x}")
    return math.lgamma(x)


def rgamma(x: float) -> float:
    """Reciprocal Gamma function ``1/Gamma(x)`` for ``x > 0``."""
    if x < _GAMMA_DIRECT_LIMIT:
        if not x > 0:
            raise DomainError(f"rgamma requires x > 0, got {x}")
        return 1.0 / math.gamma(x)
    return math.exp(-gamma_ln(x))


def _check_params(alpha: float, alpha_prime: float) -> None:
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not alpha_prime > 0:
        raise DomainError(f"alpha_prime must be positive, got {alpha_prime}")


def _min_terms(alpha: float) -> int:
    # early terms of two-parameter series can grow before they decay
    return math.ceil(1.0 / alpha) + 2


def mittag_leffler_scalar(
    alpha: float,
    alpha_prime: float,
    z: float,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> float:
    """Two-parameter Mittag-Leffler function ``E_{alpha, alpha'}(z)`` for real ``z``.

    The one-parameter function is the case ``alpha_prime = 1``.

    Raises:
        ConvergenceError: if the series has not met the stopping rule after
            ``policy.max_terms`` terms; the partial sum is attached.
    """
    _check_params(alpha, alpha_prime)
    zl = _LD(z)
    power = _LD(1.0)
    total = _LD(0.0)
    n_min = _min_terms(alpha)
    small = 0
    for l in range(policy.max_terms):
        term = power * _LD(rgamma(l * alpha + alpha_prime))
        total += term
        if not np.isfinite(total):
            raise ConvergenceError(
                f"Mittag-Leffler series overflowed at term {l} (z={z})",
                partial_sum=float(total),
                n_terms=l + 1,
            )
        if abs(term) <= policy.rel_tol * abs(total):
            small += 1
        else:
            small = 0
        if small >= policy.consecutive_small_terms and l + 1 >= n_min:
            return float(total)
        power *= zl
    raise ConvergenceError(
        f"Mittag-Leffler series did not converge in {policy.max_terms} terms (z={z})",
        partial_sum=float(total),
        n_terms=policy.max_terms,
    )


def mittag_leffler_matrix(
    alpha: float,
    alpha_prime: float,
    M,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> np.ndarray:
    """Matrix Mittag-Leffler function ``sum_l M^l / Gamma(l*alpha + alpha')``.

    Powers of ``M`` are accumulated by repeated multiplication.  At ``M = 0``
    the result is exactly ``I / Gamma(alpha')``.
    """
    _check_params(alpha, alpha_prime)
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix argument has non-finite entries")

    Ml = M.astype(_LD)
    power = np.eye(M.shape[0], dtype=_LD)
    total = np.zeros_like(power)
    n_min = _min_terms(alpha)
    small = 0
    for l in range(policy.max_terms):
        term = power * _LD(rgamma(l * alpha + alpha_prime))
        total += term
        total_norm = np.max(np.abs(total))
        if not np.isfinite(total_norm):
            raise ConvergenceError(
                f"matrix Mittag-Leffler series overflowed at term {l}",
                partial_sum=total.astype(float),
                n_terms=l + 1,
            )
        if np.max(np.abs(term)) <= policy.rel_tol * total_norm:
            small += 1
        else:
            small = 0
        if small >= policy.consecutive_small_terms and l + 1 >= n_min:
            return total.astype(float)
        power = power @ Ml
    raise ConvergenceError(
        f"matrix Mittag-Leffler series did not converge in {policy.max_terms} terms",
        partial_sum=total.astype(float),
        n_terms=policy.max_terms,
    )
