"""Time-rescaling functions psi used by the psi-fractional operators.

Every operator in this package depends on psi only through differences
``psi(t) - psi(s)`` and through ``psi^{-1}``, so ``psi'`` is never evaluated
at the left endpoint.  This is what allows ``psi(t) = sqrt(t)`` on ``[0, T]``
even though its derivative blows up at 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError


class PsiFunction:
    """Strictly increasing time map with value, derivative and inverse."""

    name = "psi"

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    def inverse(self, x):
        raise NotImplementedError

    def __call__(self, t):
        return self.value(t)

    def descriptor(self) -> str:
        """Short string form, parseable by :func:`parse_psi` for built-in kinds."""
        return self.name

    def domain_start(self) -> float:
        """Smallest admissible time."""
        return -np.inf

    def __repr__(self) -> str:
        return f"<PsiFunction {self.descriptor()}>"


class Identity(PsiFunction):
    name = "identity"

    def value(self, t):
        return np.asarray(t, dtype=float) + 0.0

    def derivative(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def inverse(self, x):
        return np.asarray(x, dtype=float) + 0.0


@dataclass(frozen=True, repr=False)
class Shift(PsiFunction):
    c: float

    name = "shift"

    def value(self, t):
        return np.asarray(t, dtype=float) + self.c

    def derivative(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def inverse(self, x):
        return np.asarray(x, dtype=float) - self.c

    def descriptor(self) -> str:
        return f"shift:{self.c:g}"


@dataclass(frozen=True, repr=False)
class Power(PsiFunction):
    """``psi(t) = t**p`` on ``t >= 0``."""

    p: float

    name = "power"

    def __post_init__(self) -> None:
        if not self.p > 0:
            raise ValidationError(f"power exponent must be positive, got {self.p}", field="psi")

    def value(self, t):
        return np.asarray(t, dtype=float) ** self.p

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return self.p * t ** (self.p - 1.0)

    def inverse(self, x):
        return np.asarray(x, dtype=float) ** (1.0 / self.p)

    def descriptor(self) -> str:
        return f"power:{self.p:g}"

    def domain_start(self) -> float:
        return 0.0


class Sqrt(PsiFunction):
    """``psi(t) = sqrt(t)``; the derivative is infinite at ``t = 0``."""

    name = "sqrt"

    def value(self, t):
        return np.sqrt(np.asarray(t, dtype=float))

    def derivative(self, t):
        with np.errstate(divide="ignore"):
            return 0.5 / np.sqrt(np.asarray(t, dtype=float))

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        return x * x

    def domain_start(self) -> float:
        return 0.0


class CustomPsi(PsiFunction):
    """User-supplied psi given by three callables."""

    def __init__(
        self,
        value: Callable,
        derivative: Callable,
        inverse: Callable,
        name: str = "custom",
        domain_start: float = -np.inf,
    ) -> None:
        self._value = value
        self._derivative = derivative
        self._inverse = inverse
        self.name = name
        self._start = domain_start

    def value(self, t):
        return np.asarray(self._value(np.asarray(t, dtype=float)), dtype=float)

    def derivative(self, t):
        return np.asarray(self._derivative(np.asarray(t, dtype=float)), dtype=float)

    def inverse(self, x):
        return np.asarray(self._inverse(np.asarray(x, dtype=float)), dtype=float)

    def domain_start(self) -> float:
        return self._start


def parse_psi(spec: str) -> PsiFunction:
    """Build a psi from ``identity``, ``shift:c``, ``power:p`` or ``sqrt``."""
    text = spec.strip().lower()
    kind, _, arg = text.partition(":")
    kind = kind.strip()
    if kind in ("identity", "id") and not arg:
        return Identity()
    if kind == "sqrt" and not arg:
        return Sqrt()
    if kind in ("shift", "power"):
        try:
            value = float(arg)
        except ValueError:
            raise ValidationError(f"psi spec {spec!r} needs a numeric argument", field="psi") from None
        if not np.isfinite(value):
            raise ValidationError(f"psi spec {spec!r} has a non-finite argument", field="psi")
        return Shift(value) if kind == "shift" else Power(value)
    raise ValidationError(f"unknown psi spec {spec!r}", field="psi")


def check_increasing(psi: PsiFunction, a: float, b: float, samples: int = 257) -> None:
    """Raise ValidationError unless ``psi' > 0`` on sampled points of the open interval (a, b)."""
    if not b > a:
        raise ValidationError(f"empty interval [{a}, {b}]", field="psi")
    if a < psi.domain_start():
        raise ValidationError(
            f"{psi.descriptor()} is undefined before t={psi.domain_start()}", field="psi"
        )
    t = np.linspace(a, b, samples + 2)[1:-1]
    d = psi.derivative(t)
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise ValidationError(f"{psi.descriptor()} is not strictly increasing on ({a}, {b})", field="psi")
    v = psi.value(np.linspace(a, b, samples))
    if np.any(np.diff(v) <= 0):
        raise ValidationError(f"{psi.descriptor()} is not strictly increasing on [{a}, {b}]", field="psi")
