"""Propofol PK/PD model: Schnider parameters, system matrices, BIS.

State order is (blood, muscle, fat, effect site).  The first three
components are drug amounts in mg; the effect-site component is compared
with EC50 and is therefore reported in mg/l.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, ValidationError

# box used for the "typical patient" warning; the formulas themselves are unbounded
AGE_RANGE = (20.0, 80.0)
WEIGHT_RANGE = (50.0, 120.0)
HEIGHT_RANGE = (150.0, 200.0)


class Sex(str, Enum):
    MALE = "male"
    FEMALE = "female"


@dataclass(frozen=True)
class PatientProfile:
    age: float  # years
    weight: float  # kg
    height: float  # cm
    sex: Sex = Sex.MALE

    def __post_init__(self) -> None:
        object.__setattr__(self, "sex", Sex(str(getattr(self.sex, "value", self.sex)).lower()))
        for name in ("age", "weight", "height"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValidationError(f"{name} must be positive, got {value}", field=name)

    def outside_typical_range(self) -> list[str]:
        out = []
        for name, (lo, hi) in (("age", AGE_RANGE), ("weight", WEIGHT_RANGE), ("height", HEIGHT_RANGE)):
            if not lo <= getattr(self, name) <= hi:
                out.append(name)
        return out


@dataclass(frozen=True)
class PkpdParams:
    a10: float
    a12: float
    a13: float
    a21: float
    a31: float
    ae0: float
    v1: float  # l
    lbm: float  # kg

    def __post_init__(self) -> None:
        for name in ("a10", "a12", "a13", "a21", "a31", "ae0", "v1"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValidationError(f"{name} must be positive, got {value}", field=name)


@dataclass(frozen=True)
class BisParams:
    bis0: float = 100.0
    ec50: float = 3.4  # mg/l
    gamma: float = 3.0

    def __post_init__(self) -> None:
        for name in ("bis0", "ec50", "gamma"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValidationError(f"{name} must be positive, got {value}", field=name)


@dataclass(frozen=True)
class EquilibriumPoint:
    y_e: np.ndarray
    u_e: float  # mg/min


def lean_body_mass(p: PatientProfile) -> float:
    """James formula for lean body mass in kg."""
    ratio = p.weight / p.height
    if p.sex is Sex.MALE:
        lbm = 1.1 * p.weight - 128.0 * ratio**2
    else:
        lbm = 1.07 * p.weight - 148.0 * ratio**2
    if not lbm > 0:
        raise ValidationError(
            f"James formula gives non-positive lean body mass ({lbm:.3f} kg); "
            "it is unreliable for this body habitus",
            field="weight",
        )
    return lbm


def schnider_params(p: PatientProfile) -> PkpdParams:
    """Schnider propofol rate constants for a patient."""
    off = p.outside_typical_range()
    if off:
        warnings.warn(f"patient {', '.join(off)} outside the typical adult range", stacklevel=2)
    lbm = lean_body_mass(p)
    dage = p.age - 53.0
    denom = 18.9 - 0.391 * dage
    if not denom > 0:
        raise ValidationError(f"a21 denominator 18.9 - 0.391 (age - 53) = {denom:.4g} is not positive", field="age")
    return PkpdParams(
        a10=0.443 + 0.0107 * (p.weight - 77.0) - 0.0159 * (lbm - 59.0) + 0.0062 * (p.height - 177.0),
        a12=0.302 - 0.0056 * dage,
        a13=0.196,
        a21=(1.29 - 0.024 * dage) / denom,
        a31=0.0035,
        ae0=0.456,
        v1=4.27,
        lbm=lbm,
    )


def assemble_system(params: PkpdParams) -> tuple[np.ndarray, np.ndarray]:
    """Compartmental matrix ``A`` (4x4) and input column ``B`` (4x1)."""
    q = params
    A = np.array(
        [
            [-(q.a10 + q.a12 + q.a13), q.a21, q.a31, 0.0],
            [q.a12, -q.a21, 0.0, 0.0],
            [q.a13, 0.0, -q.a31, 0.0],
            [q.ae0 / q.v1, 0.0, 0.0, -q.ae0],
        ]
    )
    B = np.array([[1.0], [0.0], [0.0], [0.0]])
    return A, B


def equilibrium(params: PkpdParams, bis: BisParams = BisParams()) -> EquilibriumPoint:
    """Steady state with the effect site held at EC50 and the infusion that maintains it."""
    q = params
    ec = bis.ec50
    y_e = np.array([q.v1 * ec, q.a12 * q.v1 * ec / q.a21, q.a13 * q.v1 * ec / q.a31, ec])
    return EquilibriumPoint(y_e=y_e, u_e=q.a10 * q.v1 * ec)


def bis(y4, params: BisParams = BisParams()):
    """Bispectral index from effect-site concentration (Hill sigmoid)."""
    y4 = np.asarray(y4, dtype=float)
    if np.any(y4 < 0) or np.any(np.isnan(y4)):
        raise DomainError("effect-site concentration must be nonnegative")
    # y^g / (y^g + c^g) written as 1 / (1 + (c/y)^g) to stay finite for large y
    with np.errstate(divide="ignore", over="ignore"):
        frac = np.where(y4 > 0, 1.0 / (1.0 + (params.ec50 / np.where(y4 > 0, y4, 1.0)) ** params.gamma), 0.0)
    out = params.bis0 * (1.0 - frac)
    return out if out.ndim else float(out)


def fast_state(traj) -> np.ndarray:
    """Blood and effect-site components, shape (len(grid), 2)."""
    states = np.asarray(getattr(traj, "states", traj))
    return states[:, [0, 3]].copy()
