import numpy as np
import pytest

from fracpkpd.errors import ValidationError
from fracpkpd.psi import CustomPsi, Identity, Power, Shift, Sqrt, check_increasing, parse_psi


@pytest.mark.parametrize("psi", [Identity(), Shift(0.2), Power(2.0), Power(0.5), Sqrt()])
def test_inverse_round_trip(psi):
    t = np.linspace(0.01, 3.0, 50)
    assert np.allclose(psi.inverse(psi.value(t)), t, rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("psi", [Identity(), Shift(0.2), Power(2.0), Sqrt()])
def test_derivative_matches_finite_difference(psi):
    t = np.linspace(0.2, 2.0, 10)
    h = 1e-6
    fd = (psi.value(t + h) - psi.value(t - h)) / (2 * h)
    assert np.allclose(psi.derivative(t), fd, rtol=1e-8)


@pytest.mark.parametrize(
    "spec,expected",
    [("identity", "identity"), ("id", "identity"), (" Sqrt ", "sqrt"), ("power:2", "power:2"), ("shift:0.2", "shift:0.2")],
)
def test_parse(spec, expected):
    assert parse_psi(spec).descriptor() == expected


@pytest.mark.parametrize("spec", ["power:-1", "power:0", "shift:x", "cube", "sqrt:2", "power:nan"])
def test_parse_rejects(spec):
    with pytest.raises(ValidationError) as info:
        parse_psi(spec)
    assert info.value.field == "psi"


def test_callable_and_vectorized():
    psi = Power(2.0)
    assert psi(3.0) == 9.0
    assert psi(np.array([1.0, 2.0])).tolist() == [1.0, 4.0]


def test_check_increasing():
    check_increasing(Sqrt(), 0.0, 2.0)
    with pytest.raises(ValidationError):
        check_increasing(Sqrt(), -1.0, 2.0)
    decreasing = CustomPsi(lambda t: -t, lambda t: -np.ones_like(t), lambda x: -x, name="neg")
    with pytest.raises(ValidationError):
        check_increasing(decreasing, 0.0, 1.0)
    with pytest.raises(ValidationError):
        check_increasing(Identity(), 1.0, 1.0)
