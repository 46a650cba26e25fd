import numpy as np
import pytest

from fracpkpd.solver import InfusionSchedule, LinearFracSystem

# reference matrix for the 53 y / 77 kg / 177 cm male patient, rounded to 4 decimals
REF_A = np.array(
    [
        [-0.9175, 0.0683, 0.0035, 0.0],
        [0.3020, -0.0683, 0.0, 0.0],
        [0.1960, 0.0, -0.0035, 0.0],
        [0.1068, 0.0, 0.0, -0.4560],
    ]
)
REF_B = np.array([1.0, 0.0, 0.0, 0.0])
T_SWITCH = 0.5467
T_END = 1.8397
U_MAX = 106.0907

ACCEPTANCE_LINES = []


@pytest.fixture
def ref_schedule():
    return InfusionSchedule((0.0, T_SWITCH, T_END), (U_MAX, 0.0))


@pytest.fixture
def ref_system():
    def make(alpha=1.0, psi=None, **kw):
        if psi is not None:
            kw["psi"] = psi
        return LinearFracSystem(REF_A, REF_B, alpha, **kw)

    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
