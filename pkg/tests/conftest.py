import numpy as np
import pytest

from gnss_rfi.recording import N_CHANNELS, N_CNO, FlightRecording
from gnss_rfi.simulator import SimulationConfig, simulate_dataset

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_recording(n=5, flight_id="F1", label=0, cno_value=40.0, absent=(), seed=0):
    rng = np.random.default_rng(seed)
    ch = np.empty((n, N_CHANNELS))
    ch[:, :N_CNO] = np.round(cno_value + rng.normal(0, 1, (n, N_CNO)), 4)
    for c in absent:
        ch[:, c] = np.nan
    ch[:, N_CNO + 0] = np.round(rng.uniform(0, 359, n), 4)   # heading
    ch[:, N_CNO + 1] = np.round(rng.uniform(-10, 10, n), 4)  # roll
    ch[:, N_CNO + 2] = np.round(rng.uniform(-5, 5, n), 4)    # pitch
    ch[:, N_CNO + 3] = np.round(rng.uniform(20, 60, n), 4)   # ground speed
    ch[:, N_CNO + 4] = np.round(rng.uniform(20, 60, n), 4)   # true airspeed
    return FlightRecording(flight_id, np.arange(n), ch, label)


@pytest.fixture
def recording():
    return make_recording()


@pytest.fixture(scope="session")
def small_corpus():
    """200 train / 100 test synthetic flights, 15% jammed."""
    train = simulate_dataset(SimulationConfig(seed=11, n_flights=200))
    test = simulate_dataset(SimulationConfig(seed=12, n_flights=100))
    return train, test
