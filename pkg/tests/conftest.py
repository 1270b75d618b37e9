import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tactile_bci.session_io import Config  # noqa: E402
from tactile_bci.swlda import SwldaModel  # noqa: E402

HIGH_SNR = {"target_amplitude": 5.0, "background_rms": 0.5}
ZERO_SNR = {"target_amplitude": 0.0}

_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""
    def _report(number, name, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE.append(line)
        print(line)
        return passed
    return _report


@pytest.fixture(scope="session")
def high_snr_config():
    return Config().replace(seed=3, **HIGH_SNR)


@pytest.fixture(scope="session")
def high_snr_model(high_snr_config):
    from tactile_bci.decoder import run_calibration
    return run_calibration(high_snr_config.simulation("calibration"))[1]


@pytest.fixture(scope="session")
def zero_snr_config():
    return Config().replace(seed=5, **ZERO_SNR)


@pytest.fixture(scope="session")
def zero_snr_run(zero_snr_config):
    """600 online selections with no ERP at all; returns (model, results, seconds)."""
    import time
    from tactile_bci.decoder import run_calibration, run_online
    start = time.perf_counter()
    _, model = run_calibration(zero_snr_config.simulation("calibration"))
    intents = [i % 6 for i in range(600)]
    results = run_online(zero_snr_config.simulation("online"), model, intents)
    return model, results, time.perf_counter() - start


@pytest.fixture
def toy_model():
    return SwldaModel(selected=(2,), weights=(1.5,), intercept=0.5)
