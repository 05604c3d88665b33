import numpy as np
import pytest

from xcorr_rom.pipeline import default_reference_index
from xcorr_rom.snapshots import VortexParams, generate_vortex, generate_wave, split


@pytest.fixture(scope="session")
def wave():
    return generate_wave()


@pytest.fixture(scope="session")
def wave_split(wave):
    return split(wave, 0.5)


@pytest.fixture(scope="session")
def wave_reference(wave_split):
    return default_reference_index(wave_split[0].times, 3.03)


@pytest.fixture(scope="session")
def vortex_desk():
    return generate_vortex(VortexParams(sizes=(120, 60)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    def record(number, title, passed, detail):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
