import functools
import time

import pytest
from click.testing import CliRunner

from voltstab import dynload as dl
from voltstab.cli import cli
from voltstab.powerflow import NetworkParams
from voltstab.scenario_file import load_scenario, shipped_path
from voltstab.simcore import ModelKind, Scenario, run_simulation

TABLE2_NET = NetworkParams(1.0, 0.02, 0.02)
TABLE2_LOAD = dl.DlLoadParams()

# Representative initial load states inside the two-root region, spread over
# both axes. Durations per policy are long enough for every member to settle
# to within 1e-3 of its limit (minimum-policy runs are the slow ones).
FAN_STATES = [(0.25, 0.25), (0.25, 3.0), (0.5, 1.0), (1.0, 0.5), (1.0, 2.0)]
FAN_DURATION = {dl.RootPolicy.MAXIMUM: 8.0, dl.RootPolicy.MINIMUM: 18.0}


@functools.lru_cache(maxsize=None)
def _cli_simulate_timed(name: str):
    path = shipped_path(name)
    start = time.perf_counter()
    result = CliRunner().invoke(cli, ["simulate", str(path), "-o", "-"])
    return result.exit_code, result.stdout, time.perf_counter() - start


def _cli_simulate(name: str):
    code, text, _ = _cli_simulate_timed(name)
    return code, text


@functools.lru_cache(maxsize=None)
def _fan():
    """Fan runs keyed by ``(policy, (x0, y0))``, plus the wall time they took."""
    start = time.perf_counter()
    out = {}
    for policy, duration in FAN_DURATION.items():
        for x, y in FAN_STATES:
            sc = Scenario(
                ModelKind.DYNAMIC_LOAD,
                dl.LoadState(x, y),
                duration,
                network=TABLE2_NET,
                load=TABLE2_LOAD,
                policy=policy,
            )
            out[(policy, (x, y))] = run_simulation(sc)
    return out, time.perf_counter() - start


@pytest.fixture(scope="session")
def cli_simulate():
    """``name -> (exit_code, csv_text)`` for shipped scenarios, run once per session."""
    return _cli_simulate


@pytest.fixture(scope="session")
def cli_simulate_timed():
    """Like ``cli_simulate`` but also returns the wall time of the first run."""
    return _cli_simulate_timed


@pytest.fixture(scope="session")
def fan_outcomes():
    return _fan()[0]


@pytest.fixture(scope="session")
def fan_outcomes_timed():
    return _fan()


@pytest.fixture(scope="session")
def shipped():
    return lambda name: load_scenario(shipped_path(name))


def parse_csv(text: str):
    """Header, numeric rows and the trailing status comment of a voltstab CSV."""
    lines = text.splitlines()
    header = lines[0].split(",")
    rows, status = [], None
    for line in lines[1:]:
        if line.startswith("#"):
            status = line
            continue
        rows.append([float(v) if v else None for v in line.split(",")])
    return header, rows, status


@pytest.fixture
def csv_parse():
    return parse_csv


# Acceptance criteria report one line each, echoed live and again in the summary.
ACCEPTANCE_LINES: list[str] = []
_SESSION_START = [0.0]


def pytest_sessionstart(session):
    _SESSION_START[0] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    elapsed = time.perf_counter() - _SESSION_START[0]
    verdict = "PASS" if elapsed < 120.0 else "FAIL"
    terminalreporter.write_line(f"suite runtime {elapsed:.1f} s (limit 120 s): {verdict}")
