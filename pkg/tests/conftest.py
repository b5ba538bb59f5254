import math
from pathlib import Path

import numpy as np
import pytest

from floquet_lindblad.config import load_config
from floquet_lindblad.floquet import PeriodicMatrixFunction, unitary_floquet
from floquet_lindblad.runner import build

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)

ACCEPTANCE_LINES: list[str] = []


def sigma_z_drive(omega0=1.0, lam=0.7, Omega=3.0) -> PeriodicMatrixFunction:
    """``H_t = (omega0 + lam cos(Omega t)) sigma_z / 2``."""
    T = 2 * math.pi / Omega
    return PeriodicMatrixFunction(T, {0: 0.5 * omega0 * SZ, 1: 0.25 * lam * SZ, -1: 0.25 * lam * SZ})


@pytest.fixture(scope="session")
def benchmark():
    cfg = load_config(CONFIGS / "benchmark_qubit.json")
    return build(cfg)


@pytest.fixture(scope="session")
def drive_floquet():
    return unitary_floquet(sigma_z_drive())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
