"""Shared fixtures and the acceptance-criteria terminal summary."""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

from qatpg.circuit import Circuit, parse_circuit
from qatpg.faults import FaultSpec

REPO_ROOT = Path(__file__).resolve().parents[1]
BENCHMARK_PATH = REPO_ROOT / "circuits" / "3qubitcnot.qc"


@pytest.fixture(scope="session")
def benchmark_path() -> Path:
    return BENCHMARK_PATH


@pytest.fixture(scope="session")
def benchmark_circuit() -> Circuit:
    return parse_circuit(BENCHMARK_PATH.read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def smgf_spec() -> FaultSpec:
    return FaultSpec()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion after the run."""
    mod = sys.modules.get("test_acceptance")
    if mod is None:
        return
    results = sorted(getattr(mod, "CRITERION_RESULTS", []))
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num, status, detail in results:
        terminalreporter.write_line(f"CRITERION {num}: {status} - {detail}")
