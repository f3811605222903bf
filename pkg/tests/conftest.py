import numpy as np
import pytest

from memdecay.generators import circulant_from_coeffs, generate, toeplitz_from_coeffs
from memdecay.operator_core import Topology

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f" :: {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tridiagonal(M, lo=-1.0, mid=2.0, hi=-1.0):
    return toeplitz_from_coeffs({-1: hi, 0: mid, 1: lo}, M)


def random_complex(rng, M, w=None):
    A = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    if w is not None:
        idx = np.arange(M)
        A[np.abs(idx[:, None] - idx[None, :]) > w] = 0
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def circ_4_2cos():
    def make(M):
        return circulant_from_coeffs({0: 4.0, 1: 1.0, -1: 1.0}, M), Topology.circulant(M)
    return make


@pytest.fixture
def banded_random():
    def make(M, w, seed):
        return generate({"kind": "banded_random", "size": M, "params": {"bandwidth": w}, "seed": seed})
    return make
