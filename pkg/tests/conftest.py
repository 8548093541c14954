import hashlib

import pytest

from ncdkit import CompressorSpec


def stream(tag: str, n: int) -> bytes:
    """Deterministic pseudorandom bytes for test material."""
    return hashlib.shake_256(tag.encode()).digest(n)


# One line per acceptance criterion, echoed in the terminal summary so
# the verdicts survive pytest's output capture.
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def deflate9() -> CompressorSpec:
    return CompressorSpec(id="deflate", level=9)


@pytest.fixture(scope="session")
def bzip2_9() -> CompressorSpec:
    return CompressorSpec(id="bzip2", level=9)


@pytest.fixture(scope="session")
def lzma9() -> CompressorSpec:
    return CompressorSpec(id="lzma", level=9)


@pytest.fixture(scope="session")
def fast_deflate() -> CompressorSpec:
    return CompressorSpec(id="deflate", level=1)
