from __future__ import annotations

import re
from pathlib import Path

import pytest

from byrdbox import parse_program

DATA = Path(__file__).parent / "data"

# Variables inside a predication token: either machine-style (_86) or
# source-style (X); both normalize to position-of-first-occurrence names.
_VAR_TOKEN = re.compile(r"\b(_[A-Za-z0-9]*|[A-Z][A-Za-z0-9_]*)\b")


def normalize_trace(text: str) -> list:
    """Token-normalize a trace listing for golden comparison.

    Strips listing decorations (a trailing `yes`, GNU's `?` column and the
    colon after the port), renumbers chronos sequentially (two reference
    listings carry a duplicated chrono), and renames variables by first
    occurrence across the whole trace.
    """
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line == "yes" or line.startswith("#"):
            continue
        toks = line.split()
        if toks[-1] == "?":
            toks = toks[:-1]
        toks[3] = toks[3].rstrip(":")
        rows.append(toks)
    mapping = {}

    def rename(match):
        name = match.group()
        return mapping.setdefault(name, f"_v{len(mapping) + 1}")

    out = []
    for i, toks in enumerate(rows, start=1):
        pred = _VAR_TOKEN.sub(rename, toks[4])
        out.append(" ".join([str(i)] + toks[1:4] + [pred]))
    return out


def load_golden(name: str) -> list:
    return normalize_trace((DATA / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def ex1_program():
    return parse_program((DATA / "example1.pl").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def ex2_program():
    return parse_program((DATA / "example2.pl").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def loop_program():
    return parse_program((DATA / "loop.pl").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def corpus_200():
    from byrdbox.corpus import corpus

    return corpus(200)


# ----------------------------------------------------------------------
# Acceptance reporting: one PASS/FAIL line per criterion in the summary.
# ----------------------------------------------------------------------

ACCEPTANCE_RESULTS = {}


def record_criterion(number: int, description: str, status: str):
    ACCEPTANCE_RESULTS[number] = (status, description)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        status, description = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {status} - {description}")
