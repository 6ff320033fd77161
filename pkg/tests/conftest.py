from importlib import resources

import pytest
from hypothesis import settings

from stepindex.surface import parse_program

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# The Ackermann definition without options: the inferred default is (1+ y).
ACK_PLAIN = """
(def::ung ack (x y)
  (if (= x 0) (1+ y)
    (if (= y 0) (ack (1- x) 1)
      (ack (1- x) (ack x (1- y))))))
"""


def corpus_text(name: str) -> str:
    return resources.files("stepindex").joinpath("corpus", name + ".lisp").read_text()


def corpus_path(name: str) -> str:
    return str(resources.files("stepindex").joinpath("corpus", name + ".lisp"))


@pytest.fixture(scope="session")
def ack_plain():
    return parse_program(ACK_PLAIN)


@pytest.fixture(scope="session")
def ack_program():
    return parse_program(corpus_text("ack"))


@pytest.fixture(scope="session")
def corpus():
    return {n: parse_program(corpus_text(n)) for n in ("ack", "ack2", "f91", "half")}


# One line per acceptance criterion, repeated in the terminal summary so the
# verdicts are visible without -s.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
