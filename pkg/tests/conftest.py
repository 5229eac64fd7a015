from importlib import resources
from pathlib import Path

import pytest

from archsheaf import load
from archsheaf.presheaf import PresheafSpec
from archsheaf.topology import SiteSpec

CORPUS = Path(__file__).parent / "corpus"
BUNDLED = Path(str(resources.files("archsheaf") / "data" / "three_view.json"))


def three_view_site() -> SiteSpec:
    return SiteSpec.build(
        ["electrical", "thermal", "mechanical"],
        [
            ("EM", ("electrical", "mechanical")),
            ("ET", ("electrical", "thermal")),
            ("TM", ("thermal", "mechanical")),
        ],
    )


def three_view_presheaf() -> PresheafSpec:
    return PresheafSpec.build(three_view_site(), {"EM": 4, "ET": 3, "TM": 5})


@pytest.fixture
def site():
    return three_view_site()


@pytest.fixture
def presheaf():
    return three_view_presheaf()


@pytest.fixture
def arch():
    return load(BUNDLED)[0]


@pytest.fixture
def corpus():
    return CORPUS


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
