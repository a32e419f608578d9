from __future__ import annotations

import logging
from pathlib import Path

import pytest

from casecart.network import GuidedPathNetwork
from casecart.scenario import Scenario

DATA = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def _quiet_logs(caplog):
    caplog.set_level(logging.WARNING)


@pytest.fixture(scope="session")
def micro_net() -> GuidedPathNetwork:
    return GuidedPathNetwork.load(DATA / "micro_network.toml")


@pytest.fixture
def micro_scenario() -> Scenario:
    return Scenario.load(DATA / "micro_scenario.toml")


@pytest.fixture(scope="session")
def default_scenario() -> Scenario:
    sc = Scenario.load()
    sc.schedule  # generate once per session
    return sc
