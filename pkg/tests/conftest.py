"""Shared fixtures for the inflap test suite."""

from fractions import Fraction

import numpy as np
import pytest

from inflap.config import SolverConfig
from inflap.dumbbell import dumbbell_graph, u_inf, u_inf_plus
from inflap.metric_graph import MetricGraph


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running solver and grid runs")


@pytest.fixture
def dumbbell() -> MetricGraph:
    return dumbbell_graph()


@pytest.fixture
def ground_state(dumbbell):
    return u_inf(dumbbell)


@pytest.fixture
def ground_state_plus(dumbbell):
    return u_inf_plus(dumbbell)


@pytest.fixture
def unit_interval() -> MetricGraph:
    return MetricGraph.interval(1)


@pytest.fixture
def star3() -> MetricGraph:
    return MetricGraph.star(3, 1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def coarse() -> SolverConfig:
    return SolverConfig(h=Fraction(1, 32))
