"""Shared fixtures: synthetic price CSVs and a standard change model."""

from datetime import date, timedelta

import numpy as np
import pytest

from quickdetect import GaussianChangeModel


def write_price_csv(path, prices, start=date(2020, 1, 2), header="Date,Close"):
    """Write a weekday-dated price CSV; returns the path."""
    lines = [header]
    day = start
    for price in prices:
        while day.weekday() >= 5:
            day += timedelta(days=1)
        lines.append(f"{day.isoformat()},{price}")
        day += timedelta(days=1)
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def make_csv(tmp_path):
    def _make(prices, name="prices.csv", **kwargs):
        return write_price_csv(tmp_path / name, prices, **kwargs)

    return _make


@pytest.fixture
def unit_shift_model():
    """N(0,1) -> N(1,1): the standard mean-shift test bed."""
    return GaussianChangeModel(0.0, 1.0, 1.0, 1.0)


@pytest.fixture
def variance_model():
    """A change in both mean and scale, exercising the quadratic LLR."""
    return GaussianChangeModel(0.1, 0.8, 0.6, 1.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
