"""Shared fixtures for the pathwise test suite."""

from pathlib import Path

import numpy as np
import pytest
import requests
from loguru import logger

from src.pathwise.data.demo import generate_demo_dataset, write_demo_dataset
from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable, FeatureKind

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Disable KEGG access and fail loudly on any real HTTP request."""
    monkeypatch.setenv("PATHWISE_NO_NETWORK", "1")

    def refuse(*args, **kwargs):
        raise AssertionError("tests must not touch the network")

    monkeypatch.setattr(requests.Session, "request", refuse)
    monkeypatch.setattr(requests, "get", refuse)


@pytest.fixture
def log_records():
    """Collect loguru records emitted during the test."""
    records = []
    handler_id = logger.add(lambda message: records.append(message.record), level="DEBUG")
    yield records
    logger.remove(handler_id)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def kegg_fixtures() -> Path:
    return FIXTURES / "kegg"


@pytest.fixture
def toy_ko_table() -> AbundanceTable:
    return AbundanceTable(
        ("K00001", "K00002", "K00003", "K00004"),
        ("S1", "S2", "S3"),
        np.array(
            [
                [10.0, 0.0, 5.0],
                [1.0, 2.0, 3.0],
                [0.0, 0.0, 0.0],
                [4.0, 4.0, 4.0],
            ]
        ),
        FeatureKind.KO,
    )


@pytest.fixture
def two_group_table() -> tuple[AbundanceTable, SampleMetadata]:
    """Eight samples, two groups of four; the first feature is strongly enriched in group A."""
    rng = np.random.default_rng(7)
    samples = tuple(f"S{i}" for i in range(1, 9))
    features = tuple(f"ko0{i:04d}" for i in range(10, 60, 5))
    values = rng.integers(200, 400, size=(len(features), len(samples))).astype(np.float64)
    values[0, :4] *= 8.0
    table = AbundanceTable(features, samples, values, FeatureKind.KEGG_PATHWAY)
    meta = SampleMetadata(samples, {sid: ("A" if i < 4 else "B") for i, sid in enumerate(samples)})
    return table, meta


@pytest.fixture(scope="session")
def demo_dataset():
    return generate_demo_dataset()


@pytest.fixture
def demo_files(tmp_path) -> tuple[Path, Path]:
    return write_demo_dataset(tmp_path / "demo")
