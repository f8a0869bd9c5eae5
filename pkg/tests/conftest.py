"""Shared fixtures for the hamop test suite."""

import random

import pytest

from utils.catalog_store import CatalogStore, DEFAULT_CATALOG_DIR, reset_store
from utils.scalar_poly import VarTable


@pytest.fixture
def vt3():
    return VarTable.for_coords(3)


@pytest.fixture
def vt3_mu():
    return VarTable.for_coords(3, ("mu",))


@pytest.fixture(scope="session")
def store():
    return CatalogStore(DEFAULT_CATALOG_DIR)


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for name in ("HAMOP_CATALOG_DIR", "HAMOP_MAX_WORKERS", "HAMOP_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    reset_store()
    yield
    reset_store()
