import pytest

from chowlalab import build_sieve


@pytest.fixture(scope="session")
def sieve_1m():
    """Shared table to 10**6; large enough for every non-performance test."""
    return build_sieve(10**6)


@pytest.fixture(scope="session")
def sieve_20k():
    return build_sieve(20_000)
