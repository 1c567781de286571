from __future__ import annotations

import numpy as np
import pytest

from modchar_lab import enumerate_characters, make_modified, partial_sums


@pytest.fixture(scope="session")
def chi4():
    """The non-principal character mod 4."""
    chars = enumerate_characters(4)
    (chi,) = [c for c in chars if not c.is_principal()]
    return chi


@pytest.fixture(scope="session")
def f34(chi4):
    """chi mod 4 with the value at 3 rotated to +1."""
    return make_modified(chi4, {3: 0})


@pytest.fixture(scope="session")
def trace_1e6(f34):
    # shared across the route-agreement and Plancherel tests; built once
    return partial_sums(f34, 10**6)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20210817)
