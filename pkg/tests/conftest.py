from __future__ import annotations

import pytest

from helpers import make_gateways


@pytest.fixture
def gateways():
    return make_gateways()
