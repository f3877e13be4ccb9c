from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sumprod.field import FieldCtx  # noqa: E402
from sumprod.setops import FSet  # noqa: E402

BIG_P = 4294967311


@pytest.fixture
def Q():
    return FieldCtx.rational()


@pytest.fixture
def F101():
    return FieldCtx.prime(101)


@pytest.fixture
def tri(Q):
    return FSet.of(Q, [1, 2, 4])
