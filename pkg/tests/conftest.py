from __future__ import annotations

from collections.abc import Iterator

import pytest

from ncup.logging import configure_logging
from ncup.services.groups import cyclic, symmetric
from ncup.services.inequalities import Tolerances
from ncup.services.two_box import (
    TwoBoxPair,
    fixed_point_model,
    group_model,
    left_regular_action,
    spin_model,
)


@pytest.fixture(autouse=True)
def _logging() -> Iterator[None]:
    # rebind the structlog sink to this test's stderr
    configure_logging("WARNING")
    yield


@pytest.fixture()
def c2() -> TwoBoxPair:
    return group_model(cyclic(2))


@pytest.fixture()
def c3() -> TwoBoxPair:
    return group_model(cyclic(3))


@pytest.fixture()
def c4() -> TwoBoxPair:
    return group_model(cyclic(4))


@pytest.fixture()
def c6() -> TwoBoxPair:
    return group_model(cyclic(6))


@pytest.fixture()
def s3() -> TwoBoxPair:
    return group_model(symmetric(3))


@pytest.fixture()
def spin3() -> TwoBoxPair:
    return spin_model(3)


@pytest.fixture()
def regular_c3() -> TwoBoxPair:
    return fixed_point_model(left_regular_action(cyclic(3)))


@pytest.fixture()
def tol() -> Tolerances:
    return Tolerances.from_settings()
