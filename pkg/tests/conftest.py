import math

import pytest

from nlametro.fock import FockVector
from nlametro.instrument import NlaParams
from nlametro.probes import ProbeSpec


@pytest.fixture
def vacuum():
    return FockVector([1.0])


@pytest.fixture
def two_level():
    s = 1.0 / math.sqrt(2.0)
    return FockVector([s, s])


@pytest.fixture
def coherent_nbar1():
    return ProbeSpec.from_nbar("coherent", 1.0).build()


@pytest.fixture
def squeezed_nbar1():
    return ProbeSpec.from_nbar("squeezed-vacuum", 1.0).build()


@pytest.fixture
def g2p1():
    return NlaParams(g=2.0, p=1)
