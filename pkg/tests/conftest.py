from pathlib import Path

import numpy as np
import pytest

from lwrnet.flux import Greenshields
from lwrnet.network import (
    ClosedInlet,
    ClosedOutlet,
    JunctionSpec,
    NetworkSpec,
    road_spec,
    validate_network,
)

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


@pytest.fixture
def gs():
    return Greenshields(v_max=1.0, u_max=1.0)


def closed_1x2(r1, r2, r3, elements=8, alpha=0.75):
    """Closed one-incoming/two-outgoing network with the given initial pieces."""
    roads = (
        road_spec(1, (0, 1), elements, r1, left=ClosedInlet()),
        road_spec(2, (1, 2), elements, r2, right=ClosedOutlet()),
        road_spec(3, (1, 2), elements, r3, right=ClosedOutlet()),
    )
    junc = JunctionSpec((1,), (2, 3), ((alpha,), (1 - alpha,)))
    return validate_network(NetworkSpec(roads, (junc,)))


def random_matrix(rng, m, n):
    A = rng.dirichlet(np.ones(m), size=n).T
    # make columns sum to 1 as closely as floating point allows
    A[-1] = 1.0 - A[:-1].sum(axis=0)
    return np.clip(A, 0.0, 1.0)
