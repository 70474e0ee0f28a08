"""Shared fixtures: gallery access and a boundary-row builder."""

import numpy as np
import pytest

from regbvp import gallery
from regbvp.model import BoundaryRow


REGULAR_GALLERY = ("dirichlet2", "dirichlet4", "neumann2", "neumann4",
                   "periodic2", "robin2", "mixed4")


def make_row(n, a=(), b=()):
    """Row from (derivative order, coefficient) pairs at each endpoint."""
    left, right = [0j] * n, [0j] * n
    for s, v in a:
        left[s] = complex(v)
    for s, v in b:
        right[s] = complex(v)
    return BoundaryRow(tuple(left), tuple(right))


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


@pytest.fixture(params=sorted(gallery.EXAMPLES))
def gallery_spec(request):
    return request.param, gallery.build(request.param)
