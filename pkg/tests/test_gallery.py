"""The bundled example gallery."""

import pytest

from regbvp import gallery
from regbvp.model import DivergenceForm, OperatorSpec


def test_every_example_builds():
    for name in gallery.EXAMPLES:
        spec = gallery.build(name)
        assert isinstance(spec, OperatorSpec)
        assert isinstance(spec.form, DivergenceForm)
        assert len(spec.rows) == spec.order


def test_expected_orders():
    orders = {name: gallery.build(name).order for name in gallery.EXAMPLES}
    assert orders == {"dirichlet2": 2, "dirichlet4": 4, "neumann2": 2,
                      "neumann4": 4, "periodic2": 2, "cauchy2": 2,
                      "robin2": 2, "mixed4": 4}


def test_unknown_name_lists_choices():
    with pytest.raises(KeyError) as exc:
        gallery.build("nope")
    message = str(exc.value)
    assert "dirichlet2" in message and "mixed4" in message


def test_builders_return_fresh_objects():
    a, b = gallery.build("robin2"), gallery.build("robin2")
    assert a == b
    assert a is not b
