import doctest
import importlib

import pytest

MODULES = ["decoykit.bounds", "decoykit.channel", "decoykit.stats"]


@pytest.mark.parametrize("name", MODULES)
def test_doctests(name):
    result = doctest.testmod(importlib.import_module(name))
    assert result.attempted > 0
    assert result.failed == 0
