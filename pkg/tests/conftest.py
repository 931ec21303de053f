import json

import pytest

from zerowindow.family import FamilySpec


@pytest.fixture
def family_b_t():
    """y^2 = x^3 + x + t."""
    return FamilySpec((1,), (0, 1))


@pytest.fixture
def family_a_t():
    """y^2 = x^3 + t x + 1."""
    return FamilySpec((0, 1), (1,))


@pytest.fixture
def family_file(tmp_path, family_b_t):
    path = tmp_path / "family.json"
    path.write_text(json.dumps(family_b_t.to_json_dict()))
    return path
