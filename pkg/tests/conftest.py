import math
from pathlib import Path

import pytest

from framework.bound_engine import GenericConstants
from framework.constants_store import save_constants

ROOT = Path(__file__).resolve().parent.parent
PI2 = math.pi ** 2

CONSTANT_VALUES = {"C_agmon": 2.0, "C_lorentz": 1.0, "C_n3S": 1.0, "C_n4": 1.0, "C_n4res": 1.0}


@pytest.fixture
def constants() -> GenericConstants:
    return GenericConstants.user_supplied(**CONSTANT_VALUES)


@pytest.fixture
def constants_file(tmp_path, constants) -> Path:
    """A constants file, so CLI runs never calibrate."""
    path = tmp_path / "constants.json"
    save_constants(constants, {"n": 0, "trials": 0, "seed": 0, "unused": []}, path)
    return path
