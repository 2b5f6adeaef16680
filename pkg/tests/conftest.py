import pytest

from pinchlab import build_model


@pytest.fixture(scope="session")
def gaussian3():
    return build_model("gaussian", 3, eps=0.5)


@pytest.fixture(scope="session")
def sphere3():
    return build_model("round_sphere", 3)


@pytest.fixture(scope="session")
def family10():
    return build_model("family", 10, 0.8, 0.02)


@pytest.fixture(scope="session")
def family10_sec():
    return build_model("family", 10, 0.8, 0.02, potential_scale=1.0 / 9.0)
