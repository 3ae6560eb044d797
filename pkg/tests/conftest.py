import pytest
from hypothesis import HealthCheck, settings

from miniir.dialects import make_context

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=100
)
settings.load_profile("default")


@pytest.fixture
def ctx():
    return make_context()
