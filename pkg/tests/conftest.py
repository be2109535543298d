import pytest
from hypothesis import HealthCheck, settings

# property tests draw at least this many cases
PROPERTY_CASES = 1000

settings.register_profile(
    "default", max_examples=PROPERTY_CASES, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def property_cases():
    return PROPERTY_CASES
