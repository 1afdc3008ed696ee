import os
import sys

import pytest
from httpx import ASGITransport, AsyncClient
from asgi_lifespan import LifespanManager

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)
os.environ.setdefault("ANYIO_BACKEND", "asyncio")

from app.main import app  # noqa: E402
from app.domain.models.matroid import Matroid, cycle_matroid_k4, uniform  # noqa: E402
from app.infrastructure.cache import certificate_cache  # noqa: E402
from app.infrastructure.formats.matroid_format import load_matroid  # noqa: E402

DATA_DIR = os.path.join(PROJECT_ROOT, "data")


def data_path(name: str) -> str:
    return os.path.join(DATA_DIR, name)


@pytest.fixture
def data_file():
    """Path of a bundled data file."""
    return data_path


@pytest.fixture
def g841_hyperplanes():
    """Circuit-hyperplanes of the eight-element example, by label."""
    return ["1378", "1568", "2368", "4567", "2478"]


@pytest.fixture(autouse=True)
def clear_certificate_cache():
    """Each test starts from an empty certificate cache."""
    certificate_cache.clear()
    yield
    certificate_cache.clear()


@pytest.fixture
def u24() -> Matroid:
    return uniform(2, 4)


@pytest.fixture
def mk4() -> Matroid:
    return cycle_matroid_k4()


@pytest.fixture
def g841() -> Matroid:
    return load_matroid(data_path("g841.matroid"))


@pytest.fixture
def g841_dual() -> Matroid:
    return load_matroid(data_path("g841_dual.matroid"))


@pytest.fixture
async def async_client():
    """Shared HTTPX async client with FastAPI lifespan handling."""
    async with LifespanManager(app):
        transport = ASGITransport(app=app)
        async with AsyncClient(transport=transport, base_url="http://testserver") as client:
            yield client
