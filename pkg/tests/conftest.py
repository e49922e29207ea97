import os

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session", autouse=True)
def _isolated_cache(tmp_path_factory):
    os.environ["LINEFREE_CACHE_DIR"] = str(tmp_path_factory.mktemp("cache"))


def pytest_collection_modifyitems(config, items):
    if os.environ.get("LINEFREE_EXTENDED") == "1":
        return
    skip = pytest.mark.skip(reason="extended census; set LINEFREE_EXTENDED=1")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)
