import os

import pytest


def pytest_addoption(parser):
    parser.addoption("--cli", default=os.environ.get("DASCL_CLI", "dascl"), help="path to the dascl executable")


@pytest.fixture
def cli_path(request):
    return request.config.getoption("--cli")
