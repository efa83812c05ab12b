import pytest


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true", default=False,
                     help="run the long-suite checks (kappa=2 dimension)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long"):
        return
    skip = pytest.mark.skip(reason="long suite: enable with --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)
