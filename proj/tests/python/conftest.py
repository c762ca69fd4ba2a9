import importlib
import os
import sys

import pytest


@pytest.fixture(scope="session")
def pm():
    """The compiled extension, found via PERFMOD_MODULE_DIR or an install."""
    module_dir = os.environ.get("PERFMOD_MODULE_DIR")
    if module_dir and module_dir not in sys.path:
        sys.path.insert(0, module_dir)
    try:
        return importlib.import_module("_perfmod")
    except ImportError:
        return importlib.import_module("perfmodpy")


@pytest.fixture
def repo(tmp_path):
    return str(tmp_path / "repo")
