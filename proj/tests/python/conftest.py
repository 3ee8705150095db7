import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("HERALDSIM_CLI", str(ROOT / "build" / "heraldsim"))
    if not pathlib.Path(path).exists():
        pytest.skip("heraldsim binary not built")
    return path


@pytest.fixture(scope="session")
def fixtures():
    return pathlib.Path(os.environ.get("HERALDSIM_FIXTURES", ROOT / "fixtures"))


@pytest.fixture(scope="session")
def schema_dir():
    return pathlib.Path(os.environ.get("HERALDSIM_SCHEMA_DIR", ROOT / "schema"))
