import pathlib

import pytest

from autocall.path import observe
from autocall.reference import reference_terms, synthetic_reference_path

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> pathlib.Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def ref_terms():
    return reference_terms()


@pytest.fixture(scope="session")
def ref_path():
    return synthetic_reference_path()


@pytest.fixture(scope="session")
def ref_view(ref_terms, ref_path):
    return observe(ref_path, ref_terms)
