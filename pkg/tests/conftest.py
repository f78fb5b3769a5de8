import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def real_functions():
    path = FIXTURES / "real_c_functions.jsonl"
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line)["func"] for line in fh]


@pytest.fixture(scope="session")
def real_corpus_path():
    return FIXTURES / "real_c_functions.jsonl"
