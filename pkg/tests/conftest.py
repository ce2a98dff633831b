from __future__ import annotations

import os
from pathlib import Path

import pytest

from drybean.synthetic import make_surrogate

ROOT = Path(__file__).resolve().parents[1]


def real_data_path() -> Path | None:
    """Location of the real bean table, if one has been provided."""
    candidates = [os.environ.get("DRYBEAN_CSV"), ROOT / "data" / "Dry_Bean_Dataset.csv"]
    for c in candidates:
        if c and Path(c).is_file():
            return Path(c)
    return None


@pytest.fixture(scope="session")
def surrogate():
    return make_surrogate(seed=0, scale=0.1)


@pytest.fixture(scope="session")
def surrogate_csv(tmp_path_factory, surrogate):
    from drybean.dataset import write_csv

    path = tmp_path_factory.mktemp("data") / "surrogate.csv"
    write_csv(surrogate, path)
    return path
