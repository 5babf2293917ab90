"""Shared fixtures: the 8x8 digits corpus routed through the CSV loader."""

import numpy as np
import pytest

from qganlab import datapipe


@pytest.fixture(scope="session")
def digits_csv(tmp_path_factory):
    """Write the sklearn digits as bare label,pixels CSV rows (maxval 16)."""
    sklearn_datasets = pytest.importorskip("sklearn.datasets")
    bunch = sklearn_datasets.load_digits()
    path = tmp_path_factory.mktemp("digits") / "digits.csv"
    with open(path, "w", encoding="ascii") as fh:
        for label, row in zip(bunch.target, bunch.data):
            cells = ",".join(str(int(v)) for v in row)
            fh.write(f"{int(label)},{cells}\n")
    return path


@pytest.fixture(scope="session")
def digits_dataset(digits_csv):
    ds = datapipe.load_csv(digits_csv)
    assert ds.width == 8 and ds.height == 8
    return ds


@pytest.fixture(scope="session")
def digits_369(digits_dataset):
    ds = datapipe.filter_classes(digits_dataset, [3, 6, 9])
    assert set(np.unique(ds.labels)) == {3, 6, 9}
    return ds
