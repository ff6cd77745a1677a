import numpy as np
import pytest

from clusterscout.dataset import Dataset


def make_blobs(centers, n_per=100, sigma=0.1, seed=0):
    """Gaussian blobs with planted labels; deterministic per seed."""
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = np.asarray(centers, dtype=float)
    rows, labels = [], []
    for ci, c in enumerate(centers):
        rows.append(rng.normal(0.0, sigma, size=(n_per, len(c))) + c)
        labels.extend([ci] * n_per)
    return np.vstack(rows), np.asarray(labels)


def matrix_dataset(values, prefix="f"):
    values = np.asarray(values, dtype=float)
    return Dataset(
        feature_names=[f"{prefix}{i}" for i in range(values.shape[1])],
        row_ids=[str(i) for i in range(len(values))],
        values=values,
        enabled_features=frozenset(range(values.shape[1])),
    )


@pytest.fixture
def blob_dataset():
    values, labels = make_blobs([[0, 0], [6, 0], [0, 6]], n_per=100,
                                sigma=0.1, seed=42)
    return matrix_dataset(values), labels


@pytest.fixture
def toy_csv():
    return (
        b"country,gdp,employment,education\n"
        b"Australia,1.1,72,40\n"
        b"Austria,0.9,71,33\n"
        b"Belgium,1.0,62,37\n"
        b"Canada,1.2,72,51\n"
        b"Chile,0.5,61,24\n"
        b"Japan,1.3,75,45\n"
        b"Mexico,0.4,60,17\n"
        b"Norway,1.6,75,38\n"
    )
