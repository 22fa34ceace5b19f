import numpy as np
import pytest

from posmine.data import Corpus, NEGATIVE, POSITIVE, Record


def make_corpus(vectors, ids=None, labels=None, source="real", texts=None):
    vectors = np.asarray(vectors, dtype=np.float32)
    n = vectors.shape[0]
    ids = ids or [f"x{i:03d}" for i in range(n)]
    records = []
    for i in range(n):
        records.append(
            Record(
                id=ids[i],
                embedding=vectors[i],
                truth_label=None if labels is None else labels[i],
                source=source,
                text=None if texts is None else texts[i],
            )
        )
    return Corpus(records)


def clustered_corpus(n_clusters, per_cluster, dim, noise, rng_seed, prefix="n", labels=None):
    """Unit vectors around orthonormal centers; labels given per cluster."""
    rng = np.random.default_rng(rng_seed)
    basis, _ = np.linalg.qr(rng.standard_normal((dim, n_clusters)))
    records = []
    i = 0
    for c in range(n_clusters):
        pts = basis[:, c][None, :] + noise * rng.standard_normal((per_cluster, dim)) / np.sqrt(dim)
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        for p in pts:
            records.append(
                Record(
                    id=f"{prefix}{i:04d}",
                    embedding=p.astype(np.float32),
                    truth_label=None if labels is None else labels[c],
                    source="real",
                )
            )
            i += 1
    return Corpus(records)


@pytest.fixture
def corpus_file(tmp_path):
    def write(lines, name="corpus.jsonl"):
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


POS = POSITIVE
NEG = NEGATIVE
