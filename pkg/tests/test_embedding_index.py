# Copyright 2026 AlignDebate contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# flake8: noqa

import sys
import os

myPath = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, myPath + "/../src/")

import math
from decimal import Decimal, getcontext
import numpy as np
import pytest
import aligndebate.pipeline.embedding_index as embedding_index
from aligndebate.pipeline.embedding_index import (EmbeddingStore,
                                                  SimilarityConfig)
from aligndebate.pipeline.kg_store import Side, KnowledgeGraph
from aligndebate.exception import (InvalidVectorError, DimensionMismatchError,
                                   UndefinedSimilarityError, ConfigError,
                                   RetrievalError, EmbeddingError,
                                   DanglingEntityError)


def random_store(rng, n, dims=(3, 2, 2), side=Side.SOURCE, offset=0):
    return EmbeddingStore(side, np.arange(n) + offset,
                          rng.normal(size=(n, dims[0])),
                          rng.normal(size=(n, dims[1])),
                          rng.normal(size=(n, dims[2])))


def brute_force_csls(x, y, k):
    """Reference CSLS computed with plain Python loops."""
    def cos(a, b):
        return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))

    full = [[cos(a, b) for b in y] for a in x]
    r_t = [sum(sorted(row, reverse=True)[:k]) / k for row in full]
    columns = [[full[i][j] for i in range(len(x))] for j in range(len(y))]
    ks = min(k, len(x))
    r_s = [sum(sorted(col, reverse=True)[:ks]) / ks for col in columns]
    return [[2 * full[i][j] - r_t[i] - r_s[j] for j in range(len(y))]
            for i in range(len(x))]


def test_fuse_concatenates():
    assert list(embedding_index.fuse([1], [2], [3])) == [1, 2, 3]


def test_fuse_paper_dimensions():
    v = np.ones(4096)
    assert embedding_index.fuse(v, v, v).shape == (12288, )


def test_fuse_round_trip():
    rng = np.random.default_rng(0)
    a, b, c = rng.normal(size=4), rng.normal(size=3), rng.normal(size=5)
    fused = embedding_index.fuse(a, b, c)
    assert np.array_equal(fused[:4], a)
    assert np.array_equal(fused[4:7], b)
    assert np.array_equal(fused[7:], c)


def test_fuse_rejects_nan():
    with pytest.raises(InvalidVectorError):
        embedding_index.fuse([1.0], [float("nan")], [0.0])
    with pytest.raises(InvalidVectorError):
        embedding_index.fuse([float("inf")], [1.0], [0.0])


def test_cosine_identity_and_orthogonal():
    assert embedding_index.cosine([3, 4, 5], [3, 4, 5]) == pytest.approx(1.0)
    assert embedding_index.cosine([1, 0], [0, 1]) == 0.0


def test_cosine_high_precision():
    getcontext().prec = 50
    a, b = [1, 2, 3], [4, 5, 6]
    dot = sum(Decimal(x) * Decimal(y) for x, y in zip(a, b))
    na = sum(Decimal(x) * Decimal(x) for x in a).sqrt()
    nb = sum(Decimal(x) * Decimal(x) for x in b).sqrt()
    expected = float(dot / (na * nb))
    assert abs(embedding_index.cosine(a, b) - expected) < 1e-9


def test_cosine_symmetric():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = rng.normal(size=7), rng.normal(size=7)
        assert abs(embedding_index.cosine(a, b) -
                   embedding_index.cosine(b, a)) < 1e-12


def test_cosine_errors():
    with pytest.raises(UndefinedSimilarityError):
        embedding_index.cosine([0, 0], [1, 0])
    with pytest.raises(DimensionMismatchError):
        embedding_index.cosine([1, 0], [1, 0, 0])


def test_csls_degenerate_single_pair():
    assert embedding_index.csls_from_cosine(np.array([[1.0]]), 1)[0, 0] == 0.0


def test_csls_matches_brute_force_small():
    rng = np.random.default_rng(2)
    x = random_store(rng, 3)
    y = random_store(rng, 3, side=Side.TARGET)
    matrix = embedding_index.csls_matrix(x, y, SimilarityConfig(csls_k=1))
    expected = brute_force_csls(x.fused.astype(np.float64),
                                y.fused.astype(np.float64), 1)
    assert np.allclose(matrix, expected, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("k", [1, 5, 10])
def test_csls_matches_brute_force_random(k):
    rng = np.random.default_rng(k)
    for _ in range(100):
        x = random_store(rng, 50, dims=(4, 2, 2))
        y = random_store(rng, 50, dims=(4, 2, 2), side=Side.TARGET)
        matrix = embedding_index.csls_matrix(
            x, y, SimilarityConfig(csls_k=k, chunk_rows=7))
        expected = brute_force_csls(x.fused.astype(np.float64),
                                    y.fused.astype(np.float64), k)
        assert np.allclose(matrix, expected, rtol=1e-9, atol=1e-12)


def test_csls_flips_hub_argmax():
    # target 0 is close to every source; target 1 is close to source 0 only
    # and slightly less similar to it under raw cosine.
    zeros = [[0.0], [0.0], [0.0]]
    sources = EmbeddingStore(Side.SOURCE, [0, 1, 2],
                             [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                              [0.0, 0.0, 1.0]], zeros, zeros)
    targets = EmbeddingStore(Side.TARGET, [0, 1, 2],
                             [[3.0, 1.0, 1.0], [1.0, 0.0, -0.5],
                              [-1.0, 0.0, 0.0]], zeros, zeros)
    cos = embedding_index.cosine_matrix(sources, targets)
    csls = embedding_index.csls_matrix(sources, targets,
                                       SimilarityConfig(csls_k=2))
    assert np.argmax(cos[0]) == 0
    assert np.argmax(csls[0]) == 1


def test_csls_argmax_ignores_row_constant():
    rng = np.random.default_rng(9)
    x = random_store(rng, 12)
    y = random_store(rng, 15, side=Side.TARGET)
    cos = embedding_index.cosine_matrix(x, y)
    csls = embedding_index.csls_matrix(x, y, SimilarityConfig(csls_k=4))
    r_s = np.sort(cos.T, axis=1)[:, -4:].mean(axis=1)
    for i in range(12):
        assert np.argmax(csls[i]) == np.argmax(2 * cos[i] - r_s)


def test_csls_k_too_large():
    rng = np.random.default_rng(4)
    x = random_store(rng, 3)
    y = random_store(rng, 3, side=Side.TARGET)
    with pytest.raises(ConfigError):
        embedding_index.csls_matrix(x, y, SimilarityConfig(csls_k=3))


def test_csls_deterministic_across_chunking():
    rng = np.random.default_rng(5)
    x = random_store(rng, 40)
    y = random_store(rng, 30, side=Side.TARGET)
    a = embedding_index.csls_matrix(x, y, SimilarityConfig(chunk_rows=1))
    b = embedding_index.csls_matrix(x, y, SimilarityConfig(chunk_rows=64))
    assert np.array_equal(a, b)


def test_similarity_matrix_normalized():
    rng = np.random.default_rng(6)
    x = random_store(rng, 10)
    y = random_store(rng, 20, side=Side.TARGET)
    scores = embedding_index.similarity_matrix(x, y, SimilarityConfig())
    assert np.allclose(scores.min(axis=1), 0.0)
    assert np.allclose(scores.max(axis=1), 1.0)


def test_normalize_rows_constant_row():
    assert np.array_equal(embedding_index.normalize_rows([[0.3, 0.3]]),
                          [[0.0, 0.0]])


def test_zero_vector_in_store():
    x = EmbeddingStore(Side.SOURCE, [4], [[0.0]], [[0.0]], [[0.0]])
    y = EmbeddingStore(Side.TARGET, [0, 1], [[1.0], [0.5]], [[1.0], [1.0]],
                       [[1.0], [1.0]])
    with pytest.raises(UndefinedSimilarityError) as execinfo:
        embedding_index.similarity_matrix(x, y, SimilarityConfig(COSINE))
    assert "4" in str(execinfo.value)


COSINE = embedding_index.COSINE


def test_top_k_basic():
    assert embedding_index.top_k([0.1, 0.9, 0.5], 2) == [(1, 0.9), (2, 0.5)]


def test_top_k_ties():
    assert [i for i, _ in embedding_index.top_k([0.4, 0.4, 0.4], 3)] == [
        0, 1, 2]
    assert [i for i, _ in embedding_index.top_k([0.1, 0.4, 0.4, 0.4], 2)
            ] == [1, 2]


def test_top_k_matches_full_sort():
    rng = np.random.default_rng(7)
    row = np.round(rng.random(1000), 2)
    expected = sorted(range(1000), key=lambda i: (-row[i], i))[:20]
    assert [i for i, _ in embedding_index.top_k(row, 20)] == expected


def test_top_k_out_of_range():
    with pytest.raises(RetrievalError):
        embedding_index.top_k([0.1, 0.2], 3)
    with pytest.raises(RetrievalError):
        embedding_index.top_k([0.1, 0.2], 0)


def test_store_rejects_bad_shapes():
    with pytest.raises(DimensionMismatchError):
        EmbeddingStore(Side.SOURCE, [0, 1], [[1.0]], [[1.0]], [[1.0]])
    with pytest.raises(InvalidVectorError):
        EmbeddingStore(Side.SOURCE, [0], [[float("nan")]], [[1.0]], [[1.0]])
    with pytest.raises(EmbeddingError):
        EmbeddingStore(Side.SOURCE, [0, 0], [[1.0], [2.0]], [[1.0], [1.0]],
                       [[1.0], [1.0]])


def test_store_sorted_and_embedding():
    store = EmbeddingStore(Side.SOURCE, [5, 2], [[1.0], [2.0]],
                           [[3.0], [4.0]], [[5.0], [6.0]])
    assert list(store.ids) == [2, 5]
    emb = store.embedding(5)
    assert list(emb.fused) == [1.0, 3.0, 5.0]
    assert store.dims == (1, 1, 1)


def test_store_check_graph():
    store = EmbeddingStore(Side.SOURCE, [0, 9], [[1.0], [2.0]],
                           [[3.0], [4.0]], [[5.0], [6.0]])
    graph = KnowledgeGraph(Side.SOURCE, {0: "a"})
    with pytest.raises(DanglingEntityError):
        store.check_graph(graph)


def test_binary_and_jsonl_load_identically(tmp_path):
    rng = np.random.default_rng(8)
    store = random_store(rng, 6, dims=(4, 3, 2), offset=10)
    binary = str(tmp_path / "emb.bin")
    jsonl = str(tmp_path / "emb.jsonl")
    embedding_index.write_embeddings(store, binary)
    embedding_index.write_embeddings(store, jsonl)
    a = embedding_index.load_embeddings(binary, Side.SOURCE)
    b = embedding_index.load_embeddings(jsonl, Side.SOURCE)
    assert a == store
    assert a == b


def test_binary_layout(tmp_path):
    path = tmp_path / "emb.bin"
    body = np.zeros(1, dtype=[("id", "<u8"), ("vec", "<f4", (3, ))])
    body["id"] = 7
    body["vec"] = [1.0, 2.0, 3.0]
    path.write_bytes(b"1 1 1 1\n" + body.tobytes())
    store = embedding_index.load_embeddings(str(path), Side.TARGET)
    assert list(store.ids) == [7]
    assert list(store.embedding(7).rel_vec) == [2.0]


def test_binary_truncated(tmp_path):
    path = tmp_path / "emb.bin"
    path.write_bytes(b"2 1 1 1\n" + b"\x00" * 20)
    with pytest.raises(EmbeddingError):
        embedding_index.load_embeddings(str(path), Side.SOURCE)


def test_binary_bad_header(tmp_path):
    path = tmp_path / "emb.bin"
    path.write_bytes(b"two 1 1 1\n")
    with pytest.raises(EmbeddingError):
        embedding_index.load_embeddings(str(path), Side.SOURCE)
