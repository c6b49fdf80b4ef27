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
"""Per-entity feature vectors, their fusion and the cosine and CSLS
similarities used to retrieve candidates."""

from aligndebate.exception import (EmbeddingError, InvalidVectorError,
                                   DimensionMismatchError,
                                   UndefinedSimilarityError, ConfigError,
                                   RetrievalError, DanglingEntityError)
from collections import namedtuple
import json
import logging
import numpy as np
import parse

LOGGER = logging.getLogger(__name__)

HEADER = parse.compile("{:d} {:d} {:d} {:d}")

COSINE = "cosine"
CSLS = "csls"

EntityEmbedding = namedtuple(
    "EntityEmbedding", ["entity", "name_vec", "rel_vec", "attr_vec", "fused"])


class SimilarityConfig(object):
    """Settings of the retrieval similarity.

    :param metric: :py:data:`COSINE` or :py:data:`CSLS`.
    :param csls_k: the neighbourhood size of the hubness penalty.
    :param normalize: whether score rows are min-max normalised.
    :param chunk_rows: source rows scored per block."""

    def __init__(self, metric=CSLS, csls_k=10, normalize=True,
                 chunk_rows=1024):
        if metric not in (COSINE, CSLS):
            raise ConfigError("similarity.metric",
                              "unknown metric {0}".format(metric))
        if csls_k < 1:
            raise ConfigError("similarity.csls_k", "must be positive")
        self.metric = metric
        self.csls_k = csls_k
        self.normalize = normalize
        self.chunk_rows = max(1, chunk_rows)

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg["similarity.metric"], cfg["similarity.csls_k"],
                   cfg["similarity.normalize"], cfg["similarity.chunk_rows"])


def _check_finite(vector, what="vector"):
    if not np.all(np.isfinite(vector)):
        raise InvalidVectorError("{0} holds NaN or infinite entries"
                                 .format(what))


def fuse(name, rel, attr):
    """Concatenates the three feature vectors in name, relation, attribute
    order.

    :raises InvalidVectorError: if an input holds NaN or infinity.
    :returns: a one dimensional numpy array."""
    parts = [np.asarray(v).ravel() for v in (name, rel, attr)]
    for label, part in zip(("name", "rel", "attr"), parts):
        _check_finite(part, label + " vector")
    return np.concatenate(parts)


def cosine(a, b):
    """Returns the cosine similarity of two vectors, computed in double
    precision.

    :raises DimensionMismatchError: if the lengths differ.
    :raises UndefinedSimilarityError: if either vector is all zeros."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionMismatchError("Cannot compare vectors of length {0} "
                                     "and {1}".format(a.size, b.size))
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise UndefinedSimilarityError("Cosine of a zero vector is undefined")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


class EmbeddingStore(object):
    """The name, relation and attribute vectors of every entity of one side.
    Rows are kept in ascending id order and the arrays are read only.

    :param side: the :py:class:`~aligndebate.pipeline.kg_store.Side`.
    :param ids: a sequence of entity ids.
    :param name: an ``(n, d_name)`` array.
    :param rel: an ``(n, d_rel)`` array.
    :param attr: an ``(n, d_attr)`` array.
    :raises InvalidVectorError: if any entry is not finite.
    :raises DimensionMismatchError: if the arrays disagree in shape."""

    def __init__(self, side, ids, name, rel, attr):
        ids = np.asarray(ids, dtype=np.int64).ravel()
        arrays = [np.asarray(x, dtype=np.float32) for x in (name, rel, attr)]
        for label, array in zip(("name", "rel", "attr"), arrays):
            if array.ndim != 2 or array.shape[0] != ids.size:
                raise DimensionMismatchError(
                    "{0} vectors have shape {1} for {2} ids".format(
                        label, array.shape, ids.size))
            if array.shape[1] < 1:
                raise DimensionMismatchError(
                    "{0} vectors have no dimensions".format(label))
            _check_finite(array, label + " vectors")
        if len(np.unique(ids)) != ids.size:
            raise EmbeddingError("Embedding ids are not unique")
        if np.any(ids < 0):
            raise EmbeddingError("Embedding ids must not be negative")
        order = np.argsort(ids, kind="stable")
        self.side = side
        self.ids = ids[order]
        self.name, self.rel, self.attr = [a[order] for a in arrays]
        for array in (self.ids, self.name, self.rel, self.attr):
            array.flags.writeable = False
        self._rows = {int(e): i for i, e in enumerate(self.ids)}
        self._fused = None

    def __len__(self):
        return int(self.ids.size)

    def __contains__(self, e):
        return e in self._rows

    def __eq__(self, other):
        if not isinstance(other, EmbeddingStore):
            return NotImplemented
        return (self.side == other.side
                and np.array_equal(self.ids, other.ids)
                and all(a.tobytes() == b.tobytes() for a, b in zip(
                    (self.name, self.rel, self.attr),
                    (other.name, other.rel, other.attr))))

    def __hash__(self):
        return hash((self.side, self.ids.tobytes()))

    @property
    def dims(self):
        """The ``(d_name, d_rel, d_attr)`` dimensions."""
        return (self.name.shape[1], self.rel.shape[1], self.attr.shape[1])

    @property
    def fused(self):
        """The ``(n, d_name + d_rel + d_attr)`` array of fused vectors."""
        if self._fused is None:
            fused = np.hstack([self.name, self.rel, self.attr])
            fused.flags.writeable = False
            self._fused = fused
        return self._fused

    def row(self, e):
        """Returns the row index of entity ``e``.

        :raises EmbeddingError: if ``e`` has no embedding."""
        try:
            return self._rows[e]
        except KeyError:
            raise EmbeddingError("Entity {0} has no embedding".format(e))

    def embedding(self, e):
        """Returns the :py:class:`EntityEmbedding` of ``e``."""
        i = self.row(e)
        return EntityEmbedding(e, self.name[i], self.rel[i], self.attr[i],
                               self.fused[i])

    def subset(self, ids):
        """Returns a store restricted to ``ids``."""
        rows = [self.row(e) for e in ids]
        return EmbeddingStore(self.side, self.ids[rows], self.name[rows],
                              self.rel[rows], self.attr[rows])

    def check_graph(self, graph):
        """Checks that every stored id exists in ``graph``.

        :raises DanglingEntityError: for the first unknown id."""
        for e in self.ids:
            if int(e) not in graph:
                raise DanglingEntityError(int(e))


def _record_dtype(dims):
    return np.dtype([("id", "<u8"), ("vec", "<f4", (sum(dims), ))])


def load_embeddings(path, side):
    """Reads an embedding file. Files ending in ``.jsonl`` hold one
    ``{"id", "name", "rel", "attr"}`` object per line; any other file is the
    binary format: a text header ``COUNT DIM_NAME DIM_REL DIM_ATTR`` then one
    record per entity of a little endian uint64 id and float32 values.

    :raises EmbeddingError: if the file is malformed.
    :returns: an :py:class:`EmbeddingStore`."""
    if str(path).endswith(".jsonl"):
        return _load_jsonl(path, side)
    with open(path, "rb") as f:
        header = f.readline().decode("ascii", errors="replace").strip()
        result = HEADER.parse(header)
        if result is None:
            raise EmbeddingError("{0}: malformed header '{1}'".format(
                path, header))
        count, *dims = result.fixed
        dtype = _record_dtype(dims)
        body = f.read()
    if len(body) != count * dtype.itemsize:
        raise EmbeddingError("{0}: expected {1} records of {2} bytes, found "
                             "{3} bytes".format(path, count, dtype.itemsize,
                                                len(body)))
    records = np.frombuffer(body, dtype=dtype, count=count)
    vec = records["vec"]
    a, b = dims[0], dims[0] + dims[1]
    store = EmbeddingStore(side, records["id"].astype(np.int64), vec[:, :a],
                           vec[:, a:b], vec[:, b:])
    LOGGER.info("Loaded {0} {1} embeddings of dimensions {2} from {3}"
                .format(len(store), side.value, store.dims, path))
    return store


def _load_jsonl(path, side):
    ids, features = [], ([], [], [])
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                ids.append(int(record["id"]))
                for store, key in zip(features, ("name", "rel", "attr")):
                    store.append(np.asarray(record[key], dtype=np.float32))
            except (ValueError, KeyError, TypeError) as ex:
                raise EmbeddingError("{0}:{1}: malformed record".format(
                    path, number), errors=str(ex))
    try:
        arrays = [np.vstack(x) if x else np.zeros((0, 1), np.float32)
                  for x in features]
    except ValueError as ex:
        raise DimensionMismatchError(
            "{0}: records disagree in dimension".format(path), errors=str(ex))
    store = EmbeddingStore(side, ids, *arrays)
    LOGGER.info("Loaded {0} {1} embeddings from {2}".format(
        len(store), side.value, path))
    return store


def write_embeddings(store, path, fmt=None):
    """Writes ``store`` in the binary format, or as JSON lines when ``fmt`` is
    "jsonl" or the path ends in ``.jsonl``."""
    fmt = fmt or ("jsonl" if str(path).endswith(".jsonl") else "binary")
    if fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as f:
            for i, e in enumerate(store.ids):
                f.write(json.dumps({
                    "id": int(e),
                    "name": [float(x) for x in store.name[i]],
                    "rel": [float(x) for x in store.rel[i]],
                    "attr": [float(x) for x in store.attr[i]]
                }) + "\n")
        return
    dims = store.dims
    records = np.zeros(len(store), dtype=_record_dtype(dims))
    records["id"] = store.ids
    records["vec"] = store.fused
    with open(path, "wb") as f:
        f.write("{0} {1} {2} {3}\n".format(len(store), *dims).encode("ascii"))
        f.write(records.tobytes())


def _unit_rows(store, features="fused"):
    matrix = np.asarray(getattr(store, features), dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise UndefinedSimilarityError(
            "{0} entity {1} has an all zero {2} vector".format(
                store.side.value, int(store.ids[zero[0]]), features))
    return matrix / norms[:, None]


def cosine_matrix(sources, targets, features="fused", chunk_rows=1024):
    """Returns the ``(|sources|, |targets|)`` cosine similarity matrix of
    the chosen feature, one of "fused", "name", "rel" or "attr"."""
    x = _unit_rows(sources, features)
    y = _unit_rows(targets, features)
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatchError("Source and target {0} vectors differ "
                                     "in dimension".format(features))
    out = np.empty((x.shape[0], y.shape[0]), dtype=np.float64)
    for start in range(0, x.shape[0], chunk_rows):
        out[start:start + chunk_rows] = x[start:start + chunk_rows] @ y.T
    return out


def _mean_top(matrix, k):
    """Mean of the ``k`` largest values of every row."""
    k = min(k, matrix.shape[1])
    top = np.partition(matrix, matrix.shape[1] - k, axis=1)[:, -k:]
    return np.sort(top, axis=1).mean(axis=1)


def csls_from_cosine(cos, k):
    """Applies the CSLS correction to a cosine matrix:
    ``2 cos(x, y) - r_T(x) - r_S(y)`` where ``r_T(x)`` is the mean cosine of
    ``x`` to its ``k`` nearest targets and ``r_S(y)`` the mean cosine of
    ``y`` to its ``k`` nearest sources. ``k`` is clamped to the available
    neighbours on each side.

    :param cos: a two dimensional array.
    :param k: a positive integer."""
    cos = np.asarray(cos, dtype=np.float64)
    r_t = _mean_top(cos, k)
    r_s = _mean_top(cos.T, k)
    return 2 * cos - r_t[:, None] - r_s[None, :]


def csls_matrix(sources, targets, cfg):
    """Returns the CSLS score of every source against every target, using
    fused vectors.

    :param sources: the source :py:class:`EmbeddingStore`.
    :param targets: the target :py:class:`EmbeddingStore`.
    :param cfg: a :py:class:`SimilarityConfig`.
    :raises ConfigError: if ``cfg.csls_k`` is not below the target count.
    :raises RetrievalError: if either store is empty."""
    if len(sources) == 0 or len(targets) == 0:
        raise RetrievalError("CSLS needs non-empty source and target stores")
    if cfg.csls_k >= len(targets):
        raise ConfigError("similarity.csls_k", "csls_k {0} must be below the "
                          "{1} targets".format(cfg.csls_k, len(targets)))
    cos = cosine_matrix(sources, targets, chunk_rows=cfg.chunk_rows)
    return csls_from_cosine(cos, cfg.csls_k)


def normalize_rows(matrix):
    """Min-max normalises every row into [0, 1]. Constant rows become all
    zeros."""
    matrix = np.asarray(matrix, dtype=np.float64)
    low = matrix.min(axis=1, keepdims=True)
    span = matrix.max(axis=1, keepdims=True) - low
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (matrix - low) / safe, 0.0)


def similarity_matrix(sources, targets, cfg):
    """Scores every source against every target with the configured metric,
    normalising rows when ``cfg.normalize`` is set."""
    if cfg.metric == CSLS:
        scores = csls_matrix(sources, targets, cfg)
    else:
        if len(sources) == 0 or len(targets) == 0:
            raise RetrievalError("Cannot score empty stores")
        scores = cosine_matrix(sources, targets, chunk_rows=cfg.chunk_rows)
    LOGGER.info("Scored {0}x{1} pairs with {2}".format(
        scores.shape[0], scores.shape[1], cfg.metric))
    if cfg.normalize:
        scores = normalize_rows(scores)
    return scores


def top_k(scores_row, k):
    """Returns the ``k`` best ``(index, score)`` pairs of a row, by
    descending score with ties broken by ascending index.

    :raises RetrievalError: if ``k`` is not in ``1..len(scores_row)``."""
    row = np.asarray(scores_row, dtype=np.float64).ravel()
    n = row.size
    if k < 1 or k > n:
        raise RetrievalError("k={0} is out of range for a row of {1} scores"
                             .format(k, n))
    if k == n:
        idx = np.arange(n)
    else:
        kth = np.partition(row, n - k)[n - k]
        above = np.flatnonzero(row > kth)
        tied = np.flatnonzero(row == kth)[:k - above.size]
        idx = np.concatenate([above, tied])
    order = idx[np.lexsort((idx, -row[idx]))]
    return [(int(i), float(row[i])) for i in order]
