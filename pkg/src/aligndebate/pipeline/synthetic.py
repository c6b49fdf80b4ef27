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
"""Generates small aligned knowledge graph pairs in the DBP15K file layout.

Source entities get ids ``0..n-1`` and target entities ``n..2n-1``, matched
through a seeded permutation. A ``collision_rate`` share of the entities is
grouped in twos that share one name and one embedding on both sides, so
that retrieval cannot tell the members of a group apart and the debate has
to. Every other target embedding is its source embedding plus small noise.
"""

from aligndebate.pipeline.embedding_index import (EmbeddingStore,
                                                  write_embeddings)
from aligndebate.pipeline.kg_store import DATASET_FILES, Side
import numpy as np
import logging
import os
import random

LOGGER = logging.getLogger(__name__)

SOURCE_PREFIX = "http://dbpedia.org/resource/"
TARGET_PREFIX = "http://fr.dbpedia.org/resource/"

SYLLABLES = ["an", "bel", "cor", "dra", "el", "fen", "gar", "hal", "is",
             "jor", "kel", "lun", "mar", "nor", "os", "pra", "quin", "ros",
             "sal", "tor", "ul", "ver", "wen", "yar", "zel"]

RELATIONS = ["birthPlace", "country", "locatedIn", "partOf", "spouse",
             "team", "capital", "founder"]

ATTRIBUTES = ["birthYear", "population", "elevation", "foundingYear",
              "height", "area", "established", "title"]

EDGES_PER_ENTITY = 2

NOISE = 0.01
"""Standard deviation of the noise between the two sides' vectors."""


def _name(rng, taken):
    while True:
        words = ["".join(rng.choice(SYLLABLES)
                         for _ in range(rng.randint(2, 3))).capitalize()
                 for _ in range(2)]
        name = "_".join(words)
        if name not in taken:
            taken.add(name)
            return name


def _write_rows(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write("\t".join(str(x) for x in row) + "\n")


def generate(out_dir, entities=200, collision_rate=0.3, attribute_noise=0.1,
             dim=16, train_ratio=0.3, seed=0, source_embeddings=
             "embeddings_1.bin", target_embeddings="embeddings_2.bin"):
    """Writes a dataset to ``out_dir``.

    :param entities: entities per side, at least 2.
    :param collision_rate: share of entities placed in same-name groups.
    :param attribute_noise: probability that a target attribute value
                            differs from its source value.
    :param dim: dimension of each of the three embedding features.
    :param train_ratio: share of the pairs written as seed pairs.
    :param seed: seed of every random choice.
    :returns: a summary dictionary with the counts written."""
    if entities < 2:
        raise ValueError("A dataset needs at least 2 entities per side")
    rng = random.Random(seed)
    vectors = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)
    n = entities

    # source entity i is aligned with target n + permutation[i]
    permutation = list(range(n))
    rng.shuffle(permutation)
    counterpart = {i: n + permutation[i] for i in range(n)}

    order = list(range(n))
    rng.shuffle(order)
    colliding = int(round(collision_rate * n / 2)) * 2
    groups = [tuple(sorted(order[i:i + 2]))
              for i in range(0, colliding, 2)]
    group_of = {e: g for g in groups for e in g}

    taken = set()
    names = {}
    for i in range(n):
        if i in names:
            continue
        name = _name(rng, taken)
        for member in group_of.get(i, (i, )):
            names[member] = name

    base = {}
    for i in range(n):
        key = group_of.get(i, i)
        if key not in base:
            base[key] = vectors.normal(size=(3, dim))
    source_vecs = np.zeros((n, 3, dim))
    target_vecs = np.zeros((n, 3, dim))
    for i in range(n):
        source_vecs[i] = base[group_of.get(i, i)]
        target_vecs[i] = base[group_of.get(i, i)]
        if i not in group_of:
            source_vecs[i] += vectors.normal(scale=NOISE, size=(3, dim))
            target_vecs[i] += vectors.normal(scale=NOISE, size=(3, dim))

    source_triples = set()
    for i in range(n):
        for _ in range(EDGES_PER_ENTITY):
            j = rng.randrange(n)
            if j != i:
                source_triples.add((i, rng.choice(RELATIONS), j))
    target_triples = {(counterpart[h], r, counterpart[t])
                      for h, r, t in source_triples}

    source_attributes = []
    target_attributes = []
    for i in range(n):
        for key in sorted(rng.sample(ATTRIBUTES, rng.randint(1, 4))):
            value = str(rng.randint(1000, 2020))
            source_attributes.append((i, key, value))
            if rng.random() < attribute_noise:
                value = str(int(value) + rng.randint(1, 9))
            target_attributes.append((counterpart[i], key, value))

    pairs = [(i, counterpart[i]) for i in range(n)]
    rng.shuffle(pairs)
    train = max(1, min(n - 1, int(round(train_ratio * n))))
    seed_pairs = sorted(pairs[:train])
    test_pairs = sorted(pairs[train:])

    def path(key):
        return os.path.join(out_dir, DATASET_FILES[key])

    _write_rows(path("source_entities"),
                [(i, SOURCE_PREFIX + names[i]) for i in range(n)])
    _write_rows(path("target_entities"),
                sorted((counterpart[i], TARGET_PREFIX + names[i])
                       for i in range(n)))
    _write_rows(path("source_triples"), sorted(source_triples))
    _write_rows(path("target_triples"), sorted(target_triples))
    _write_rows(path("source_attributes"), source_attributes)
    _write_rows(path("target_attributes"), sorted(target_attributes))
    _write_rows(path("seed_pairs"), seed_pairs)
    _write_rows(path("test_pairs"), test_pairs)

    source_store = EmbeddingStore(Side.SOURCE, list(range(n)),
                                  source_vecs[:, 0], source_vecs[:, 1],
                                  source_vecs[:, 2])
    target_ids = [counterpart[i] for i in range(n)]
    target_store = EmbeddingStore(Side.TARGET, target_ids, target_vecs[:, 0],
                                  target_vecs[:, 1], target_vecs[:, 2])
    write_embeddings(source_store, os.path.join(out_dir, source_embeddings))
    write_embeddings(target_store, os.path.join(out_dir, target_embeddings))

    summary = {"entities": n, "collision_groups": len(groups),
               "relation_triples": len(source_triples),
               "attribute_triples": len(source_attributes),
               "seed_pairs": len(seed_pairs), "test_pairs": len(test_pairs)}
    LOGGER.info("Generated dataset in {0}: {1}".format(out_dir, summary))
    return summary
