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

import os
import numpy as np
import pytest
import aligndebate.pipeline.embedding_index as embedding_index
import aligndebate.pipeline.kg_store as kg_store
import aligndebate.pipeline.synthetic as synthetic
from aligndebate.pipeline.kg_store import DATASET_FILES, Side


def path(directory, key):
    return os.path.join(str(directory), DATASET_FILES[key])


def load(directory):
    g_s = kg_store.load_graph(path(directory, "source_entities"),
                              path(directory, "source_triples"),
                              path(directory, "source_attributes"),
                              Side.SOURCE)
    g_t = kg_store.load_graph(path(directory, "target_entities"),
                              path(directory, "target_triples"),
                              path(directory, "target_attributes"),
                              Side.TARGET)
    seeds = kg_store.load_seed_pairs(path(directory, "seed_pairs"), g_s, g_t)
    tests = kg_store.load_seed_pairs(path(directory, "test_pairs"), g_s, g_t)
    return g_s, g_t, seeds, tests


def test_generate_writes_a_loadable_dataset(tmp_path):
    summary = synthetic.generate(str(tmp_path), entities=40, dim=4)
    g_s, g_t, seeds, tests = load(tmp_path)
    assert len(g_s) == len(g_t) == 40
    assert summary["seed_pairs"] + summary["test_pairs"] == 40
    assert len(seeds) == summary["seed_pairs"] == 12
    assert summary["collision_groups"] == 6
    assert len(g_s.relation_triples) == len(g_t.relation_triples)
    sources = embedding_index.load_embeddings(
        str(tmp_path / "embeddings_1.bin"), Side.SOURCE)
    targets = embedding_index.load_embeddings(
        str(tmp_path / "embeddings_2.bin"), Side.TARGET)
    assert sources.dims == (4, 4, 4)
    sources.check_graph(g_s)
    targets.check_graph(g_t)


def test_pairs_cover_every_entity_once(tmp_path):
    synthetic.generate(str(tmp_path), entities=30)
    g_s, g_t, seeds, tests = load(tmp_path)
    pairs = list(seeds) + list(tests)
    assert sorted(s for s, _ in pairs) == g_s.ids()
    assert sorted(t for _, t in pairs) == g_t.ids()


def test_counterparts_share_names_and_relations(tmp_path):
    synthetic.generate(str(tmp_path), entities=30)
    g_s, g_t, seeds, tests = load(tmp_path)
    counterpart = dict(list(seeds) + list(tests))
    for s, t in counterpart.items():
        assert g_s.name(s) == g_t.name(t)
        assert g_s.degree(s) == g_t.degree(t)


def test_collisions_tie_in_embedding_space(tmp_path):
    synthetic.generate(str(tmp_path), entities=30, collision_rate=0.5)
    g_s, g_t, seeds, tests = load(tmp_path)
    sources = embedding_index.load_embeddings(
        str(tmp_path / "embeddings_1.bin"), Side.SOURCE)
    by_name = {}
    for e in g_s.ids():
        by_name.setdefault(g_s.name(e), []).append(e)
    groups = [members for members in by_name.values() if len(members) > 1]
    assert len(groups) > 0
    for a, b in groups:
        assert np.array_equal(sources.fused[sources.row(a)],
                              sources.fused[sources.row(b)])


def test_generate_is_deterministic(tmp_path):
    synthetic.generate(str(tmp_path / "a"), entities=25, seed=3)
    synthetic.generate(str(tmp_path / "b"), entities=25, seed=3)
    for name in sorted(os.listdir(str(tmp_path / "a"))):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_generate_rejects_tiny_datasets(tmp_path):
    with pytest.raises(ValueError):
        synthetic.generate(str(tmp_path), entities=1)
