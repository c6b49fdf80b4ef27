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

import random
import pytest
import aligndebate.pipeline.kg_store as kg_store
from aligndebate.pipeline.kg_store import (KnowledgeGraph, RelationTriple,
                                           AttributeTriple, Side)
from aligndebate.exception import (GraphFormatError, DanglingEntityError,
                                   EntityNotFoundError)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def generateGraphFiles(tmp_path, entities="0\ta\n1\tb\n2\tc\n",
                       triples="0\tr1\t1\n1\tr2\t2\n",
                       attributes="0\tborn\t1900\n"):
    return (write(tmp_path, "ent_ids_1", entities),
            write(tmp_path, "triples_1", triples),
            write(tmp_path, "attr_triples_1", attributes))


def random_graph(rng, nodes, edges):
    entities = {i: "e{0}".format(i) for i in range(nodes)}
    triples = [RelationTriple(rng.randrange(nodes), "r{0}".format(
        rng.randrange(3)), rng.randrange(nodes)) for _ in range(edges)]
    return KnowledgeGraph(Side.SOURCE, entities, triples)


def test_load_graph_counts(tmp_path):
    g = kg_store.load_graph(*generateGraphFiles(tmp_path))
    assert len(g) == 3
    assert len(g.relation_triples) == 2
    assert g.attribute_triples == (AttributeTriple(0, "born", "1900"), )


def test_load_graph_dangling_id(tmp_path):
    files = generateGraphFiles(tmp_path, triples="0\tr1\t99\n")
    with pytest.raises(DanglingEntityError) as execinfo:
        kg_store.load_graph(*files)
    assert execinfo.value.entity == 99
    assert "99" in str(execinfo.value)


def test_load_graph_malformed_row_names_file_and_line(tmp_path):
    files = generateGraphFiles(tmp_path, triples="0\tr1\t1\n\nbroken row\n")
    with pytest.raises(GraphFormatError) as execinfo:
        kg_store.load_graph(*files)
    assert execinfo.value.line == 3
    assert execinfo.value.path == files[1]


def test_load_graph_duplicate_entity(tmp_path):
    files = generateGraphFiles(tmp_path, entities="0\ta\n0\tb\n")
    with pytest.raises(GraphFormatError):
        kg_store.load_graph(files[0], files[1])


def test_load_graph_dedupes_and_skips_blank_lines(tmp_path):
    files = generateGraphFiles(tmp_path,
                               triples="0\tr1\t1\n\n0\tr1\t1\r\n1\tr2\t2\n")
    g = kg_store.load_graph(*files)
    assert len(g.relation_triples) == 2
    assert g.degree(1) == 2


def test_load_graph_idempotent(tmp_path):
    files = generateGraphFiles(tmp_path)
    assert kg_store.load_graph(*files) == kg_store.load_graph(*files)


def test_load_graph_resolves_uri_names(tmp_path):
    files = generateGraphFiles(
        tmp_path, entities="0\thttp://fr.dbpedia.org/resource/Le_Havre\n"
        "1\tb\n2\tc\n")
    g = kg_store.load_graph(*files, side=Side.TARGET)
    assert g.name(0) == "Le Havre"
    assert g.side == Side.TARGET


def test_load_graph_attribute_with_empty_value(tmp_path):
    files = generateGraphFiles(tmp_path, attributes="1\tnote\t\n")
    g = kg_store.load_graph(*files)
    assert g.attributes(1) == [("note", "")]


def test_neighbors_isolated():
    g = KnowledgeGraph(Side.SOURCE, {0: "a", 1: "b"}, [])
    assert g.neighbors(0) == set()


def test_neighbors_both_directions():
    g = KnowledgeGraph(Side.SOURCE, {0: "e", 1: "a", 2: "b"}, [
        RelationTriple(0, "r1", 1),
        RelationTriple(2, "r2", 0)])
    assert g.neighbors(0) == {("r1", 1), ("r2", 2)}


def test_neighbors_star():
    triples = [RelationTriple(0, "r", leaf) for leaf in range(1, 6)]
    g = KnowledgeGraph(Side.SOURCE, {i: str(i) for i in range(6)}, triples)
    assert len(g.neighbors(0)) == 5


def test_neighbors_unknown_entity():
    g = KnowledgeGraph(Side.SOURCE, {0: "a"})
    with pytest.raises(EntityNotFoundError):
        g.neighbors(7)
    with pytest.raises(EntityNotFoundError):
        g.degree(7)


def test_degree_definition():
    entities = {i: str(i) for i in range(6)}
    triples = [RelationTriple(0, "r", 1), RelationTriple(0, "r", 2),
               RelationTriple(0, "r", 3), RelationTriple(4, "r", 0),
               RelationTriple(5, "s", 0)]
    g = KnowledgeGraph(Side.SOURCE, entities, triples)
    assert g.degree(0) == 5
    assert g.degree(1) == 1


def test_degree_self_loop_counts_once():
    g = KnowledgeGraph(Side.SOURCE, {0: "a"}, [RelationTriple(0, "r", 0)])
    assert g.degree(0) == 1
    assert g.neighbors(0) == {("r", 0)}


def test_degree_matches_brute_force():
    rng = random.Random(3)
    g = random_graph(rng, 50, 120)
    for e in g.ids():
        expected = len([t for t in g.relation_triples
                        if t.head == e or t.tail == e])
        assert g.degree(e) == expected


def test_neighbors_never_contain_self_without_loop():
    rng = random.Random(5)
    g = random_graph(rng, 30, 60)
    for e in g.ids():
        loops = [t for t in g.relation_triples if t.head == e == t.tail]
        if not loops:
            assert e not in {n for _, n in g.neighbors(e)}


def test_entity_profile_empty_attributes():
    g = KnowledgeGraph(Side.SOURCE, {0: "Paris"})
    profile = g.entity_profile(0)
    assert profile.name == "Paris"
    assert profile.attributes == ()


def test_entity_profile_sorted_attributes():
    g = KnowledgeGraph(Side.SOURCE, {0: "x"}, [], [
        AttributeTriple(0, "b", "2"), AttributeTriple(0, "a", "1")])
    assert g.entity_profile(0).attributes == (("a", "1"), ("b", "2"))


def test_entity_profile_deterministic():
    g = KnowledgeGraph(Side.SOURCE, {0: "x", 1: "y", 2: "z", 3: "w"}, [
        RelationTriple(0, "r2", 1), RelationTriple(3, "r1", 0),
        RelationTriple(0, "r1", 2)])
    first = g.entity_profile(0).render("Entity A")
    second = g.entity_profile(0).render("Entity A")
    assert first == second
    assert len(g.entity_profile(0).relations) == 3
    assert g.entity_profile(0).relations == (("r1", "w"), ("r1", "z"),
                                             ("r2", "y"))


def test_profile_render():
    g = KnowledgeGraph(Side.SOURCE, {0: "Munich", 1: "Germany"},
                       [RelationTriple(0, "country", 1)],
                       [AttributeTriple(0, "population", "1500000")])
    text = g.entity_profile(0).render("Entity B")
    assert text == ("Entity B Name: Munich\n"
                    "Entity B Attributes: population: 1500000\n"
                    "Entity B Relations: country|Germany")
    assert g.entity_profile(1).render("X", ("name", "attributes")) == (
        "X Name: Germany\nX Attributes:")


def test_load_seed_pairs(tmp_path):
    g = KnowledgeGraph(Side.SOURCE, {0: "a", 1: "b"})
    h = KnowledgeGraph(Side.TARGET, {5: "a", 6: "b"})
    path = write(tmp_path, "sup_ent_ids", "0\t5\n1\t6\n")
    seeds = kg_store.load_seed_pairs(path, g, h)
    assert list(seeds) == [(0, 5), (1, 6)]
    assert seeds.target_of(1) == 6
    assert (0, 5) in seeds


def test_load_seed_pairs_repeated_source(tmp_path):
    g = KnowledgeGraph(Side.SOURCE, {0: "a"})
    h = KnowledgeGraph(Side.TARGET, {5: "a", 6: "b"})
    path = write(tmp_path, "sup_ent_ids", "0\t5\n0\t6\n")
    with pytest.raises(GraphFormatError):
        kg_store.load_seed_pairs(path, g, h)


def test_load_seed_pairs_unknown_target(tmp_path):
    g = KnowledgeGraph(Side.SOURCE, {0: "a"})
    h = KnowledgeGraph(Side.TARGET, {5: "a"})
    path = write(tmp_path, "sup_ent_ids", "0\t9\n")
    with pytest.raises(DanglingEntityError) as execinfo:
        kg_store.load_seed_pairs(path, g, h)
    assert execinfo.value.entity == 9


def test_frequency_table():
    g = KnowledgeGraph(Side.SOURCE, {0: "a", 1: "b"},
                       [RelationTriple(0, "r", 1)],
                       [AttributeTriple(0, "k", "1"),
                        AttributeTriple(1, "k", "2")])
    h = KnowledgeGraph(Side.TARGET, {0: "a", 1: "b"},
                       [RelationTriple(1, "r", 0)])
    table = kg_store.frequency_table(g, h)
    assert table[("attribute", "k")] == 2
    assert table[("relation", "r")] == 2
