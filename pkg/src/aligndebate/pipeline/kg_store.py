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
"""Loads, indexes and queries the two knowledge graphs and their seed
alignment pairs.

Entities are identified by non-negative integer ids which are unique within
one side. A graph knows its :py:class:`Side`, so an id together with the
graph it was looked up in names one entity."""

from aligndebate.exception import (GraphFormatError, DanglingEntityError,
                                   EntityNotFoundError)
from collections import namedtuple, Counter
import enum
import logging
import parse

LOGGER = logging.getLogger(__name__)

ENTITY_ROW = parse.compile("{:d}\t{}")
RELATION_ROW = parse.compile("{:d}\t{}\t{:d}")
ATTRIBUTE_ROW = parse.compile("{:d}\t{}\t{}")
ATTRIBUTE_EMPTY_VALUE_ROW = parse.compile("{:d}\t{}\t")
PAIR_ROW = parse.compile("{:d}\t{:d}")

DATASET_FILES = {
    "source_entities": "ent_ids_1",
    "target_entities": "ent_ids_2",
    "source_triples": "triples_1",
    "target_triples": "triples_2",
    "source_attributes": "attr_triples_1",
    "target_attributes": "attr_triples_2",
    "seed_pairs": "sup_ent_ids",
    "test_pairs": "ref_ent_ids",
}
"""File names of a dataset directory, following the DBP15K layout."""


class Side(enum.Enum):
    SOURCE = "source"
    TARGET = "target"


RelationTriple = namedtuple("RelationTriple", ["head", "relation", "tail"])
AttributeTriple = namedtuple("AttributeTriple",
                             ["entity", "attribute", "value"])


class Profile(namedtuple("Profile",
                         ["entity", "name", "attributes", "relations"])):
    """The text facts of one entity: its name, its sorted ``(key, value)``
    attribute pairs and its sorted ``(relation, neighbor name)`` pairs."""

    SECTIONS = ("name", "attributes", "relations")

    def render(self, label, sections=SECTIONS):
        """Renders the profile as ``<label> Name: ...`` lines.

        Attributes render as ``key: value`` items and relations as
        ``relation|neighbor`` tokens, both joined with "; ".

        :param label: the prefix of every line, for example "Entity A".
        :param sections: the sections to include, in order.
        :returns: a string without a trailing newline."""
        lines = []
        for section in sections:
            if section == "name":
                body = self.name
            elif section == "attributes":
                body = "; ".join("{0}: {1}".format(k, v)
                                 for k, v in self.attributes)
            elif section == "relations":
                body = "; ".join("{0}|{1}".format(r, n)
                                 for r, n in self.relations)
            else:
                raise ValueError("Unknown profile section " + section)
            line = "{0} {1}: {2}".format(label, section.capitalize(), body)
            lines.append(line.rstrip())
        return "\n".join(lines)


def display_name(raw):
    """Turns a DBpedia style resource URI into a readable name. Other strings
    are returned unchanged.

    :param raw: the name column of an entity file."""
    if raw.startswith("http://") or raw.startswith("https://"):
        raw = raw.rstrip("/").rsplit("/", 1)[-1].replace("_", " ")
    return raw


class KnowledgeGraph(object):
    """One side of the alignment problem. Graphs are immutable once built and
    may be shared between threads.

    :param side: the :py:class:`Side` of this graph.
    :param entities: a dictionary of entity id to name.
    :param relation_triples: an iterable of :py:class:`RelationTriple`.
    :param attribute_triples: an iterable of :py:class:`AttributeTriple`.
    :raises DanglingEntityError: if a triple names an unknown entity."""

    def __init__(self, side, entities, relation_triples=(),
                 attribute_triples=()):
        self.side = side
        self._entities = dict(entities)
        for triple in relation_triples:
            for e in (triple.head, triple.tail):
                if e not in self._entities:
                    raise DanglingEntityError(e)
        for triple in attribute_triples:
            if triple.entity not in self._entities:
                raise DanglingEntityError(triple.entity)
        self.relation_triples = tuple(sorted(set(relation_triples)))
        self.attribute_triples = tuple(sorted(set(attribute_triples)))

        self._adjacency = {e: set() for e in self._entities}
        self._degree = Counter()
        for head, relation, tail in self.relation_triples:
            self._adjacency[head].add((relation, tail))
            self._adjacency[tail].add((relation, head))
            self._degree[head] += 1
            if tail != head:
                self._degree[tail] += 1
        self._adjacency = {e: frozenset(n) for e, n in self._adjacency.items()}

        self._attributes = {}
        for entity, key, value in self.attribute_triples:
            self._attributes.setdefault(entity, []).append((key, value))

    def __eq__(self, other):
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (self.side == other.side and self._entities == other._entities
                and self.relation_triples == other.relation_triples
                and self.attribute_triples == other.attribute_triples)

    def __hash__(self):
        return hash((self.side, self.relation_triples))

    def __len__(self):
        return len(self._entities)

    def __contains__(self, e):
        return e in self._entities

    def __repr__(self):
        return "KnowledgeGraph({0}, {1} entities, {2} triples)".format(
            self.side.value, len(self._entities), len(self.relation_triples))

    def _check(self, e):
        if e not in self._entities:
            raise EntityNotFoundError(e)

    def ids(self):
        """Returns every entity id in ascending order."""
        return sorted(self._entities)

    def name(self, e):
        """Returns the name of entity ``e``.

        :raises EntityNotFoundError: if ``e`` is not in the graph."""
        self._check(e)
        return self._entities[e]

    def neighbors(self, e):
        """Returns the ``(relation, neighbor)`` pairs of ``e``, collected from
        triples where ``e`` is either head or tail.

        :raises EntityNotFoundError: if ``e`` is not in the graph.
        :returns: a frozenset."""
        self._check(e)
        return self._adjacency[e]

    def degree(self, e):
        """Returns the number of relation triples incident to ``e``. A self
        loop counts once.

        :raises EntityNotFoundError: if ``e`` is not in the graph."""
        self._check(e)
        return self._degree[e]

    def attributes(self, e):
        """Returns the sorted ``(key, value)`` attribute pairs of ``e``."""
        self._check(e)
        return list(self._attributes.get(e, []))

    def entity_profile(self, e):
        """Returns the :py:class:`Profile` of ``e``. Attribute and relation
        pairs are sorted by key, then value, so profiles are byte
        deterministic.

        :raises EntityNotFoundError: if ``e`` is not in the graph."""
        self._check(e)
        relations = sorted((relation, self._entities[n])
                           for relation, n in self._adjacency[e])
        return Profile(e, self._entities[e], tuple(self.attributes(e)),
                       tuple(relations))


class SeedPairs(object):
    """Known aligned ``(source, target)`` id pairs. Each source appears at
    most once.

    :param pairs: an iterable of id pairs.
    :raises ValueError: if a source id repeats."""

    def __init__(self, pairs):
        self.pairs = tuple(pairs)
        self._targets = {}
        for source, target in self.pairs:
            if source in self._targets:
                raise ValueError(
                    "Source entity {0} appears twice".format(source))
            self._targets[source] = target

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair):
        return self._targets.get(pair[0]) == pair[1]

    def sources(self):
        """Returns the source ids in file order."""
        return [s for s, _ in self.pairs]

    def target_of(self, source):
        """Returns the counterpart of ``source`` or None."""
        return self._targets.get(source)

    def as_dict(self):
        return dict(self._targets)


def _rows(path):
    """Yields ``(line number, line)`` for every non blank line of a UTF-8
    file."""
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if line.strip():
                yield number, line


def _match(pattern, path, number, line, what):
    result = pattern.parse(line)
    if result is None:
        raise GraphFormatError(path, number, "expected " + what)
    for value in result.fixed:
        if isinstance(value, int) and value < 0:
            raise GraphFormatError(path, number,
                                   "negative entity id {0}".format(value))
    return result.fixed


def load_entities(path):
    """Reads an ``id \\t name`` entity file.

    :raises GraphFormatError: for malformed rows and duplicate ids.
    :returns: a dictionary of id to name."""
    entities = {}
    for number, line in _rows(path):
        e, name = _match(ENTITY_ROW, path, number, line, "'id<TAB>name'")
        if e in entities:
            LOGGER.error("{0}:{1}: duplicate entity id {2}".format(
                path, number, e))
            raise GraphFormatError(path, number,
                                   "duplicate entity id {0}".format(e))
        entities[e] = display_name(name)
    return entities


def load_graph(entity_file, relation_file, attribute_file=None,
               side=Side.SOURCE):
    """Loads one knowledge graph from TSV files. Blank lines are ignored and
    duplicate triples are kept once.

    :param entity_file: path of the ``id \\t name`` file.
    :param relation_file: path of the ``head \\t relation \\t tail`` file.
    :param attribute_file: path of the ``id \\t key \\t value`` file, or
                           None for a graph without attributes.
    :param side: the :py:class:`Side` of the graph.
    :raises GraphFormatError: if a row is malformed.
    :raises DanglingEntityError: if a triple names an unknown id.
    :returns: a :py:class:`KnowledgeGraph`."""
    entities = load_entities(entity_file)

    relation_triples = []
    for number, line in _rows(relation_file):
        head, relation, tail = _match(RELATION_ROW, relation_file, number,
                                      line, "'head<TAB>relation<TAB>tail'")
        for e in (head, tail):
            if e not in entities:
                LOGGER.error("{0}:{1}: dangling entity id {2}".format(
                    relation_file, number, e))
                raise DanglingEntityError(e, relation_file, number)
        relation_triples.append(RelationTriple(head, relation, tail))

    attribute_triples = []
    if attribute_file is not None:
        for number, line in _rows(attribute_file):
            result = ATTRIBUTE_ROW.parse(line)
            if result is None:
                result = ATTRIBUTE_EMPTY_VALUE_ROW.parse(line)
                row = (result.fixed + ("",)) if result is not None else None
            else:
                row = result.fixed
            if row is None or row[0] < 0:
                raise GraphFormatError(attribute_file, number,
                                       "expected 'id<TAB>key<TAB>value'")
            if row[0] not in entities:
                LOGGER.error("{0}:{1}: dangling entity id {2}".format(
                    attribute_file, number, row[0]))
                raise DanglingEntityError(row[0], attribute_file, number)
            attribute_triples.append(AttributeTriple(*row))

    graph = KnowledgeGraph(side, entities, relation_triples,
                           attribute_triples)
    LOGGER.info("Loaded {0} graph: {1} entities, {2} relation triples, {3} "
                "attribute triples".format(side.value, len(graph),
                                           len(graph.relation_triples),
                                           len(graph.attribute_triples)))
    return graph


def load_seed_pairs(path, source_graph, target_graph):
    """Reads a ``source_id \\t target_id`` pair file.

    :raises GraphFormatError: for malformed rows or a repeated source id.
    :raises DanglingEntityError: if either side of a pair is unknown.
    :returns: a :py:class:`SeedPairs`."""
    pairs = []
    seen = set()
    for number, line in _rows(path):
        source, target = _match(PAIR_ROW, path, number, line,
                                "'source<TAB>target'")
        if source not in source_graph:
            raise DanglingEntityError(source, path, number)
        if target not in target_graph:
            raise DanglingEntityError(target, path, number)
        if source in seen:
            raise GraphFormatError(path, number,
                                   "source entity {0} paired twice"
                                   .format(source))
        seen.add(source)
        pairs.append((source, target))
    return SeedPairs(pairs)


def frequency_table(*graphs):
    """Counts how often every attribute key and relation label occurs over
    the given graphs.

    :returns: a ``Counter`` keyed by ``("attribute", key)`` and
              ``("relation", label)``."""
    table = Counter()
    for graph in graphs:
        for triple in graph.attribute_triples:
            table[("attribute", triple.attribute)] += 1
        for triple in graph.relation_triples:
            table[("relation", triple.relation)] += 1
    return table
