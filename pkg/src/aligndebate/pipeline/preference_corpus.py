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
"""Builds the preference corpus used to fine-tune the entity encoder: seed
positives, name-similarity negatives and degree-aware neighbour negatives,
written as instruction records."""

from aligndebate.exception import CorpusError, EntityNotFoundError
from aligndebate.pipeline.embedding_index import cosine_matrix
import aligndebate.utils as utils
from collections import namedtuple, Counter
import json
import logging
import random
import numpy as np

LOGGER = logging.getLogger(__name__)

POSITIVE = "positive"
NAME_NEGATIVE = "name_negative"
DEGREE_NEGATIVE = "degree_negative"
RANDOM_NEGATIVE = "random_negative"

KIND_ORDER = (POSITIVE, NAME_NEGATIVE, DEGREE_NEGATIVE, RANDOM_NEGATIVE)
"""Record order of the corpus; within a kind records follow source id."""

INSTRUCTION = ("Determine whether entity A and entity B are the same entity "
               "in the real world. Answer Yes or No.")

TEMPLATE_VERSION = "1"

RECORD_FIELDS = ("instruction", "input", "chosen", "rejected")

PreferencePair = namedtuple("PreferencePair",
                            ["source", "counterpart", "kind", "similarity"])
PreferencePair.__new__.__defaults__ = (None, )

InstructionRecord = namedtuple("InstructionRecord", RECORD_FIELDS)

TRAINER_CONFIG = {
    "method": "dpo",
    "base_model": "meta-llama/Meta-Llama-3-8B-Instruct",
    "lora_r": 22,
    "lora_alpha": 44,
    "lora_dropout": 0.1,
    "target_modules": ["q_proj", "v_proj"],
    "learning_rate": 1e-4,
    "num_train_epochs": 1,
    "bf16": True,
}
"""LoRA and DPO settings handed to an external trainer."""


def template_sha256():
    """Fingerprint of the instruction text and the input layout."""
    layout = "\n".join(["Entity A Name:", "Entity A Attributes:",
                        "Entity A Relations:", "Entity B Name:",
                        "Entity B Attributes:", "Entity B Relations:"])
    return utils.sha256_text(INSTRUCTION + "\n" + layout)


def name_negatives(sources, source_store, target_store, seeds, floor=0.0,
                   chunk_rows=1024):
    """For every source picks the target whose name vector is most similar
    to the source's name vector, excluding the seed counterpart. Ties go to
    the smallest target id.

    :param sources: source ids.
    :param source_store: the source embedding store.
    :param target_store: the target store, whose ids form the search pool.
    :param seeds: the :py:class:`~aligndebate.pipeline.kg_store.SeedPairs`.
    :param floor: pairs less similar than this are dropped. A floor of 0 or
                  below keeps every pair.
    :raises CorpusError: if the pool has fewer than two entities or a source
                         has no seed counterpart.
    :returns: a list of :py:class:`PreferencePair` carrying the cosine."""
    if len(target_store) < 2:
        raise CorpusError(None, "The target pool needs at least 2 entities "
                          "to mine name negatives")
    for s in sources:
        if seeds.target_of(s) is None:
            raise CorpusError((s, None), "Source has no seed counterpart")
    if not sources:
        return []
    pool = target_store.ids
    pairs = []
    dropped = 0
    for start in range(0, len(sources), chunk_rows):
        block = sources[start:start + chunk_rows]
        queries = source_store.subset(block)
        sims = cosine_matrix(queries, target_store, features="name")
        for s in block:
            sim = sims[queries.row(s)]
            truth = seeds.target_of(s)
            if truth in target_store:
                sim = sim.copy()
                sim[target_store.row(truth)] = -np.inf
            best = int(np.argmax(sim))
            similarity = float(sim[best])
            if floor > 0 and similarity < floor:
                dropped += 1
                continue
            pairs.append(PreferencePair(s, int(pool[best]), NAME_NEGATIVE,
                                        similarity))
    if dropped:
        LOGGER.info("Dropped {0} name negatives below floor {1}".format(
            dropped, floor))
    return pairs


def degree_negatives(g, sources):
    """For every source picks its neighbour of highest degree, ties going to
    the smallest id. The source itself is never picked. Sources without
    neighbours are skipped and logged.

    :param g: the :py:class:`~aligndebate.pipeline.kg_store.KnowledgeGraph`
              holding the sources.
    :returns: a list of :py:class:`PreferencePair`."""
    pairs = []
    for s in sources:
        neighbors = {n for _, n in g.neighbors(s) if n != s}
        if not neighbors:
            LOGGER.info("Source {0} has no neighbours, no degree negative"
                        .format(s))
            continue
        best = min(neighbors, key=lambda n: (-g.degree(n), n))
        pairs.append(PreferencePair(s, best, DEGREE_NEGATIVE))
    return pairs


def random_negatives(sources, target_ids, seeds, seed=0):
    """Pairs every source with a uniformly drawn target other than its seed
    counterpart.

    :param seed: seed of the random generator.
    :raises CorpusError: if fewer than two targets are available."""
    target_ids = sorted(target_ids)
    if len(target_ids) < 2:
        raise CorpusError(None, "Random negatives need at least 2 targets")
    rng = random.Random(seed)
    pairs = []
    for s in sources:
        truth = seeds.target_of(s)
        choice = truth
        while choice == truth:
            choice = rng.choice(target_ids)
        pairs.append(PreferencePair(s, choice, RANDOM_NEGATIVE))
    return pairs


def _render_input(pair, g_s, g_t):
    other = g_s if pair.kind == DEGREE_NEGATIVE else g_t
    try:
        a = g_s.entity_profile(pair.source)
        b = other.entity_profile(pair.counterpart)
    except EntityNotFoundError as ex:
        raise CorpusError((pair.source, pair.counterpart),
                          "Cannot render {0} pair: {1}".format(pair.kind,
                                                                ex.message))
    return a.render("Entity A") + "\n" + b.render("Entity B")


def to_record(pair, g_s, g_t):
    """Renders one pair as an :py:class:`InstructionRecord`. Positive pairs
    choose "Yes", every negative chooses "No"."""
    if pair.kind == POSITIVE:
        chosen, rejected = "Yes", "No"
    else:
        chosen, rejected = "No", "Yes"
    return InstructionRecord(INSTRUCTION, _render_input(pair, g_s, g_t),
                             chosen, rejected)


def build_corpus(seeds, name_negs, degree_negs, g_s, g_t, random_negs=(),
                 datasets=(), floor=0.0):
    """Assembles the corpus. Records are ordered by kind then source id.

    :param seeds: the :py:class:`~aligndebate.pipeline.kg_store.SeedPairs`.
    :param name_negs: pairs from :py:func:`name_negatives`.
    :param degree_negs: pairs from :py:func:`degree_negatives`.
    :param g_s: the source graph.
    :param g_t: the target graph.
    :param random_negs: optional pairs from :py:func:`random_negatives`.
    :param datasets: dataset names recorded in the manifest.
    :param floor: the name similarity floor recorded in the manifest.
    :raises CorpusError: if a pair cannot be rendered or a negative repeats
                         a seed pair.
    :returns: a tuple of the record list and the manifest dictionary."""
    pairs = [PreferencePair(s, t, POSITIVE) for s, t in seeds]
    for pair in list(name_negs) + list(random_negs):
        if pair in seeds:
            raise CorpusError((pair.source, pair.counterpart),
                              "Negative pair duplicates a seed pair")
    pairs += list(name_negs) + list(degree_negs) + list(random_negs)
    pairs.sort(key=lambda p: (KIND_ORDER.index(p.kind), p.source,
                              p.counterpart))
    records = [to_record(pair, g_s, g_t) for pair in pairs]
    counts = Counter(p.kind for p in pairs)
    manifest = {
        "schema_version": 1,
        "template_version": TEMPLATE_VERSION,
        "template_sha256": template_sha256(),
        "datasets": list(datasets),
        "name_similarity_floor": floor,
        "counts": {kind: counts.get(kind, 0) for kind in KIND_ORDER},
        "records": len(records),
    }
    LOGGER.info("Built corpus of {0} records: {1}".format(
        len(records), manifest["counts"]))
    return records, manifest


def serialize_corpus(records):
    """Returns the records as UTF-8 JSON lines, keys in record field order.

    :returns: bytes."""
    return "".join(
        json.dumps(record._asdict(), ensure_ascii=False) + "\n"
        for record in records).encode("utf-8")


def deserialize_corpus(data):
    """Parses bytes written by :py:func:`serialize_corpus`.

    :raises CorpusError: if a line is not a record."""
    records = []
    for number, line in enumerate(data.decode("utf-8").split("\n"), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if tuple(obj) != RECORD_FIELDS:
                raise ValueError("unexpected keys {0}".format(list(obj)))
            records.append(InstructionRecord(**obj))
        except (ValueError, TypeError) as ex:
            raise CorpusError(None, "line {0}: {1}".format(number, ex))
    return records


def trainer_manifest():
    """Returns a copy of the LoRA and DPO trainer settings."""
    config = dict(TRAINER_CONFIG)
    config["target_modules"] = list(config["target_modules"])
    return config


def write_json(obj, path):
    """Writes ``obj`` as sorted, indented JSON."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
